#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sharp/config.hpp"
#include "sharp/error.hpp"
#include "sharp/runner.hpp"

using namespace sharp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p)
{
	std::ifstream in(p, std::ios::binary);
	std::ostringstream s;
	s << in.rdbuf();
	return s.str();
}

std::size_t count_lines(const std::string &s)
{
	return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

fs::path scratch(const std::string &name)
{
	auto dir = fs::temp_directory_path() / "sharp_unit_tests";
	fs::create_directories(dir);
	return dir / name;
}

} // namespace

TEST_CASE("[cli] format_double round-trips")
{
	for (double v : {0.1 + 0.2, 1.0 / 3.0, 1e-300, 123456789.125, 0.0, kSyntheticUtilizationBound}) {
		auto s = format_double(v);
		CHECK(std::stod(s) == v);
	}
	CHECK(format_double(0.5) == "0.5");
	CHECK(format_double(100.0) == "100");
}

TEST_CASE("[cli] config round-trip covers every key")
{
	ExperimentConfig c;
	c.command = "sweep";
	c.seed = 123456789012345ULL;
	c.utilization = 0.1 + 0.2;
	c.n_list = {3, 5, 7};
	c.period_set = {2, 9};
	c.d_max = 1.0 / 3.0;
	c.trace = "trace file.csv";
	c.set_point = 0.7;

	std::stringstream s;
	write_config(s, c);
	CHECK(count_lines(s.str()) == ExperimentConfig::keys().size());
	auto back = read_config(s);
	for (const auto &k : ExperimentConfig::keys())
		CHECK_MESSAGE(back.get(k) == c.get(k), k);
	CHECK(back.utilization == c.utilization);
	CHECK(back.d_max == c.d_max);
	CHECK(back.n_list == c.n_list);
}

TEST_CASE("[cli] config parsing")
{
	std::istringstream in("# comment\n\n n = 12 \nn_list = 4, 8\ngenerator = equal-split\n");
	auto c = read_config(in);
	CHECK(c.n == 12);
	CHECK(c.n_list == std::vector<std::size_t>{4, 8});
	CHECK(c.generator == "equal-split");
	CHECK(c.workload().rule == UtilizationRule::equal_split);
}

TEST_CASE("[cli] config errors name the line and the key")
{
	auto line_of = [](const std::string &text) -> std::size_t {
		std::istringstream in(text);
		try {
			read_config(in);
		} catch (const InputError &e) {
			return e.line();
		}
		return 0;
	};
	CHECK(line_of("n = 4\nbogus = 1\n") == 2);
	CHECK(line_of("n = 4\n\nn 5\n") == 3);
	CHECK(line_of("trials = -3\n") == 1);
	CHECK(line_of("utilization = 0.5x\n") == 1);
	CHECK(line_of("generator = uunifast\n") == 1);

	ExperimentConfig c;
	try {
		c.set("period_rule", "harmonic");
		FAIL("expected an error");
	} catch (const ParameterError &e) {
		CHECK(std::string(e.what()).find("period_rule") != std::string::npos);
	}
	CHECK_THROWS_AS(c.set("n", "0"), ParameterError);
	CHECK_THROWS_AS(c.get("nope"), ParameterError);
}

TEST_CASE("[cli] check exit codes")
{
	ExperimentConfig c;
	c.command = "check";
	c.input = std::string(SHARP_TEST_DATA) + "/fig2.tasks";
	std::ostringstream out, err;
	CHECK(run(c, out, err) == exit_unschedulable);
	CHECK(out.str().find("1,18,3.06,18,exceeds") != std::string::npos);
	CHECK(err.str().find("verdict: unschedulable") != std::string::npos);

	c.input = std::string(SHARP_TEST_DATA) + "/barely.tasks";
	std::ostringstream out2, err2;
	CHECK(run(c, out2, err2) == exit_ok);
	CHECK(out2.str().find("1,3,1,3,2") != std::string::npos);

	c.input = "no/such/file.tasks";
	std::ostringstream out3, err3;
	CHECK(run(c, out3, err3) == exit_usage);
	CHECK(err3.str().rfind("error: ", 0) == 0);
}

TEST_CASE("[cli] unknown names are usage errors")
{
	std::ostringstream out, err;
	ExperimentConfig c;
	c.command = "recipe";
	c.recipe = "fig99";
	CHECK(run(c, out, err) == exit_usage);
	c.command = "frobnicate";
	CHECK(run(c, out, err) == exit_usage);
	CHECK_THROWS_AS(recipe_preset("fig99"), ParameterError);
}

TEST_CASE("[cli] recipe presets")
{
	CHECK(recipe_names().size() == 5);
	auto a = recipe_preset("fig3b");
	CHECK(a.command == "recipe");
	CHECK(a.generator == "equal-split");
	CHECK(a.grid().points().size() == 21);
	auto b = recipe_preset("fig5");
	CHECK(b.period_rule == "set");
	CHECK(b.workload().tag() == "restricted-period");
	auto d = recipe_preset("fig8");
	CHECK(d.exec_cv == benchmark_workload().exec_cv);
	auto e = recipe_preset("fig4");
	CHECK(e.grid().points().size() == 21);
}

TEST_CASE("[cli] sweep output and run record")
{
	ExperimentConfig c;
	c.command = "sweep";
	c.n = 6;
	c.trials = 50;
	c.seed = 11;
	c.out = scratch("sweep.csv").string();

	std::ostringstream out, err;
	REQUIRE(run(c, out, err) == exit_ok);
	auto first = slurp(c.out);
	CHECK(count_lines(first) == 22);
	CHECK(first.rfind("utilization,p_hat,ci_lo,ci_hi,trials\n0.6,1,", 0) == 0);
	CHECK(out.str().find("u_star=") != std::string::npos);

	auto record = slurp(c.out + ".run");
	CHECK(record.rfind("# sharp " + toolkit_version() + " run record\n", 0) == 0);
	std::istringstream rec(record);
	auto back = read_config(rec);
	CHECK(back.get("trials") == "50");
	CHECK(back.get("out") == c.out);

	REQUIRE(run(back, out, err) == exit_ok);
	CHECK(slurp(c.out) == first);
}

TEST_CASE("[cli] gen writes a readable task file")
{
	ExperimentConfig c;
	c.command = "gen";
	c.n = 5;
	c.utilization = 0.7;
	std::ostringstream out, err;
	REQUIRE(run(c, out, err) == exit_ok);
	auto path = scratch("gen.tasks");
	std::ofstream(path) << out.str();

	ExperimentConfig k;
	k.command = "check";
	k.input = path.string();
	std::ostringstream o2, e2;
	int code = run(k, o2, e2);
	CHECK((code == exit_ok || code == exit_unschedulable));
	CHECK(count_lines(o2.str()) == 6);
}
