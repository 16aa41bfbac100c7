#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "sharp/config.hpp"
#include "sharp/error.hpp"
#include "sharp/runner.hpp"

using namespace sharp;

namespace {

struct Flags {
	std::map<std::string, std::string> values;
	std::vector<std::pair<std::string, CLI::Option *>> options;

	void add(CLI::App *app, const std::string &key, const std::string &help)
	{
		std::string name = "--" + key;
		for (auto &c : name)
			if (c == '_')
				c = '-';
		options.emplace_back(key, app->add_option(name, values[key], help));
	}

	void apply(ExperimentConfig &cfg) const
	{
		for (const auto &[key, opt] : options)
			if (opt->count())
				cfg.set(key, values.at(key));
	}
};

void add_taskset_flags(Flags &f, CLI::App *app)
{
	f.add(app, "generator", "uunisort | equal-split");
	f.add(app, "period_rule", "uniform | set");
	f.add(app, "period_lo", "smallest period (uniform rule)");
	f.add(app, "period_hi", "largest period (uniform rule)");
	f.add(app, "period_set", "comma-separated periods (set rule)");
}

void add_grid_flags(Flags &f, CLI::App *app)
{
	f.add(app, "u_min", "first grid point");
	f.add(app, "u_max", "last grid point");
	f.add(app, "u_step", "grid step");
	f.add(app, "trials", "task sets per grid point");
	f.add(app, "epsilon", "width is U(eps) - U(1 - eps)");
}

} // namespace

int main(int argc, char **argv)
{
	CLI::App app{"Sharp utilization thresholds: schedulability analysis and simulation"};
	app.set_version_flag("--version", toolkit_version());
	app.fallthrough();
	app.require_subcommand(0, 1);

	Flags flags;
	std::string config_path;
	app.add_option("--config", config_path, "key = value config file");
	flags.add(&app, "seed", "experiment seed");
	flags.add(&app, "out", "CSV output file (a <out>.run record is written next to it)");
	flags.add(&app, "jobs", "worker threads (0 = all cores)");

	auto *gen = app.add_subcommand("gen", "draw a random task set");
	flags.add(gen, "n", "number of tasks");
	flags.add(gen, "utilization", "total utilization");
	add_taskset_flags(flags, gen);

	auto *check = app.add_subcommand("check", "exact rate monotonic test of a task-set file");
	flags.options.emplace_back("input", check->add_option("file", flags.values["input"], "task-set file")->required());

	auto *sweep = app.add_subcommand("sweep", "schedulable fraction over a utilization grid");
	auto *threshold = app.add_subcommand("threshold", "threshold location and width for one n");
	for (auto *sub : {sweep, threshold}) {
		flags.add(sub, "n", "number of tasks");
		add_taskset_flags(flags, sub);
		add_grid_flags(flags, sub);
	}

	auto *width = app.add_subcommand("width", "threshold width against n");
	flags.add(width, "n_list", "comma-separated task counts");
	add_taskset_flags(flags, width);
	add_grid_flags(flags, width);

	auto *apsim = app.add_subcommand("apsim", "deadline monotonic simulation of aperiodic job streams");
	flags.add(apsim, "streams", "number of job streams");
	flags.add(apsim, "cd_cap", "largest c/D of a stream");
	flags.add(apsim, "d_min", "smallest relative deadline");
	flags.add(apsim, "d_max", "largest relative deadline");
	flags.add(apsim, "target_util", "average synthetic utilization");
	flags.add(apsim, "horizon", "simulated time (0 = 10^4 x largest deadline)");
	flags.add(apsim, "warmup", "fraction of the horizon left out of the counts");
	flags.add(apsim, "trace", "per-event CSV trace file");

	auto *dvs = app.add_subcommand("dvs", "power-controlled request server simulation");
	flags.add(dvs, "set_point", "synthetic utilization set point");
	flags.add(dvs, "load", "offered load at full speed");
	flags.add(dvs, "sessions", "number of sessions");
	flags.add(dvs, "profile", "frequency/voltage table file");
	flags.add(dvs, "exec_cv", "coefficient of variation of actual execution times");
	flags.add(dvs, "hysteresis", "delay before slowing down (ms)");
	flags.add(dvs, "static_fraction", "share of frequency-independent power");

	auto *recipe = app.add_subcommand("recipe", "data for one of the figures");
	std::string recipe_name;
	recipe->add_option("name", recipe_name, "fig3a | fig3b | fig4 | fig5 | fig8")->required();
	flags.add(recipe, "trials", "trials per grid point");
	flags.add(recipe, "n_list", "comma-separated task counts");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		int code = app.exit(e);
		return code == 0 ? 0 : exit_usage;
	}

	ExperimentConfig cfg;
	try {
		std::string command;
		for (auto *sub : app.get_subcommands())
			command = sub->get_name();

		if (command == "recipe")
			cfg = recipe_preset(recipe_name);
		if (!config_path.empty()) {
			cfg = read_config_file(config_path, cfg);
			if (command.empty() && cfg.command == "recipe")
				cfg = read_config_file(config_path, recipe_preset(cfg.recipe));
		}
		if (!command.empty())
			cfg.command = command;
		if (cfg.command.empty()) {
			std::cerr << app.help();
			return exit_usage;
		}
		flags.apply(cfg);
	} catch (const ParameterError &e) {
		std::cerr << "error: " << e.what() << '\n';
		return exit_usage;
	} catch (const InputError &e) {
		std::cerr << "error: " << e.what() << '\n';
		return exit_usage;
	}

	return run(cfg, std::cout, std::cerr);
}
