#include "sharp/taskset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "sharp/error.hpp"

namespace sharp {

namespace {

std::string fmt_double(double v)
{
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

template <typename T>
T parse_field(const std::string &tok, const char *name, std::size_t line)
{
	T v{};
	auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
	if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
		throw InputError("bad " + std::string(name) + " '" + tok + "'", line);
	return v;
}

} // namespace

TaskSet read_taskset(std::istream &in)
{
	std::vector<Task> tasks;
	std::string raw;
	std::size_t lineno = 0;
	while (std::getline(in, raw)) {
		++lineno;
		if (auto hash = raw.find('#'); hash != std::string::npos)
			raw.erase(hash);
		std::istringstream fields(raw);
		std::vector<std::string> tok;
		for (std::string t; fields >> t;)
			tok.push_back(t);
		if (tok.empty())
			continue;
		if (tok.size() < 2 || tok.size() > 3)
			throw InputError("expected `period exec_time [deadline]`", lineno);

		auto period = parse_field<std::int64_t>(tok[0], "period", lineno);
		auto exec = parse_field<double>(tok[1], "exec_time", lineno);
		try {
			if (tok.size() == 3)
				tasks.emplace_back(period, exec, parse_field<double>(tok[2], "deadline", lineno));
			else
				tasks.emplace_back(period, exec);
		} catch (const ParameterError &e) {
			throw InputError(e.what(), lineno);
		}
	}
	if (tasks.empty())
		throw InputError("task set file contains no tasks");
	return TaskSet(std::move(tasks));
}

TaskSet read_taskset_file(const std::string &path)
{
	std::ifstream in(path);
	if (!in)
		throw InputError("cannot open task set file '" + path + "'");
	return read_taskset(in);
}

void write_taskset(std::ostream &out, const TaskSet &ts)
{
	out << "# period exec_time deadline\n";
	for (const auto &t : ts)
		out << t.period << ' ' << fmt_double(t.exec_time) << ' ' << fmt_double(t.deadline) << '\n';
}

void write_taskset_csv(std::ostream &out, const TaskSet &ts)
{
	out << "index,period,exec_time,deadline,utilization\n";
	for (std::size_t i = 0; i < ts.size(); ++i) {
		const auto &t = ts[i];
		out << i << ',' << t.period << ',' << fmt_double(t.exec_time) << ','
		    << fmt_double(t.deadline) << ',' << fmt_double(t.utilization()) << '\n';
	}
}

} // namespace sharp
