#include "sharp/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "sharp/error.hpp"

namespace sharp {

std::string format_double(double v)
{
	char buf[64];
	auto r = std::to_chars(buf, buf + sizeof buf, v);
	return std::string(buf, r.ptr);
}

namespace {

std::string trim(const std::string &s)
{
	auto b = s.find_first_not_of(" \t\r");
	if (b == std::string::npos)
		return {};
	auto e = s.find_last_not_of(" \t\r");
	return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string &key, const std::string &value, const std::string &why)
{
	throw ParameterError(key + ": " + why + " (got '" + value + "')");
}

double parse_double(const std::string &key, const std::string &value)
{
	double v = 0.0;
	auto r = std::from_chars(value.data(), value.data() + value.size(), v);
	if (r.ec != std::errc() || r.ptr != value.data() + value.size())
		bad_value(key, value, "expected a number");
	return v;
}

template <typename Int>
Int parse_int(const std::string &key, const std::string &value)
{
	Int v = 0;
	auto r = std::from_chars(value.data(), value.data() + value.size(), v);
	if (r.ec != std::errc() || r.ptr != value.data() + value.size())
		bad_value(key, value, "expected an integer");
	return v;
}

template <typename Int>
std::vector<Int> parse_list(const std::string &key, const std::string &value)
{
	std::vector<Int> out;
	std::stringstream ss(value);
	std::string item;
	while (std::getline(ss, item, ','))
		out.push_back(parse_int<Int>(key, trim(item)));
	if (out.empty())
		bad_value(key, value, "expected a comma-separated list");
	return out;
}

template <typename Int>
std::string join(const std::vector<Int> &v)
{
	std::string s;
	for (std::size_t i = 0; i < v.size(); ++i) {
		if (i)
			s += ',';
		s += std::to_string(v[i]);
	}
	return s;
}

struct Field {
	std::function<void(ExperimentConfig &, const std::string &)> set;
	std::function<std::string(const ExperimentConfig &)> get;
};

template <typename T>
Field text(T ExperimentConfig::*m)
{
	return {[m](ExperimentConfig &c, const std::string &v) { c.*m = v; },
	        [m](const ExperimentConfig &c) { return c.*m; }};
}

Field number(double ExperimentConfig::*m)
{
	return {[m](ExperimentConfig &c, const std::string &v) { c.*m = parse_double("", v); },
	        [m](const ExperimentConfig &c) { return format_double(c.*m); }};
}

template <typename Int>
Field integer(Int ExperimentConfig::*m)
{
	return {[m](ExperimentConfig &c, const std::string &v) { c.*m = parse_int<Int>("", v); },
	        [m](const ExperimentConfig &c) { return std::to_string(c.*m); }};
}

template <typename Int>
Field list(std::vector<Int> ExperimentConfig::*m)
{
	return {[m](ExperimentConfig &c, const std::string &v) { c.*m = parse_list<Int>("", v); },
	        [m](const ExperimentConfig &c) { return join(c.*m); }};
}

using C = ExperimentConfig;

const std::vector<std::pair<std::string, Field>> &fields()
{
	static const std::vector<std::pair<std::string, Field>> table = {
		{"command", text(&C::command)},
		{"recipe", text(&C::recipe)},
		{"seed", integer(&C::seed)},
		{"jobs", integer(&C::jobs)},
		{"out", text(&C::out)},
		{"generator", text(&C::generator)},
		{"n", integer(&C::n)},
		{"n_list", list(&C::n_list)},
		{"period_rule", text(&C::period_rule)},
		{"period_lo", integer(&C::period_lo)},
		{"period_hi", integer(&C::period_hi)},
		{"period_set", list(&C::period_set)},
		{"utilization", number(&C::utilization)},
		{"u_min", number(&C::u_min)},
		{"u_max", number(&C::u_max)},
		{"u_step", number(&C::u_step)},
		{"trials", integer(&C::trials)},
		{"epsilon", number(&C::epsilon)},
		{"input", text(&C::input)},
		{"streams", integer(&C::streams)},
		{"cd_cap", number(&C::cd_cap)},
		{"d_min", number(&C::d_min)},
		{"d_max", number(&C::d_max)},
		{"target_util", number(&C::target_util)},
		{"horizon", number(&C::horizon)},
		{"warmup", number(&C::warmup)},
		{"trace", text(&C::trace)},
		{"set_point", number(&C::set_point)},
		{"load", number(&C::load)},
		{"sessions", integer(&C::sessions)},
		{"exec_cv", number(&C::exec_cv)},
		{"hysteresis", number(&C::hysteresis)},
		{"static_fraction", number(&C::static_fraction)},
		{"profile", text(&C::profile)},
	};
	return table;
}

const Field &field(const std::string &key)
{
	for (const auto &[k, f] : fields())
		if (k == key)
			return f;
	throw ParameterError("unknown config key '" + key + "'");
}

} // namespace

void ExperimentConfig::set(const std::string &key, const std::string &value)
{
	const Field &f = field(key);
	try {
		f.set(*this, trim(value));
	} catch (const ParameterError &e) {
		// the per-type parsers do not know the key
		std::string what = e.what();
		throw ParameterError(key + what);
	}

	if (key == "generator")
		parse_utilization_rule(generator);
	else if (key == "period_rule" && period_rule != "uniform" && period_rule != "set")
		bad_value(key, value, "expected uniform or set");
	else if ((key == "n" || key == "trials" || key == "streams" || key == "sessions") && get(key) == "0")
		bad_value(key, value, "must be positive");
}

std::string ExperimentConfig::get(const std::string &key) const
{
	return field(key).get(*this);
}

const std::vector<std::string> &ExperimentConfig::keys()
{
	static const std::vector<std::string> k = [] {
		std::vector<std::string> out;
		for (const auto &[key, f] : fields())
			out.push_back(key);
		return out;
	}();
	return k;
}

WorkloadSpec ExperimentConfig::workload() const
{
	return workload(n);
}

WorkloadSpec ExperimentConfig::workload(std::size_t n_tasks) const
{
	WorkloadSpec w;
	w.n = n_tasks;
	w.rule = parse_utilization_rule(generator);
	w.periods = period_rule == "set" ? PeriodRule::from_set(period_set) : PeriodRule::uniform(period_lo, period_hi);
	return w;
}

SweepGrid ExperimentConfig::grid() const
{
	return {u_min, u_max, u_step};
}

StreamGenConfig ExperimentConfig::stream_config() const
{
	StreamGenConfig g;
	g.n_streams = streams;
	g.max_cd_ratio = cd_cap;
	g.d_min = d_min;
	g.d_max = d_max;
	g.target_avg_util = target_util;
	return g;
}

WorkloadConfig ExperimentConfig::dvs_workload() const
{
	WorkloadConfig w;
	w.load = load;
	w.sessions = sessions;
	w.exec_cv = exec_cv;
	w.hysteresis_delay = hysteresis;
	return w;
}

DvsProfile ExperimentConfig::dvs_profile() const
{
	if (profile.empty())
		return pentium_m_profile(static_fraction);
	return read_profile_file(profile, static_fraction);
}

ExperimentConfig read_config(std::istream &in, ExperimentConfig base)
{
	std::string line;
	std::size_t lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		auto hash = line.find('#');
		if (hash != std::string::npos)
			line.erase(hash);
		line = trim(line);
		if (line.empty())
			continue;
		auto eq = line.find('=');
		if (eq == std::string::npos)
			throw InputError("expected 'key = value'", lineno);
		std::string key = trim(line.substr(0, eq));
		if (key.empty())
			throw InputError("missing key before '='", lineno);
		try {
			base.set(key, line.substr(eq + 1));
		} catch (const ParameterError &e) {
			throw InputError(e.what(), lineno);
		}
	}
	return base;
}

ExperimentConfig read_config_file(const std::string &path, ExperimentConfig base)
{
	std::ifstream in(path);
	if (!in)
		throw InputError("cannot open config file '" + path + "'");
	try {
		return read_config(in, std::move(base));
	} catch (const InputError &e) {
		throw InputError(path + ": " + e.what());
	}
}

void write_config(std::ostream &out, const ExperimentConfig &cfg)
{
	for (const auto &[key, f] : fields())
		out << key << " = " << f.get(cfg) << '\n';
}

} // namespace sharp
