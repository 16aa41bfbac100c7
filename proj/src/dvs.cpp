#include "sharp/dvs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "sharp/error.hpp"
#include "sharp/parallel.hpp"

namespace sharp {

namespace {

constexpr double kUtilSlack = 1e-12;

} // namespace

DvsProfile::DvsProfile(std::vector<OperatingPoint> points, double k, double static_fraction)
	: points_(std::move(points)), k_(k), static_fraction_(static_fraction)
{
	if (points_.empty())
		throw ParameterError("dvs profile: need at least one operating point");
	for (std::size_t i = 0; i < points_.size(); ++i) {
		if (!(points_[i].freq_mhz > 0.0) || !(points_[i].voltage > 0.0))
			throw ParameterError("dvs profile: frequencies and voltages must be positive");
		if (i > 0 && points_[i].freq_mhz <= points_[i - 1].freq_mhz)
			throw ParameterError("dvs profile: frequencies must be strictly increasing");
		if (i > 0 && points_[i].voltage < points_[i - 1].voltage)
			throw ParameterError("dvs profile: voltages must be non-decreasing");
	}
	if (!(static_fraction_ >= 0.0 && static_fraction_ <= 1.0))
		throw ParameterError("dvs profile: static fraction must lie in [0, 1]");
	if (k_ == 0.0) {
		const auto &top = points_.back();
		k_ = kDefaultPeakWatts / (top.freq_mhz * top.voltage * top.voltage);
	}
	if (!(k_ > 0.0))
		throw ParameterError("dvs profile: energy coefficient must be positive");
}

std::optional<std::size_t> DvsProfile::level_of(double freq_mhz) const
{
	for (std::size_t i = 0; i < points_.size(); ++i)
		if (points_[i].freq_mhz == freq_mhz)
			return i;
	return std::nullopt;
}

DvsProfile pentium_m_profile(double static_fraction)
{
	return DvsProfile({{600, 0.956}, {800, 1.004}, {1000, 1.116}, {1200, 1.228}, {1400, 1.308}, {1700, 1.484}},
	                  0.0, static_fraction);
}

DvsProfile read_profile(std::istream &in, double static_fraction)
{
	std::vector<OperatingPoint> pts;
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
		if (tok.size() != 2)
			throw InputError("expected `freq_mhz voltage`", lineno);
		OperatingPoint p{};
		for (int f = 0; f < 2; ++f) {
			double &dst = f == 0 ? p.freq_mhz : p.voltage;
			const auto &s = tok[static_cast<std::size_t>(f)];
			auto res = std::from_chars(s.data(), s.data() + s.size(), dst);
			if (res.ec != std::errc() || res.ptr != s.data() + s.size())
				throw InputError("bad number '" + s + "'", lineno);
		}
		pts.push_back(p);
	}
	try {
		return DvsProfile(std::move(pts), 0.0, static_fraction);
	} catch (const ParameterError &e) {
		throw InputError(e.what());
	}
}

DvsProfile read_profile_file(const std::string &path, double static_fraction)
{
	std::ifstream in(path);
	if (!in)
		throw InputError("cannot open profile file '" + path + "'");
	return read_profile(in, static_fraction);
}

double power_at(const DvsProfile &profile, double freq_mhz)
{
	auto level = profile.level_of(freq_mhz);
	if (!level)
		throw ParameterError("power_at: " + std::to_string(freq_mhz) + " MHz is not an operating point");
	const auto &p = profile.points()[*level];
	const auto &top = profile.points().back();
	double dynamic = profile.k() * p.freq_mhz * p.voltage * p.voltage;
	double peak = profile.k() * top.freq_mhz * top.voltage * top.voltage;
	return (1.0 - profile.static_fraction()) * dynamic + profile.static_fraction() * peak;
}

void validate(const ServiceClass &c)
{
	if (!(c.rel_deadline > 0.0) || !(c.base_exec_time > 0.0))
		throw ParameterError("service class: deadline and execution time must be positive");
	if (!(c.compute_fraction >= 0.0 && c.compute_fraction <= 1.0))
		throw ParameterError("service class: compute fraction must lie in [0, 1]");
}

std::vector<ServiceClass> default_service_classes()
{
	return {
		{20.0, 1.25, 0.9},  {40.0, 2.5, 0.9},  {80.0, 2.5, 0.9},
		{160.0, 5.0, 0.9},  {320.0, 5.0, 0.9}, {640.0, 10.0, 0.9},
	};
}

double exec_time_at(const ServiceClass &cls, const DvsProfile &profile, double freq_mhz)
{
	if (!profile.level_of(freq_mhz))
		throw ParameterError("exec_time_at: " + std::to_string(freq_mhz) + " MHz is not an operating point");
	return cls.base_exec_time * slowdown(cls.compute_fraction, profile.f_max(), freq_mhz);
}

// ---------------------------------------------------------------------------
// PowerController

PowerController::PowerController(DvsProfile profile, double set_point, double hysteresis_delay,
                                 std::size_t initial_level)
	: profile_(std::move(profile)), set_point_(set_point), hysteresis_delay_(hysteresis_delay),
	  level_(initial_level)
{
	if (!(set_point_ > 0.0 && set_point_ <= 1.0))
		throw ParameterError("power controller: set point must lie in (0, 1]");
	if (!(hysteresis_delay_ >= 0.0))
		throw ParameterError("power controller: hysteresis delay must be non-negative");
	if (level_ >= profile_.size())
		throw ParameterError("power controller: initial level out of range");
}

double PowerController::utilization_at(std::size_t level) const
{
	double ratio = profile_.f_max() / profile_.frequency(level);
	return scaled_.value() * ratio + fixed_.value();
}

void PowerController::set_level(double t, std::size_t to, Cause cause)
{
	if (to == level_)
		return;
	changes_.push_back({t, level_, to, cause});
	if (to > level_)
		last_speedup_ = t;
	level_ = to;
}

std::optional<double> PowerController::next_event() const
{
	std::optional<double> next = scaled_.next_expiry();
	if (relax_due_ && (!next || *relax_due_ < *next))
		next = relax_due_;
	return next;
}

void PowerController::relax(double t)
{
	relax_due_.reset();
	// A speed-up after the departure that armed the timer pins the speed.
	if (last_speedup_ > relax_armed_at_)
		return;
	std::size_t target = level_;
	for (std::size_t l = 0; l < level_; ++l) {
		if (utilization_at(l) <= set_point_ + kUtilSlack) {
			target = l;
			break;
		}
	}
	set_level(t, target, Cause::relaxation);
}

void PowerController::advance(double t)
{
	for (;;) {
		auto dep = scaled_.next_expiry();
		bool dep_due = dep && *dep <= t;
		bool relax_due = relax_due_ && *relax_due_ <= t;
		if (!dep_due && !relax_due)
			break;
		if (dep_due && (!relax_due || *dep <= *relax_due_)) {
			double e = *dep;
			scaled_.expire_through(e);
			fixed_.expire_through(e);
			if (!relax_due_ && std::isfinite(hysteresis_delay_)) {
				relax_due_ = e + hysteresis_delay_;
				relax_armed_at_ = e;
			}
		} else {
			relax(*relax_due_);
		}
	}
}

PowerController::Decision PowerController::admit(double t, const ServiceClass &cls)
{
	validate(cls);
	scaled_.advance(t);
	fixed_.advance(t);

	double scaled_add = cls.compute_fraction * cls.base_exec_time / cls.rel_deadline;
	double fixed_add = (1.0 - cls.compute_fraction) * cls.base_exec_time / cls.rel_deadline;
	auto with_request = [&](std::size_t l) {
		double ratio = profile_.f_max() / profile_.frequency(l);
		return (scaled_.value() + scaled_add) * ratio + fixed_.value() + fixed_add;
	};

	Decision d;
	d.level_before = level_;
	for (std::size_t l = level_; l < profile_.size(); ++l) {
		if (with_request(l) <= set_point_ + kUtilSlack) {
			set_level(t, l, Cause::admission);
			scaled_.add(t, t + cls.rel_deadline, scaled_add);
			fixed_.add(t, t + cls.rel_deadline, fixed_add);
			d.admitted = true;
			break;
		}
	}
	d.level_after = level_;
	d.utilization_after = utilization();
	return d;
}

// ---------------------------------------------------------------------------
// Workload

std::vector<Request> generate_requests(std::span<const ServiceClass> classes, const WorkloadConfig &cfg,
                                       Rng &rng)
{
	if (classes.empty())
		throw ParameterError("workload: need at least one service class");
	for (const auto &c : classes)
		validate(c);
	if (!(cfg.load > 0.0))
		throw ParameterError("workload: load must be positive");
	if (cfg.sessions == 0)
		throw ParameterError("workload: need at least one session");
	if (cfg.min_length == 0 || cfg.min_length > cfg.max_length)
		throw ParameterError("workload: need 1 <= min_length <= max_length");
	if (!(cfg.think_time >= 0.0) || !(cfg.exec_cv >= 0.0))
		throw ParameterError("workload: think time and execution-time CV must be non-negative");

	double mean_exec = 0.0;
	for (const auto &c : classes)
		mean_exec += c.base_exec_time;
	mean_exec /= static_cast<double>(classes.size());
	double mean_length = 0.5 * static_cast<double>(cfg.min_length + cfg.max_length);
	double request_rate = cfg.load / mean_exec;             // per ms
	double session_gap = mean_length / request_rate;        // ms between session starts

	Rng arrivals = rng.split(0);
	Rng shapes = rng.split(1);
	std::vector<Request> out;
	double start = 0.0;
	auto last_class = static_cast<std::int64_t>(classes.size()) - 1;
	for (std::size_t s = 0; s < cfg.sessions; ++s) {
		start += arrivals.exponential(session_gap);
		auto len = static_cast<std::size_t>(shapes.uniform_int(static_cast<std::int64_t>(cfg.min_length),
		                                                       static_cast<std::int64_t>(cfg.max_length)));
		double t = start;
		for (std::size_t r = 0; r < len; ++r) {
			if (r > 0)
				t += shapes.exponential(cfg.think_time);
			auto cls = static_cast<std::size_t>(shapes.uniform_int(0, last_class));
			double work = classes[cls].base_exec_time * shapes.unit_gamma(cfg.exec_cv);
			out.push_back({t, s, cls, work});
		}
	}
	std::stable_sort(out.begin(), out.end(), [](const Request &a, const Request &b) {
		if (a.arrival != b.arrival)
			return a.arrival < b.arrival;
		return a.session < b.session;
	});
	return out;
}

EnergyReport run_requests(const DvsProfile &profile, std::span<const ServiceClass> classes,
                          std::span<const Request> requests, double set_point, const WorkloadConfig &cfg)
{
	if (classes.empty())
		throw ParameterError("dvs run: need at least one service class");
	for (const auto &c : classes)
		validate(c);

	EnergyReport rep;
	rep.set_point = set_point;
	rep.load = cfg.load;
	rep.per_class.resize(classes.size());
	rep.time_at_level_ms.assign(profile.size(), 0.0);

	double max_deadline = 0.0;
	for (const auto &c : classes)
		max_deadline = std::max(max_deadline, c.rel_deadline);
	double horizon = (requests.empty() ? 0.0 : requests.back().arrival) + max_deadline;
	rep.horizon_ms = horizon;

	PowerController ctl(profile, set_point, cfg.hysteresis_delay);

	auto observer = [&](double, FixedPriorityCore::Event ev, const FixedPriorityCore::Ready &r) {
		if (ev == FixedPriorityCore::Event::complete) {
			++rep.completed;
			++rep.per_class[r.owner].completed;
		} else if (ev == FixedPriorityCore::Event::miss) {
			++rep.missed;
			++rep.per_class[r.owner].missed;
		}
	};
	FixedPriorityCore core(observer);
	const double f_max = profile.f_max();
	FixedPriorityCore::RateFn rate = [&](const FixedPriorityCore::Ready &r) {
		return 1.0 / slowdown(r.speed_sensitivity, f_max, ctl.frequency());
	};

	std::vector<char> session_dead;
	double clock = 0.0;
	auto integrate_to = [&](double t) {
		double dt = t - clock;
		if (dt > 0.0) {
			rep.energy_j += power_at(profile, ctl.frequency()) * dt / 1000.0;
			rep.time_at_level_ms[ctl.level()] += dt;
			clock = t;
		}
	};

	std::size_t next = 0;
	std::uint64_t seq = 0;
	for (;;) {
		double t = horizon;
		bool have = false;
		auto consider = [&](std::optional<double> c) {
			if (c && *c <= t) {
				t = *c;
				have = true;
			}
		};
		if (next < requests.size())
			consider(requests[next].arrival);
		consider(core.earliest_deadline());
		consider(ctl.next_event());
		if (!have)
			break;

		integrate_to(t);
		core.advance_to(t, rate);
		core.expire(t);

		// Arrivals at t see the active set as of t (deadlines at t included);
		// departures and relaxation come after.
		while (next < requests.size() && requests[next].arrival == t) {
			const Request &req = requests[next++];
			if (req.session >= session_dead.size())
				session_dead.resize(req.session + 1, 0);
			auto &cs = rep.per_class.at(req.cls);
			++cs.requests;
			if (session_dead[req.session]) {
				++rep.skipped;
				continue;
			}
			const auto &cls = classes[req.cls];
			auto d = ctl.admit(t, cls);
			if (!d.admitted) {
				++rep.rejected;
				++cs.rejected;
				session_dead[req.session] = 1; // no retries
				continue;
			}
			++rep.admitted;
			++cs.admitted;
			rep.max_utilization_after_admission =
				std::max(rep.max_utilization_after_admission, d.utilization_after);
			core.release(t, FixedPriorityCore::Ready{seq++, cls.rel_deadline, req.cls, t + cls.rel_deadline, t,
			                                         req.actual_base_work, cls.compute_fraction, req.cls});
		}
		ctl.advance(t);
	}
	integrate_to(horizon);
	core.advance_to(horizon, rate);

	rep.avg_power_w = horizon > 0.0 ? rep.energy_j * 1000.0 / horizon : 0.0;
	std::size_t decided = rep.completed + rep.missed;
	rep.miss_fraction = decided ? static_cast<double>(rep.missed) / static_cast<double>(decided) : 0.0;
	rep.frequency_changes = ctl.changes();
	return rep;
}

EnergyReport run_workload(const DvsProfile &profile, std::span<const ServiceClass> classes,
                          const WorkloadConfig &cfg, double set_point, Rng &rng)
{
	auto requests = generate_requests(classes, cfg, rng);
	return run_requests(profile, classes, requests, set_point, cfg);
}

WorkloadConfig benchmark_workload()
{
	WorkloadConfig w;
	w.exec_cv = 3.0;
	return w;
}

std::vector<double> benchmark_loads()
{
	return {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
}

std::vector<double> benchmark_set_points()
{
	return {kSyntheticUtilizationBound, 0.65, 0.70, 0.75, 0.80};
}

std::vector<EnergyReport> set_point_ladder(const DvsProfile &profile, std::span<const ServiceClass> classes,
                                           const WorkloadConfig &base, std::span<const double> loads,
                                           std::span<const double> set_points, std::uint64_t seed,
                                           unsigned jobs)
{
	std::vector<WorkloadConfig> cfgs;
	std::vector<std::vector<Request>> logs;
	for (std::size_t i = 0; i < loads.size(); ++i) {
		WorkloadConfig w = base;
		w.load = loads[i];
		Rng rng = Rng::derive(seed, {i});
		logs.push_back(generate_requests(classes, w, rng));
		cfgs.push_back(w);
	}

	std::vector<EnergyReport> out(loads.size() * set_points.size());
	parallel_for(out.size(), jobs, [&](std::size_t k) {
		std::size_t i = k / set_points.size();
		out[k] = run_requests(profile, classes, logs[i], set_points[k % set_points.size()], cfgs[i]);
	});
	return out;
}

} // namespace sharp
