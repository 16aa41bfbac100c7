#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sharp/apsim.hpp"
#include "sharp/rng.hpp"

namespace sharp {

struct OperatingPoint {
	double freq_mhz;
	double voltage;
};

/// Frequency/voltage table plus the power model
///
///   P(f) = (1 - s) * k * f * V(f)^2 + s * k * f_max * V(f_max)^2
///
/// with s the static fraction. Power is in watts when k is in W/(MHz V^2).
class DvsProfile {
public:
	/// Default k puts P(f_max) at 24.5 W for the Pentium M table.
	static constexpr double kDefaultPeakWatts = 24.5;

	explicit DvsProfile(std::vector<OperatingPoint> points, double k = 0.0, double static_fraction = 0.0);

	std::span<const OperatingPoint> points() const { return points_; }
	std::size_t size() const { return points_.size(); }
	double f_min() const { return points_.front().freq_mhz; }
	double f_max() const { return points_.back().freq_mhz; }
	double frequency(std::size_t level) const { return points_.at(level).freq_mhz; }
	std::optional<std::size_t> level_of(double freq_mhz) const;

	double k() const { return k_; }
	double static_fraction() const { return static_fraction_; }

private:
	std::vector<OperatingPoint> points_;
	double k_;
	double static_fraction_;
};

/// Intel Pentium M 1.7 GHz enhanced SpeedStep table (600..1700 MHz).
DvsProfile pentium_m_profile(double static_fraction = 0.0);

/// One `freq_mhz voltage` pair per line; `#` comments.
DvsProfile read_profile(std::istream &in, double static_fraction = 0.0);
DvsProfile read_profile_file(const std::string &path, double static_fraction = 0.0);

double power_at(const DvsProfile &profile, double freq_mhz);

struct ServiceClass {
	double rel_deadline;   // ms
	double base_exec_time; // ms at f_max
	/// Fraction of the execution that scales with 1/f.
	double compute_fraction = 0.9;
};

void validate(const ServiceClass &c);

/// Six service levels (one per server priority).
std::vector<ServiceClass> default_service_classes();

/// Execution time multiplier at frequency f relative to f_max.
inline double slowdown(double compute_fraction, double f_max, double f)
{
	return compute_fraction * (f_max / f) + (1.0 - compute_fraction);
}

/// c(f) = base * (beta * f_max / f + (1 - beta)). Throws for frequencies
/// that are not operating points of the profile.
double exec_time_at(const ServiceClass &cls, const DvsProfile &profile, double freq_mhz);

/// Admission control plus speed selection driven by synthetic utilization.
///
/// U(t) at operating level l is tracked as two sums over the active set,
/// one scaling with f_max / f and one frequency independent, so it can be
/// evaluated at any level without rescanning the jobs.
class PowerController {
public:
	enum class Cause { admission, relaxation };

	struct FrequencyChange {
		double time;
		std::size_t from;
		std::size_t to;
		Cause cause;
	};

	struct Decision {
		bool admitted = false;
		std::size_t level_before = 0;
		std::size_t level_after = 0;
		double utilization_after = 0.0;
	};

	PowerController(DvsProfile profile, double set_point,
	                double hysteresis_delay = 100.0, std::size_t initial_level = 0);

	/// Process departures and due relaxations up to and including t.
	void advance(double t);

	/// Admit a request of class `cls` arriving at t (advance(t) first) or
	/// reject it. Raises the speed step by step if needed.
	Decision admit(double t, const ServiceClass &cls);

	/// Next instant at which advance() has work: a departure or relaxation.
	std::optional<double> next_event() const;

	std::size_t level() const { return level_; }
	double frequency() const { return profile_.frequency(level_); }
	double set_point() const { return set_point_; }
	const DvsProfile &profile() const { return profile_; }

	double utilization() const { return utilization_at(level_); }
	double utilization_at(std::size_t level) const;
	std::size_t active() const { return scaled_.active(); }

	const std::vector<FrequencyChange> &changes() const { return changes_; }

private:
	void relax(double t);
	void set_level(double t, std::size_t to, Cause cause);

	DvsProfile profile_;
	double set_point_;
	double hysteresis_delay_;
	std::size_t level_;

	SyntheticUtilization scaled_;
	SyntheticUtilization fixed_;

	std::optional<double> relax_due_;
	double relax_armed_at_ = 0.0;
	double last_speedup_ = -std::numeric_limits<double>::infinity();
	std::vector<FrequencyChange> changes_;
};

struct WorkloadConfig {
	/// Offered load: request rate times mean base execution time (at f_max).
	double load = 0.5;
	std::size_t sessions = 1000;
	std::size_t min_length = 2;
	std::size_t max_length = 16;
	/// Mean gap between consecutive requests of one session (ms).
	double think_time = 500.0;
	/// Coefficient of variation of actual vs. estimated execution time
	/// (gamma distributed, mean 1). 0 means exact estimates.
	double exec_cv = 0.0;
	double hysteresis_delay = 100.0;
};

struct ClassStats {
	std::size_t requests = 0;
	std::size_t admitted = 0;
	std::size_t rejected = 0;
	std::size_t completed = 0;
	std::size_t missed = 0;
};

struct EnergyReport {
	double set_point = 0.0;
	double load = 0.0;
	double horizon_ms = 0.0;
	double energy_j = 0.0;
	double avg_power_w = 0.0;
	double miss_fraction = 0.0;
	std::size_t admitted = 0;
	std::size_t rejected = 0;
	std::size_t completed = 0;
	std::size_t missed = 0;
	std::size_t skipped = 0; // requests of sessions cut short by a rejection
	double max_utilization_after_admission = 0.0;
	std::vector<ClassStats> per_class;
	std::vector<double> time_at_level_ms;
	std::vector<PowerController::FrequencyChange> frequency_changes;
};

struct Request {
	double arrival;
	std::size_t session;
	std::size_t cls;
	/// Actual work at f_max; the controller only sees the class estimate.
	double actual_base_work;
};

/// Session-structured request log: session starts are Poisson, lengths
/// uniform on [min_length, max_length], requests within a session separated
/// by exponential think times, classes uniform.
std::vector<Request> generate_requests(std::span<const ServiceClass> classes, const WorkloadConfig &cfg,
                                       Rng &rng);

/// Replays a request log through admission control, speed scaling and a
/// preemptive deadline-monotonic processor; integrates power over
/// [0, last arrival + largest deadline].
EnergyReport run_requests(const DvsProfile &profile, std::span<const ServiceClass> classes,
                          std::span<const Request> requests, double set_point, const WorkloadConfig &cfg);

EnergyReport run_workload(const DvsProfile &profile, std::span<const ServiceClass> classes,
                          const WorkloadConfig &cfg, double set_point, Rng &rng);

/// Fixed benchmark: default workload with execution-time noise (cv 3) so
/// that overload shows up as deadline misses.
WorkloadConfig benchmark_workload();
std::vector<double> benchmark_loads();
std::vector<double> benchmark_set_points();

/// Every (load, set point) pair, loads outer. The request log for load i is
/// drawn once from Rng::derive(seed, {i}) and replayed at every set point.
std::vector<EnergyReport> set_point_ladder(const DvsProfile &profile, std::span<const ServiceClass> classes,
                                           const WorkloadConfig &base, std::span<const double> loads,
                                           std::span<const double> set_points, std::uint64_t seed,
                                           unsigned jobs = 0);

} // namespace sharp
