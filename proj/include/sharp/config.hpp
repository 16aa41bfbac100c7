#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sharp/apsim.hpp"
#include "sharp/dvs.hpp"
#include "sharp/threshold.hpp"

namespace sharp {

/// Every knob of a CLI run. Serialized as flat `key = value` text; writing
/// and re-reading a config reproduces it exactly.
struct ExperimentConfig {
	std::string command;
	std::string recipe;
	std::uint64_t seed = 1;
	unsigned jobs = 0;
	std::string out;

	// gen / sweep / threshold / width
	std::string generator = "uunisort";
	std::size_t n = 8;
	std::vector<std::size_t> n_list{8, 16, 32, 64};
	std::string period_rule = "uniform"; // uniform | set
	std::int64_t period_lo = 1;
	std::int64_t period_hi = 100'000;
	std::vector<std::int64_t> period_set = restricted_period_set();
	double utilization = 0.8;
	double u_min = 0.6;
	double u_max = 1.0;
	double u_step = 0.02;
	std::size_t trials = 2000;
	double epsilon = 0.1;

	// check
	std::string input;

	// apsim
	std::size_t streams = 32;
	double cd_cap = 0.125;
	double d_min = 10.0;
	double d_max = 1000.0;
	double target_util = 0.5;
	double horizon = 0.0; // 0: 10^4 times the largest deadline
	double warmup = 0.05;
	std::string trace;

	// dvs
	double set_point = kSyntheticUtilizationBound;
	double load = 0.5;
	std::size_t sessions = 1000;
	double exec_cv = 0.0;
	double hysteresis = 100.0;
	double static_fraction = 0.0;
	std::string profile;

	/// Assign one field from its text form. Throws ParameterError naming the
	/// key for unknown keys and malformed or out-of-range values.
	void set(const std::string &key, const std::string &value);
	std::string get(const std::string &key) const;

	static const std::vector<std::string> &keys();

	WorkloadSpec workload() const;
	WorkloadSpec workload(std::size_t n_tasks) const;
	SweepGrid grid() const;
	StreamGenConfig stream_config() const;
	WorkloadConfig dvs_workload() const;
	DvsProfile dvs_profile() const;
};

/// Blank lines and `#` comments are skipped. Errors are InputError with the
/// offending line number.
ExperimentConfig read_config(std::istream &in, ExperimentConfig base = {});
ExperimentConfig read_config_file(const std::string &path, ExperimentConfig base = {});
void write_config(std::ostream &out, const ExperimentConfig &cfg);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

} // namespace sharp
