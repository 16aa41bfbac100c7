#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sharp/core.hpp"
#include "sharp/rng.hpp"
#include "sharp/stats.hpp"

namespace sharp {

enum class UtilizationRule { uunisort, equal_split };

std::string to_string(UtilizationRule r);
UtilizationRule parse_utilization_rule(const std::string &s);

struct PeriodRule {
	enum class Kind { uniform, set };

	Kind kind = Kind::uniform;
	std::int64_t lo = 1;
	std::int64_t hi = 100'000;
	std::vector<std::int64_t> allowed;

	static PeriodRule uniform(std::int64_t lo, std::int64_t hi);
	static PeriodRule from_set(std::vector<std::int64_t> allowed);

	std::vector<std::int64_t> draw(std::size_t n, Rng &rng) const;
};

/// The period set whose threshold is compared against a period-aware
/// utilization bound of 0.88.
const std::vector<std::int64_t> &restricted_period_set();

/// How a random task set at a given utilization is produced.
struct WorkloadSpec {
	std::size_t n = 8;
	UtilizationRule rule = UtilizationRule::uunisort;
	PeriodRule periods;

	/// uunisort | equal-split | restricted-period
	std::string tag() const;
};

TaskSet draw_taskset(const WorkloadSpec &spec, double total_util, Rng &rng);

struct SweepGrid {
	double u_min = 0.6;
	double u_max = 1.0;
	double step = 0.02;

	/// u_min, u_min + step, ... up to u_max (inclusive, up to rounding).
	std::vector<double> points() const;
};

/// Fraction of `trials` random task sets at utilization U that pass the
/// exact RM test, with its Wilson 95% interval. Trial t of grid point g
/// draws from Rng::derive(seed, {n, g, t}).
Proportion estimate_mu(const WorkloadSpec &spec, double total_util, std::size_t trials,
                       std::uint64_t seed, std::size_t grid_index = 0, unsigned jobs = 1);

/// Empirical schedulability curve mu(U) over a utilization grid.
struct ThresholdCurve {
	std::size_t n = 0;
	std::string generator;
	std::uint64_t seed = 0;
	std::vector<double> grid;
	std::vector<double> p_hat;
	std::vector<double> ci_lo;
	std::vector<double> ci_hi;
	std::vector<std::size_t> trials;

	std::size_t size() const { return grid.size(); }
	/// Pool-adjacent-violators fit of p_hat (weights = trials).
	std::vector<double> fitted() const;
};

ThresholdCurve sweep(const WorkloadSpec &spec, const SweepGrid &grid, std::size_t trials,
                     std::uint64_t seed, unsigned jobs = 0);

struct ThresholdEstimate {
	/// mu = 1/2 crossing of the isotonic fit.
	double u_star = 0.0;
	/// U(mu = epsilon) - U(mu = 1 - epsilon).
	double width = 0.0;
	double epsilon = 0.1;
	/// u_star read off the isotonic fits of the lower/upper Wilson bounds.
	double u_star_lo = 0.0;
	double u_star_hi = 0.0;
};

/// Throws RangeError when the curve does not cross 1/2, epsilon or
/// 1 - epsilon inside the sweep range.
ThresholdEstimate locate_threshold(const ThresholdCurve &curve, double epsilon = 0.1);

struct WidthPoint {
	std::size_t n;
	ThresholdEstimate estimate;
};

struct WidthScaling {
	std::vector<WidthPoint> points;
	/// log(width) = intercept + slope * log(n)
	double slope = 0.0;
	double intercept = 0.0;
};

WidthScaling width_scaling(std::span<const std::size_t> n_list, const WorkloadSpec &base,
                           const SweepGrid &grid, std::size_t trials, std::uint64_t seed,
                           double epsilon = 0.1, unsigned jobs = 0);

} // namespace sharp
