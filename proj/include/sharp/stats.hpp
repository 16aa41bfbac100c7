#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace sharp {

struct Proportion {
	std::size_t successes = 0;
	std::size_t trials = 0;
	double p_hat = 0.0;
	double lo = 0.0;
	double hi = 1.0;
};

/// Two-sided 97.5% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for a binomial proportion.
Proportion wilson_interval(std::size_t successes, std::size_t trials, double z = kZ95);

/// Weighted least-squares non-increasing fit (pool adjacent violators).
std::vector<double> isotonic_nonincreasing(std::span<const double> y, std::span<const double> w);

/// First abscissa where the piecewise-linear curve through (x, y), with y
/// non-increasing, falls to `level`. nullopt when the curve does not cross
/// it inside the range.
std::optional<double> crossing(std::span<const double> x, std::span<const double> y, double level);

struct LineFit {
	double intercept = 0.0;
	double slope = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LineFit least_squares(std::span<const double> x, std::span<const double> y);

} // namespace sharp
