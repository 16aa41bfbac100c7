#include "sharp/stats.hpp"

#include <algorithm>
#include <cmath>

#include "sharp/error.hpp"

namespace sharp {

Proportion wilson_interval(std::size_t successes, std::size_t trials, double z)
{
	if (trials == 0)
		throw ParameterError("wilson: need at least one trial");
	if (successes > trials)
		throw ParameterError("wilson: more successes than trials");

	double n = static_cast<double>(trials);
	double p = static_cast<double>(successes) / n;
	double z2 = z * z;
	double denom = 1.0 + z2 / n;
	double centre = (p + z2 / (2.0 * n)) / denom;
	double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;

	Proportion r;
	r.successes = successes;
	r.trials = trials;
	r.p_hat = p;
	r.lo = successes == 0 ? 0.0 : std::clamp(centre - half, 0.0, p);
	r.hi = successes == trials ? 1.0 : std::clamp(centre + half, p, 1.0);
	return r;
}

std::vector<double> isotonic_nonincreasing(std::span<const double> y, std::span<const double> w)
{
	if (y.size() != w.size())
		throw ParameterError("isotonic: values and weights differ in length");

	struct Block {
		double mean;
		double weight;
		std::size_t count;
	};
	std::vector<Block> blocks;
	blocks.reserve(y.size());
	for (std::size_t i = 0; i < y.size(); ++i) {
		if (!(w[i] > 0.0))
			throw ParameterError("isotonic: weights must be positive");
		blocks.push_back({y[i], w[i], 1});
		// Non-increasing target: a later block may not exceed an earlier one.
		while (blocks.size() > 1 && blocks[blocks.size() - 2].mean < blocks.back().mean) {
			Block top = blocks.back();
			blocks.pop_back();
			Block &prev = blocks.back();
			double wsum = prev.weight + top.weight;
			prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / wsum;
			prev.weight = wsum;
			prev.count += top.count;
		}
	}

	std::vector<double> fit;
	fit.reserve(y.size());
	for (const auto &b : blocks)
		fit.insert(fit.end(), b.count, b.mean);
	return fit;
}

std::optional<double> crossing(std::span<const double> x, std::span<const double> y, double level)
{
	if (x.size() != y.size() || x.empty())
		return std::nullopt;

	const std::size_t n = y.size();
	std::size_t first_at_or_below = n;
	std::size_t last_at_or_above = n;
	for (std::size_t i = 0; i < n; ++i) {
		if (first_at_or_below == n && y[i] <= level)
			first_at_or_below = i;
		if (y[i] >= level)
			last_at_or_above = i;
	}
	if (first_at_or_below == n || last_at_or_above == n)
		return std::nullopt;

	std::size_t a = first_at_or_below, b = last_at_or_above;
	if (a <= b) // plateau exactly at the level
		return 0.5 * (x[a] + x[b]);

	// b == a - 1 for a non-increasing curve
	double frac = (y[b] - level) / (y[b] - y[a]);
	return x[b] + frac * (x[a] - x[b]);
}

LineFit least_squares(std::span<const double> x, std::span<const double> y)
{
	if (x.size() != y.size() || x.size() < 2)
		throw ParameterError("least squares: need at least two points");
	double n = static_cast<double>(x.size());
	double mx = 0, my = 0;
	for (std::size_t i = 0; i < x.size(); ++i) {
		mx += x[i];
		my += y[i];
	}
	mx /= n;
	my /= n;
	double sxx = 0, sxy = 0;
	for (std::size_t i = 0; i < x.size(); ++i) {
		sxx += (x[i] - mx) * (x[i] - mx);
		sxy += (x[i] - mx) * (y[i] - my);
	}
	if (sxx == 0.0)
		throw ParameterError("least squares: abscissae are all equal");
	LineFit f;
	f.slope = sxy / sxx;
	f.intercept = my - f.slope * mx;
	return f;
}

} // namespace sharp
