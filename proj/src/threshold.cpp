#include "sharp/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sharp/error.hpp"
#include "sharp/parallel.hpp"
#include "sharp/sched.hpp"

namespace sharp {

std::string to_string(UtilizationRule r)
{
	return r == UtilizationRule::uunisort ? "uunisort" : "equal-split";
}

UtilizationRule parse_utilization_rule(const std::string &s)
{
	if (s == "uunisort")
		return UtilizationRule::uunisort;
	if (s == "equal-split" || s == "equal_split")
		return UtilizationRule::equal_split;
	throw ParameterError("unknown generator '" + s + "' (expected uunisort or equal-split)");
}

PeriodRule PeriodRule::uniform(std::int64_t lo, std::int64_t hi)
{
	if (lo < 1 || lo > hi)
		throw ParameterError("period range needs 1 <= lo <= hi");
	PeriodRule r;
	r.kind = Kind::uniform;
	r.lo = lo;
	r.hi = hi;
	return r;
}

PeriodRule PeriodRule::from_set(std::vector<std::int64_t> allowed)
{
	if (allowed.empty())
		throw ParameterError("period set is empty");
	PeriodRule r;
	r.kind = Kind::set;
	r.allowed = std::move(allowed);
	return r;
}

std::vector<std::int64_t> PeriodRule::draw(std::size_t n, Rng &rng) const
{
	if (kind == Kind::set)
		return gen_periods_from_set(n, allowed, rng);
	return gen_periods(n, lo, hi, rng);
}

const std::vector<std::int64_t> &restricted_period_set()
{
	static const std::vector<std::int64_t> periods{3, 8, 11, 16, 20, 42, 120, 300};
	return periods;
}

std::string WorkloadSpec::tag() const
{
	if (periods.kind == PeriodRule::Kind::set)
		return "restricted-period";
	return to_string(rule);
}

TaskSet draw_taskset(const WorkloadSpec &spec, double total_util, Rng &rng)
{
	auto utils = spec.rule == UtilizationRule::uunisort ? gen_uunisort(spec.n, total_util, rng)
	                                                    : gen_equal_split(spec.n, total_util);
	auto periods = spec.periods.draw(spec.n, rng);
	return assemble_taskset(utils, periods);
}

std::vector<double> SweepGrid::points() const
{
	if (!(step > 0.0))
		throw ParameterError("sweep: step must be positive");
	if (!(u_min < u_max))
		throw ParameterError("sweep: need u_min < u_max");
	if (u_min < 0.0)
		throw ParameterError("sweep: utilizations must be non-negative");

	auto last = static_cast<std::size_t>(std::floor((u_max - u_min) / step + 1e-9));
	std::vector<double> pts;
	pts.reserve(last + 1);
	for (std::size_t k = 0; k <= last; ++k) {
		double u = u_min + static_cast<double>(k) * step;
		pts.push_back(std::round(u * 1e12) / 1e12);
	}
	return pts;
}

Proportion estimate_mu(const WorkloadSpec &spec, double total_util, std::size_t trials,
                       std::uint64_t seed, std::size_t grid_index, unsigned jobs)
{
	if (trials == 0)
		throw ParameterError("estimate_mu: need at least one trial");
	if (total_util < 0.0 || total_util > static_cast<double>(spec.n))
		throw ParameterError("estimate_mu: utilization must lie in [0, n]");

	// No demand at all is trivially schedulable.
	if (total_util == 0.0)
		return wilson_interval(trials, trials);

	std::vector<char> ok(trials, 0);
	parallel_for(trials, jobs, [&](std::size_t t) {
		Rng rng = Rng::derive(seed, {spec.n, grid_index, t});
		ok[t] = rm_schedulable(draw_taskset(spec, total_util, rng)) ? 1 : 0;
	});
	auto successes = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
	return wilson_interval(successes, trials);
}

std::vector<double> ThresholdCurve::fitted() const
{
	std::vector<double> w(trials.begin(), trials.end());
	return isotonic_nonincreasing(p_hat, w);
}

ThresholdCurve sweep(const WorkloadSpec &spec, const SweepGrid &grid, std::size_t trials,
                     std::uint64_t seed, unsigned jobs)
{
	ThresholdCurve c;
	c.n = spec.n;
	c.generator = spec.tag();
	c.seed = seed;
	c.grid = grid.points();
	for (std::size_t g = 0; g < c.grid.size(); ++g) {
		auto mu = estimate_mu(spec, c.grid[g], trials, seed, g, jobs);
		c.p_hat.push_back(mu.p_hat);
		c.ci_lo.push_back(mu.lo);
		c.ci_hi.push_back(mu.hi);
		c.trials.push_back(mu.trials);
	}
	return c;
}

ThresholdEstimate locate_threshold(const ThresholdCurve &curve, double epsilon)
{
	if (!(epsilon > 0.0 && epsilon < 0.5))
		throw ParameterError("locate_threshold: epsilon must lie in (0, 1/2)");
	if (curve.size() == 0)
		throw ParameterError("locate_threshold: empty curve");

	std::vector<double> w(curve.trials.begin(), curve.trials.end());
	auto fit = isotonic_nonincreasing(curve.p_hat, w);

	auto at = [&](std::span<const double> y, double level) {
		auto x = crossing(curve.grid, y, level);
		if (!x)
			throw RangeError("curve does not cross mu = " + std::to_string(level) + " inside ["
			                 + std::to_string(curve.grid.front()) + ", "
			                 + std::to_string(curve.grid.back()) + "]; widen the sweep");
		return *x;
	};

	ThresholdEstimate est;
	est.epsilon = epsilon;
	est.u_star = at(fit, 0.5);
	est.width = std::max(0.0, at(fit, epsilon) - at(fit, 1.0 - epsilon));

	// Lower Wilson bound crosses 1/2 first, upper bound last. Clamp to the
	// grid when a bound never reaches 1/2.
	auto lo_fit = isotonic_nonincreasing(curve.ci_lo, w);
	auto hi_fit = isotonic_nonincreasing(curve.ci_hi, w);
	est.u_star_lo = crossing(curve.grid, lo_fit, 0.5).value_or(curve.grid.front());
	est.u_star_hi = crossing(curve.grid, hi_fit, 0.5).value_or(curve.grid.back());
	return est;
}

WidthScaling width_scaling(std::span<const std::size_t> n_list, const WorkloadSpec &base,
                           const SweepGrid &grid, std::size_t trials, std::uint64_t seed,
                           double epsilon, unsigned jobs)
{
	std::set<std::size_t> distinct(n_list.begin(), n_list.end());
	if (distinct.size() < 3)
		throw ParameterError("width_scaling: need at least three distinct task counts");

	WidthScaling out;
	std::vector<double> log_n, log_w;
	for (auto n : n_list) {
		WorkloadSpec spec = base;
		spec.n = n;
		auto est = locate_threshold(sweep(spec, grid, trials, seed, jobs), epsilon);
		out.points.push_back({n, est});
		if (!(est.width > 0.0))
			throw RangeError("width_scaling: zero width at n = " + std::to_string(n)
			                 + "; refine the grid");
		log_n.push_back(std::log(static_cast<double>(n)));
		log_w.push_back(std::log(est.width));
	}
	auto fit = least_squares(log_n, log_w);
	out.slope = fit.slope;
	out.intercept = fit.intercept;
	return out;
}

} // namespace sharp
