#include "sharp/sched.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sharp/error.hpp"

namespace sharp {

namespace {

constexpr double kFixedPointTolerance = 1e-12;

template <typename Key>
PriorityOrder stable_order(std::size_t n, Key key)
{
	PriorityOrder order(n);
	std::iota(order.begin(), order.end(), std::size_t{0});
	std::stable_sort(order.begin(), order.end(),
	                 [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
	return order;
}

// Fixed-point iteration for the task at position `pos` of `order`.
std::optional<double> response_at(std::span<const Task> tasks, std::span<const std::size_t> order,
                                  std::size_t pos)
{
	const Task &self = tasks[order[pos]];
	const double limit = self.deadline;
	const double tol = kFixedPointTolerance * limit;

	double L = self.exec_time;
	for (;;) {
		double next = self.exec_time;
		for (std::size_t k = 0; k < pos; ++k) {
			const Task &hp = tasks[order[k]];
			next += std::ceil(L / static_cast<double>(hp.period)) * hp.exec_time;
		}
		if (next > limit)
			return std::nullopt;
		if (std::abs(next - L) <= tol)
			return next;
		L = next;
	}
}

std::int64_t gcd64(std::int64_t a, std::int64_t b)
{
	while (b) {
		auto t = a % b;
		a = b;
		b = t;
	}
	return a;
}

} // namespace

PriorityOrder rm_order(const TaskSet &ts)
{
	return stable_order(ts.size(), [&](std::size_t i) { return ts[i].period; });
}

PriorityOrder dm_order(std::span<const JobStream> streams)
{
	return stable_order(streams.size(), [&](std::size_t i) { return streams[i].rel_deadline; });
}

bool is_permutation_of_indices(std::span<const std::size_t> order, std::size_t n)
{
	if (order.size() != n)
		return false;
	std::vector<bool> seen(n, false);
	for (auto i : order) {
		if (i >= n || seen[i])
			return false;
		seen[i] = true;
	}
	return true;
}

std::optional<double> response_time(const TaskSet &ts, std::span<const std::size_t> order, std::size_t i)
{
	if (!is_permutation_of_indices(order, ts.size()))
		throw ParameterError("response_time: order is not a permutation of task indices");
	if (i >= ts.size())
		throw ParameterError("response_time: task index out of range");
	auto pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), i) - order.begin());
	return response_at(ts.tasks(), order, pos);
}

ResponseTimeResult analyze_rm(const TaskSet &ts)
{
	auto order = rm_order(ts);
	ResponseTimeResult res;
	res.response.resize(ts.size());
	res.schedulable = true;
	for (std::size_t pos = 0; pos < order.size(); ++pos) {
		auto r = response_at(ts.tasks(), order, pos);
		res.response[order[pos]] = r;
		if (!r)
			res.schedulable = false;
	}
	return res;
}

bool rm_schedulable(const TaskSet &ts)
{
	// Demand above capacity: the lowest-priority response time diverges anyway.
	if (utilization(ts) > 1.0 + 1e-12)
		return false;
	auto order = rm_order(ts);
	for (std::size_t pos = 0; pos < order.size(); ++pos)
		if (!response_at(ts.tasks(), order, pos))
			return false;
	return true;
}

double ll_bound(std::size_t n)
{
	if (n == 0)
		throw ParameterError("ll_bound: n must be at least 1");
	double nd = static_cast<double>(n);
	// n (2^{1/n} - 1) written with expm1 to stay accurate for huge n.
	return nd * std::expm1(std::log(2.0) / nd);
}

bool brute_force_schedulable(const TaskSet &ts, const BruteForceOptions &opts)
{
	const std::size_t n = ts.size();

	// Smallest integer scale turning every execution time into whole quanta.
	std::int64_t scale = 0;
	for (std::int64_t s = 1; s <= opts.max_denominator && !scale; ++s) {
		bool ok = true;
		for (const auto &t : ts) {
			double q = t.exec_time * static_cast<double>(s);
			if (std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, q))
				ok = false;
		}
		if (ok)
			scale = s;
	}
	if (!scale)
		throw RangeError("brute force: execution times have no common denominator <= "
		                 + std::to_string(opts.max_denominator));

	std::int64_t hyper = 1;
	for (const auto &t : ts) {
		hyper = hyper / gcd64(hyper, t.period) * t.period;
		if (hyper > opts.hyperperiod_cap / scale)
			throw RangeError("brute force: hyperperiod exceeds cap of "
			                 + std::to_string(opts.hyperperiod_cap) + " quanta");
	}
	hyper *= scale;

	std::vector<std::int64_t> period(n), cost(n), deadline_offset(n);
	for (std::size_t i = 0; i < n; ++i) {
		period[i] = ts[i].period * scale;
		cost[i] = std::llround(ts[i].exec_time * static_cast<double>(scale));
		deadline_offset[i] = static_cast<std::int64_t>(std::floor(ts[i].deadline * static_cast<double>(scale) + 1e-9));
	}

	// Priority: shorter period first, lower index on ties.
	std::vector<std::size_t> prio(n);
	std::iota(prio.begin(), prio.end(), std::size_t{0});
	std::stable_sort(prio.begin(), prio.end(),
	                 [&](std::size_t a, std::size_t b) { return period[a] < period[b]; });

	std::vector<std::int64_t> remaining(n, 0), release(n, 0), due(n, 0);
	std::int64_t now = 0;
	while (now < hyper) {
		// Releases at `now`; an unfinished previous job has missed.
		for (std::size_t i = 0; i < n; ++i) {
			if (release[i] == now) {
				if (remaining[i] > 0)
					return false;
				remaining[i] = cost[i];
				due[i] = now + deadline_offset[i];
				release[i] += period[i];
			}
		}

		std::int64_t next_release = hyper;
		for (std::size_t i = 0; i < n; ++i)
			next_release = std::min(next_release, release[i]);

		std::size_t run = n;
		for (auto i : prio) {
			if (remaining[i] > 0) {
				run = i;
				break;
			}
		}
		if (run == n) {
			now = next_release;
			continue;
		}
		std::int64_t until = std::min(next_release, now + remaining[run]);
		remaining[run] -= until - now;
		now = until;
		if (remaining[run] == 0 && now > due[run])
			return false;
		// Pending work past its deadline (constrained deadlines).
		for (std::size_t i = 0; i < n; ++i)
			if (remaining[i] > 0 && now >= due[i])
				return false;
	}
	for (std::size_t i = 0; i < n; ++i)
		if (remaining[i] > 0)
			return false;
	return true;
}

} // namespace sharp
