#include "sharp/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sharp/error.hpp"

namespace sharp {

namespace {

// Rejection sampling of UUniSort cannot run forever when total is close to n.
constexpr int kMaxUUniSortAttempts = 1'000'000;

void check_task(const Task &t)
{
	if (t.period <= 0)
		throw ParameterError("task period must be positive");
	if (!(t.exec_time > 0.0) || !std::isfinite(t.exec_time))
		throw ParameterError("task execution time must be positive");
	if (!(t.deadline >= t.exec_time))
		throw ParameterError("task deadline must not be smaller than its execution time");
	if (t.deadline > static_cast<double>(t.period))
		throw ParameterError("task deadline must not exceed its period");
}

} // namespace

Task::Task(std::int64_t period, double exec_time)
	: Task(period, exec_time, static_cast<double>(period))
{}

Task::Task(std::int64_t period, double exec_time, double deadline)
	: period(period), exec_time(exec_time), deadline(deadline)
{
	check_task(*this);
}

TaskSet::TaskSet(std::vector<Task> tasks) : tasks_(std::move(tasks))
{
	if (tasks_.empty())
		throw ParameterError("task set must contain at least one task");
	for (const auto &t : tasks_)
		check_task(t);
}

TaskSet TaskSet::with_task(std::size_t i, Task t) const
{
	auto copy = tasks_;
	copy.at(i) = t;
	return TaskSet(std::move(copy));
}

TaskSet TaskSet::without_task(std::size_t i) const
{
	auto copy = tasks_;
	copy.erase(copy.begin() + static_cast<std::ptrdiff_t>(i));
	return TaskSet(std::move(copy));
}

double utilization(const TaskSet &ts)
{
	double u = 0.0;
	for (const auto &t : ts)
		u += t.utilization();
	return u;
}

void validate(const JobStream &s)
{
	if (!(s.exec_time > 0.0))
		throw ParameterError("stream execution time must be positive");
	if (!(s.rel_deadline >= s.exec_time))
		throw ParameterError("stream relative deadline must be at least its execution time");
	if (!(s.mean_gap >= 0.0) || !std::isfinite(s.mean_gap))
		throw ParameterError("stream mean gap must be finite and non-negative");
}

std::vector<double> gen_uunisort(std::size_t n, double total, Rng &rng)
{
	if (n == 0)
		throw ParameterError("uunisort: n must be at least 1");
	if (!(total > 0.0) || total > static_cast<double>(n))
		throw ParameterError("uunisort: utilization must lie in (0, n]");

	std::vector<double> cuts(n + 1);
	std::vector<double> u(n);
	for (int attempt = 0; attempt < kMaxUUniSortAttempts; ++attempt) {
		cuts[0] = 0.0;
		cuts[n] = total;
		for (std::size_t i = 1; i < n; ++i)
			cuts[i] = rng.uniform(0.0, total);
		std::sort(cuts.begin() + 1, cuts.begin() + static_cast<std::ptrdiff_t>(n));

		bool ok = true;
		for (std::size_t i = 0; i < n; ++i) {
			u[i] = cuts[i + 1] - cuts[i];
			if (!(u[i] > 0.0) || u[i] > 1.0)
				ok = false;
		}
		if (ok)
			return u;
	}
	throw ParameterError("uunisort: rejection sampling did not find a feasible vector (U too close to n)");
}

std::vector<double> gen_equal_split(std::size_t n, double total)
{
	if (n == 0)
		throw ParameterError("equal split: n must be at least 1");
	if (!(total > 0.0))
		throw ParameterError("equal split: utilization must be positive");
	double each = total / static_cast<double>(n);
	if (each > 1.0)
		throw ParameterError("equal split: per-task utilization U/n exceeds 1");
	return std::vector<double>(n, each);
}

std::vector<std::int64_t> gen_periods(std::size_t n, std::int64_t lo, std::int64_t hi, Rng &rng)
{
	if (lo < 1 || lo > hi)
		throw ParameterError("periods: need 1 <= lo <= hi");
	std::vector<std::int64_t> p(n);
	for (auto &x : p)
		x = rng.uniform_int(lo, hi);
	return p;
}

std::vector<std::int64_t> gen_periods_from_set(std::size_t n, std::span<const std::int64_t> allowed,
                                               Rng &rng)
{
	if (allowed.empty())
		throw ParameterError("periods: allowed period set is empty");
	for (auto v : allowed)
		if (v < 1)
			throw ParameterError("periods: allowed periods must be positive");
	std::vector<std::int64_t> p(n);
	auto last = static_cast<std::int64_t>(allowed.size()) - 1;
	for (auto &x : p)
		x = allowed[static_cast<std::size_t>(rng.uniform_int(0, last))];
	return p;
}

TaskSet assemble_taskset(std::span<const double> utilizations, std::span<const std::int64_t> periods)
{
	if (utilizations.size() != periods.size())
		throw ParameterError("assemble: " + std::to_string(utilizations.size()) + " utilizations but "
		                     + std::to_string(periods.size()) + " periods");
	std::vector<Task> tasks;
	tasks.reserve(periods.size());
	for (std::size_t i = 0; i < periods.size(); ++i) {
		double u = utilizations[i];
		if (!(u > 0.0) || u > 1.0)
			throw ParameterError("assemble: utilization " + std::to_string(u) + " outside (0, 1]");
		auto p = static_cast<double>(periods[i]);
		// u*P can round just above P when u == 1.
		tasks.emplace_back(periods[i], std::min(u * p, p));
	}
	return TaskSet(std::move(tasks));
}

TaskSet gen_barely_schedulable(std::span<const std::int64_t> periods)
{
	if (periods.empty())
		throw ParameterError("barely schedulable: need at least one period");
	for (std::size_t i = 0; i < periods.size(); ++i) {
		if (periods[i] < 1)
			throw ParameterError("barely schedulable: periods must be positive");
		if (i > 0 && periods[i] <= periods[i - 1])
			throw ParameterError("barely schedulable: periods must be strictly increasing");
	}

	std::size_t n = periods.size();
	std::vector<double> c(n);
	double head = 0.0;
	for (std::size_t i = 0; i + 1 < n; ++i) {
		c[i] = static_cast<double>(periods[i + 1] - periods[i]);
		head += c[i];
	}
	c[n - 1] = static_cast<double>(periods[n - 1]) - 2.0 * head;
	if (!(c[n - 1] > 0.0))
		throw ParameterError("barely schedulable: last execution time is not positive "
		                     "(period spread too wide)");

	std::vector<Task> tasks;
	for (std::size_t i = 0; i < n; ++i)
		tasks.emplace_back(periods[i], c[i]);
	return TaskSet(std::move(tasks));
}

} // namespace sharp
