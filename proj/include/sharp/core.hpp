#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sharp/rng.hpp"

namespace sharp {

/// Periodic task with integer period, real execution time and a deadline
/// (implicit, i.e. equal to the period, unless given).
struct Task {
	std::int64_t period;
	double exec_time;
	double deadline;

	Task(std::int64_t period, double exec_time);
	Task(std::int64_t period, double exec_time, double deadline);

	double utilization() const { return exec_time / static_cast<double>(period); }
};

/// Non-empty, immutable collection of tasks. Task indices are positions in
/// the order given at construction.
class TaskSet {
public:
	explicit TaskSet(std::vector<Task> tasks);

	std::size_t size() const { return tasks_.size(); }
	const Task &operator[](std::size_t i) const { return tasks_[i]; }
	std::span<const Task> tasks() const { return tasks_; }
	auto begin() const { return tasks_.begin(); }
	auto end() const { return tasks_.end(); }

	/// Copy with task i replaced.
	TaskSet with_task(std::size_t i, Task t) const;
	/// Copy without task i; throws if that would leave the set empty.
	TaskSet without_task(std::size_t i) const;

private:
	std::vector<Task> tasks_;
};

/// Sum of c_i / P_i.
double utilization(const TaskSet &ts);

/// Aperiodic job stream: every job has the same execution time and relative
/// deadline; the next job arrives no earlier than the previous job's
/// absolute deadline plus an exponential gap.
struct JobStream {
	double exec_time;
	double rel_deadline;
	double mean_gap;
	std::size_t id;

	double density() const { return exec_time / rel_deadline; }
};

void validate(const JobStream &s);

struct Job {
	std::size_t stream_id;
	double arrival;
	double abs_deadline;
	double exec_time;
};

// Random workload generators. All of them are pure functions of their
// arguments and the state of the rng passed in.

/// Simplex-uniform utilization vector summing to `total` (UUniSort): n-1
/// sorted uniform cut points on [0, total]. Vectors with an entry outside
/// (0, 1] are rejected and redrawn.
std::vector<double> gen_uunisort(std::size_t n, double total, Rng &rng);

std::vector<double> gen_equal_split(std::size_t n, double total);

/// i.i.d. uniform integers on [lo, hi].
std::vector<std::int64_t> gen_periods(std::size_t n, std::int64_t lo, std::int64_t hi, Rng &rng);

/// i.i.d. uniform draws (with replacement) from `allowed`.
std::vector<std::int64_t> gen_periods_from_set(std::size_t n, std::span<const std::int64_t> allowed,
                                               Rng &rng);

/// Task i gets c_i = u_i * P_i and D_i = P_i.
TaskSet assemble_taskset(std::span<const double> utilizations, std::span<const std::int64_t> periods);

/// Liu-Layland critical task set for strictly increasing periods:
/// c_i = P_{i+1} - P_i for i < n and c_n = P_n - 2 (c_1 + ... + c_{n-1}).
/// It is schedulable under RM, and any increase of an execution time breaks it.
TaskSet gen_barely_schedulable(std::span<const std::int64_t> periods);

} // namespace sharp
