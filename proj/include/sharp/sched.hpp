#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sharp/core.hpp"

namespace sharp {

/// Task indices, highest priority first.
using PriorityOrder = std::vector<std::size_t>;

/// Rate monotonic: ascending period, ties broken by task index.
PriorityOrder rm_order(const TaskSet &ts);

/// Deadline monotonic: ascending relative deadline, ties broken by position.
PriorityOrder dm_order(std::span<const JobStream> streams);

bool is_permutation_of_indices(std::span<const std::size_t> order, std::size_t n);

/// Worst-case response time of task i under the given fixed-priority order,
/// assuming synchronous release. Smallest fixed point of
///
///   L = c_i + sum_{j in hp(i)} ceil(L / P_j) c_j
///
/// iterated from L = c_i. Returns nullopt as soon as an iterate exceeds D_i.
std::optional<double> response_time(const TaskSet &ts, std::span<const std::size_t> order, std::size_t i);

struct ResponseTimeResult {
	/// Per task index; nullopt marks "exceeds deadline".
	std::vector<std::optional<double>> response;
	bool schedulable = false;
};

/// Response times of every task under rate monotonic priorities.
ResponseTimeResult analyze_rm(const TaskSet &ts);

/// Exact RM test (response-time analysis). Stops at the first failing task.
bool rm_schedulable(const TaskSet &ts);

/// n (2^{1/n} - 1).
double ll_bound(std::size_t n);

struct BruteForceOptions {
	/// Maximum hyperperiod in scaled time quanta.
	std::int64_t hyperperiod_cap = 1'000'000;
	/// Largest common denominator tried when converting execution times to
	/// integer quanta.
	std::int64_t max_denominator = 1024;
};

/// Test oracle: simulates preemptive RM from a synchronous release over one
/// hyperperiod in exact integer arithmetic. Throws RangeError when the
/// execution times have no small common denominator or the hyperperiod
/// exceeds the cap.
bool brute_force_schedulable(const TaskSet &ts, const BruteForceOptions &opts = {});

} // namespace sharp
