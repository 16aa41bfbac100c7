#pragma once

#include <iosfwd>
#include <string>

#include "sharp/core.hpp"

namespace sharp {

// Text format: one task per line, `period exec_time [deadline]`, fields
// separated by whitespace. `#` starts a comment; blank lines are ignored.

TaskSet read_taskset(std::istream &in);
TaskSet read_taskset_file(const std::string &path);
void write_taskset(std::ostream &out, const TaskSet &ts);

/// CSV with header `index,period,exec_time,deadline,utilization`.
void write_taskset_csv(std::ostream &out, const TaskSet &ts);

} // namespace sharp
