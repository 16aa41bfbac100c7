#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sharp/config.hpp"

namespace sharp {

std::string toolkit_version();

enum ExitCode : int {
	exit_ok = 0,
	exit_unschedulable = 1,
	exit_usage = 2,
};

const std::vector<std::string> &recipe_names();

/// `base` with the settings of a named figure preset applied (command and
/// recipe included). Throws ParameterError for unknown names.
ExperimentConfig recipe_preset(const std::string &name, ExperimentConfig base = {});

/// Runs cfg.command. CSV goes to cfg.out, with the resolved config written
/// next to it as `<out>.run`, or to `out` when cfg.out is empty. Summaries
/// and diagnostics go to `out` when the CSV is in a file and to `err`
/// otherwise. Parameter and input errors are reported on `err` and map to
/// exit_usage.
int run(const ExperimentConfig &cfg, std::ostream &out, std::ostream &err);

} // namespace sharp
