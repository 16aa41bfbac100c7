#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sharp {

/// Invalid argument to a generator, analysis or simulation routine.
class ParameterError : public std::invalid_argument {
public:
	using std::invalid_argument::invalid_argument;
};

/// A quantity could not be computed inside the supplied range
/// (no threshold crossing in a sweep, hyperperiod over the cap, ...).
class RangeError : public std::range_error {
public:
	using std::range_error::range_error;
};

/// Malformed input file. Carries the 1-based line number when known.
class InputError : public std::runtime_error {
public:
	InputError(const std::string &what, std::size_t line = 0)
		: std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
		  line_(line)
	{}

	std::size_t line() const { return line_; }

private:
	std::size_t line_;
};

} // namespace sharp
