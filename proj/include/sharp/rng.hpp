#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sharp {

/// Seedable, splittable random source.
///
/// Every Monte Carlo unit (grid point, trial, stream) gets its own Rng
/// derived from the experiment seed and the unit's coordinates, so results
/// do not depend on how work is distributed over threads.
class Rng {
public:
	using result_type = std::uint64_t;

	explicit Rng(std::uint64_t seed);

	/// Child generator for the coordinate path (a, b, ...) below `seed`.
	static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

	Rng split(std::uint64_t tag) const;

	std::uint64_t seed() const { return seed_; }

	result_type operator()() { return engine_(); }
	static constexpr result_type min() { return std::mt19937_64::min(); }
	static constexpr result_type max() { return std::mt19937_64::max(); }

	/// Uniform on [lo, hi).
	double uniform(double lo, double hi);
	/// Uniform over the integers [lo, hi].
	std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
	/// Exponential with the given mean; mean 0 yields 0.
	double exponential(double mean);
	/// Gamma-distributed factor with mean 1 and coefficient of variation `cv`.
	double unit_gamma(double cv);

private:
	std::uint64_t seed_;
	std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x);

} // namespace sharp
