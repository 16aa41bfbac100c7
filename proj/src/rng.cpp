#include "sharp/rng.hpp"

namespace sharp {

std::uint64_t mix64(std::uint64_t x)
{
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
{
	std::uint64_t s = mix64(seed);
	for (auto p : path)
		s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
	return Rng(s);
}

Rng Rng::split(std::uint64_t tag) const
{
	return derive(seed_, {tag});
}

double Rng::uniform(double lo, double hi)
{
	return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi)
{
	return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
}

double Rng::exponential(double mean)
{
	if (mean <= 0.0)
		return 0.0;
	return std::exponential_distribution<double>(1.0 / mean)(engine_);
}

double Rng::unit_gamma(double cv)
{
	if (cv <= 0.0)
		return 1.0;
	double shape = 1.0 / (cv * cv);
	return std::gamma_distribution<double>(shape, 1.0 / shape)(engine_);
}

} // namespace sharp
