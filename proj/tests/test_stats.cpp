#include <doctest.h>

#include <cmath>
#include <vector>

#include "sharp/error.hpp"
#include "sharp/stats.hpp"

using namespace sharp;

namespace {

// Wilson bounds as the roots in p of (p_hat - p)^2 = z^2 p (1 - p) / n.
std::pair<double, double> wilson_roots(double k, double n, double z)
{
	double ph = k / n;
	double a = 1.0 + z * z / n;
	double b = -(2.0 * ph + z * z / n);
	double c = ph * ph;
	double disc = std::sqrt(b * b - 4.0 * a * c);
	return {(-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a)};
}

} // namespace

TEST_CASE("[stats] Wilson interval against published values")
{
	// 35 of 200 at 80% confidence: 0.1432 .. 0.212
	auto r = wilson_interval(35, 200, 1.2815515655446004);
	CHECK(r.lo == doctest::Approx(0.1432).epsilon(1e-3));
	CHECK(r.hi == doctest::Approx(0.2120).epsilon(1e-3));
	CHECK(r.p_hat == doctest::Approx(0.175));
}

TEST_CASE("[stats] Wilson interval matches the quadratic roots")
{
	for (auto [k, n] : std::vector<std::pair<std::size_t, std::size_t>>{{0, 10}, {3, 10}, {10, 10}, {1000, 2000}, {1, 2000}}) {
		auto r = wilson_interval(k, n);
		auto [lo, hi] = wilson_roots(static_cast<double>(k), static_cast<double>(n), kZ95);
		CHECK(r.lo == doctest::Approx(std::max(0.0, lo)).epsilon(1e-12));
		CHECK(r.hi == doctest::Approx(std::min(1.0, hi)).epsilon(1e-12));
		CHECK(r.lo <= r.p_hat);
		CHECK(r.p_hat <= r.hi);
	}
	CHECK(wilson_interval(0, 10).lo == 0.0);
	CHECK(wilson_interval(10, 10).hi == 1.0);
	CHECK_THROWS_AS(wilson_interval(0, 0), ParameterError);
	CHECK_THROWS_AS(wilson_interval(3, 2), ParameterError);
}

TEST_CASE("[stats] isotonic fit leaves monotone data alone")
{
	std::vector<double> y{1.0, 0.9, 0.9, 0.4, 0.0};
	std::vector<double> w(5, 1.0);
	CHECK(isotonic_nonincreasing(y, w) == y);
}

TEST_CASE("[stats] isotonic fit pools violators with weights")
{
	std::vector<double> y{1.0, 0.6, 0.8, 0.1};
	std::vector<double> w{1.0, 1.0, 3.0, 1.0};
	auto f = isotonic_nonincreasing(y, w);
	REQUIRE(f.size() == 4);
	CHECK(f[0] == 1.0);
	CHECK(f[1] == doctest::Approx(0.75));
	CHECK(f[2] == doctest::Approx(0.75));
	CHECK(f[3] == doctest::Approx(0.1));

	// a chain of violations collapses into one block
	std::vector<double> up{0.0, 0.5, 1.0};
	std::vector<double> ones(3, 1.0);
	for (double v : isotonic_nonincreasing(up, ones))
		CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("[stats] isotonic fit is non-increasing and preserves the weighted mean")
{
	std::vector<double> y{0.9, 1.0, 0.7, 0.75, 0.2, 0.3, 0.0, 0.05};
	std::vector<double> w{2, 1, 3, 1, 2, 2, 1, 4};
	auto f = isotonic_nonincreasing(y, w);
	double sy = 0, sf = 0;
	for (std::size_t i = 0; i < y.size(); ++i) {
		sy += w[i] * y[i];
		sf += w[i] * f[i];
		if (i)
			CHECK(f[i] <= f[i - 1] + 1e-15);
	}
	CHECK(sf == doctest::Approx(sy));
	CHECK_THROWS_AS(isotonic_nonincreasing(y, std::vector<double>(3, 1.0)), ParameterError);
	CHECK_THROWS_AS(isotonic_nonincreasing(std::vector<double>{1.0}, std::vector<double>{0.0}), ParameterError);
}

TEST_CASE("[stats] crossing interpolates linearly")
{
	std::vector<double> x{0.6, 0.7, 0.8, 0.9};
	std::vector<double> y{1.0, 0.8, 0.2, 0.0};
	CHECK(*crossing(x, y, 0.5) == doctest::Approx(0.75));
	CHECK(*crossing(x, y, 0.9) == doctest::Approx(0.65));
	CHECK(*crossing(x, y, 0.1) == doctest::Approx(0.85));
	CHECK(*crossing(x, y, 1.0) == doctest::Approx(0.6));
}

TEST_CASE("[stats] crossing on a plateau returns its middle")
{
	std::vector<double> x{0.0, 1.0, 2.0, 3.0};
	std::vector<double> y{1.0, 0.5, 0.5, 0.0};
	CHECK(*crossing(x, y, 0.5) == doctest::Approx(1.5));
}

TEST_CASE("[stats] crossing outside the range")
{
	std::vector<double> x{0.0, 1.0};
	CHECK_FALSE(crossing(x, std::vector<double>{0.9, 0.6}, 0.5).has_value());
	CHECK_FALSE(crossing(x, std::vector<double>{0.4, 0.1}, 0.5).has_value());
	CHECK_FALSE(crossing(std::vector<double>{}, std::vector<double>{}, 0.5).has_value());
}

TEST_CASE("[stats] least squares")
{
	std::vector<double> x{1, 2, 3, 4};
	std::vector<double> y{3, 5, 7, 9};
	auto f = least_squares(x, y);
	CHECK(f.slope == doctest::Approx(2.0));
	CHECK(f.intercept == doctest::Approx(1.0));

	// log w = log 3 - 0.5 log n
	std::vector<double> ln, lw;
	for (double n : {8.0, 16.0, 32.0, 64.0}) {
		ln.push_back(std::log(n));
		lw.push_back(std::log(3.0 / std::sqrt(n)));
	}
	auto g = least_squares(ln, lw);
	CHECK(g.slope == doctest::Approx(-0.5));
	CHECK(g.intercept == doctest::Approx(std::log(3.0)));

	CHECK_THROWS_AS(least_squares(std::vector<double>{1.0}, std::vector<double>{1.0}), ParameterError);
	CHECK_THROWS_AS(least_squares(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 2.0}), ParameterError);
}
