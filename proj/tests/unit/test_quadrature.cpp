#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "msim/quadrature.hpp"

using namespace msim;

TEST_CASE("smooth integrals reach the requested tolerance") {
  const auto r = quadrature::integrate<double>([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  CHECK(std::abs(r.value - 2.0) < 1e-13);

  const auto g = quadrature::integrate<double>([](double x) { return std::exp(-x * x); }, -8.0, 8.0,
                                                {1e-15, 1e-14, 1000});
  CHECK(std::abs(g.value - std::sqrt(std::numbers::pi)) < 1e-14);
}

TEST_CASE("oscillatory integrand with initial panels") {
  // int_0^10 e^{-x} cos(40 x) dx = (1 - e^{-10}(cos 400 - 40 sin 400)) / 1601
  const double exact = (1.0 - std::exp(-10.0) * (std::cos(400.0) - 40.0 * std::sin(400.0))) / 1601.0;
  const auto r = quadrature::integrate<double>([](double x) { return std::exp(-x) * std::cos(40.0 * x); }, 0.0, 10.0,
                                                {1e-15, 1e-13, 4000}, 130);
  CHECK(std::abs(r.value - exact) < 1e-14);
}

TEST_CASE("complex and bundled integrands") {
  using cplx = std::complex<double>;
  const auto c = quadrature::integrate<cplx>([](double x) { return std::exp(cplx(0.0, x)); }, 0.0,
                                              0.5 * std::numbers::pi);
  CHECK(std::abs(c.value - cplx(1.0, 1.0)) < 1e-13);

  const auto b = quadrature::integrate<std::array<double, 3>>(
      [](double x) { return std::array<double, 3>{1.0, x, x * x}; }, 0.0, 3.0);
  CHECK(b.value[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(b.value[1] == doctest::Approx(4.5).epsilon(1e-14));
  CHECK(b.value[2] == doctest::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("interval budget exhaustion is reported") {
  const auto f = [](double x) { return 1.0 / std::sqrt(x); };
  CHECK_THROWS_AS(quadrature::integrate<double>(f, 0.0, 1.0, {1e-16, 1e-16, 4}), NonConvergence);
}
