#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "lqft/conformal_factor.hpp"
#include "lqft/disk_geometry.hpp"
#include "oracle.hpp"

using namespace lqft;
using doctest::Approx;

TEST_CASE("green: closed-form values") {
  CHECK(green(DiskPoint(0, 0), DiskPoint(0.5, 0)) == Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(green(DiskPoint(0.3, 0), DiskPoint(0, 0.2)) == green(DiskPoint(0, 0.2), DiskPoint(0.3, 0)));
  const double ref = static_cast<double>(oracle::green({0.5, 0}, {-0.5, 0}));
  CHECK(ref == Approx(-0.2231436).epsilon(1e-7));
  CHECK(std::abs(green(DiskPoint(0.5, 0), DiskPoint(-0.5, 0)) - ref) < 1e-15);
  CHECK_THROWS_AS(green(DiskPoint(0.2, 0.1), DiskPoint(0.2, 0.1)), Error);
}

TEST_CASE("green: symmetry and origin identity on random pairs") {
  std::mt19937_64 g(1);
  for (int i = 0; i < 2000; ++i) {
    const DiskPoint x(oracle::random_point(g, 1.0)), y(oracle::random_point(g, 1.0));
    CHECK(std::abs(green(x, y) - green(y, x)) < 1e-14);
    CHECK(green(DiskPoint(0, 0), y) == -std::log(y.abs()));
    const double ref = static_cast<double>(oracle::green({x.re(), x.im()}, {y.re(), y.im()}));
    CHECK(std::abs(green(x, y) - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("green_mean_boundary vanishes") {
  // G(0, s) = -ln|s| is zero pointwise; only the rounding of |e^{i theta}| survives.
  CHECK(std::abs(green_mean_boundary(DiskPoint(0, 0), 256)) < 1e-15);
  CHECK(std::abs(green_mean_boundary(DiskPoint(0.4, 0), 512)) < 1e-10);
  CHECK(std::abs(green_mean_boundary(DiskPoint(0.9, 0.05), 4096)) < 1e-8);
  CHECK_THROWS_AS(green_mean_boundary(DiskPoint(0.1, 0), 8), Error);
}

TEST_CASE("green_regularized: exact cases and a numeric double circle average") {
  CHECK(green_regularized(DiskPoint(0, 0), DiskPoint(0, 0), 0.01) == Approx(std::log(100.0)).epsilon(1e-15));
  CHECK(green_regularized(DiskPoint(0.8, 0), DiskPoint(0.8, 0), 0.05) == Approx(4.0173835).epsilon(1e-7));
  CHECK(green_regularized(DiskPoint(0.2, 0), DiskPoint(-0.2, 0), 0.05) == green(DiskPoint(0.2, 0), DiskPoint(-0.2, 0)));
  CHECK_THROWS_AS(green_regularized(DiskPoint(0.2, 0), DiskPoint(0.25, 0), 0.05), Error);

  // Double circle average of G around x = 0.8, eps = 0.05. The diagonal log part depends only
  // on the angle difference; the smooth part is averaged by a 2D trapezoid rule.
  const double x = 0.8, eps = 0.05;
  boost::math::quadrature::tanh_sinh<double> ts;
  const double diag = -std::log(eps) - ts.integrate([](double t) { return std::log(2.0 * std::sin(t / 2.0)); }, 0.0,
                                                    2.0 * M_PI) / (2.0 * M_PI);
  const int n = 256;
  double smooth = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::complex<double> u = x + std::polar(eps, 2 * M_PI * i / n), v = x + std::polar(eps, 2 * M_PI * j / n);
      smooth -= std::log(std::abs(1.0 - u * std::conj(v)));
    }
  smooth /= double(n) * n;
  CHECK(std::abs(diag + smooth - green_regularized(DiskPoint(x, 0), DiskPoint(x, 0), eps)) < 1e-6);
}

TEST_CASE("mobius: identity, direct substitution, modulus identities") {
  const MobiusMap id(0.0, 0.0);
  const cplx x(0.3, -0.4);
  CHECK(std::abs(id.apply(x) - x) == 0.0);
  CHECK(std::abs(id.derivative(x) - 1.0) == 0.0);
  const MobiusMap half(0.5, 0.0);
  CHECK(std::abs(half.apply(cplx(0.0)) - cplx(-0.5)) < 1e-16);
  CHECK(std::abs(half.derivative(cplx(0.0)) - cplx(0.75)) < 1e-16);
  CHECK_THROWS_AS(MobiusMap(cplx(1.0, 0.0), 0.0), Error);

  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int i = 0; i < 2000; ++i) {
    const MobiusMap psi(oracle::random_point(g, 0.9), u(g));
    const cplx a = oracle::random_point(g, 1.0), b = oracle::random_point(g, 1.0);
    const double lhs = std::abs(1.0 - psi.apply(a) * std::conj(psi.apply(b)));
    const double rhs = std::sqrt(std::abs(psi.derivative(a)) * std::abs(psi.derivative(b))) * std::abs(1.0 - a * std::conj(b));
    CHECK(std::abs(lhs - rhs) < 1e-12);
    CHECK(std::abs(psi.inverse().apply(psi.apply(a)) - a) < 1e-12);
    const cplx s = std::polar(1.0, u(g));
    CHECK(psi.apply(DiskPoint(s)).on_boundary());
  }
}

TEST_CASE("mobius: Green covariance identity against 50-digit evaluation") {
  const oracle::mpc a{oracle::mp("0.3"), oracle::mp("0.1")};
  const oracle::mp alpha = 1;
  const oracle::mpc x{oracle::mp("0.2"), 0}, y{0, oracle::mp("-0.4")};
  const oracle::mp exact = oracle::green(oracle::mobius(a, alpha, x), oracle::mobius(a, alpha, y)) - oracle::green(x, y) +
                           log(oracle::abs(oracle::mobius_derivative(a, alpha, x))) +
                           log(oracle::abs(oracle::mobius_derivative(a, alpha, y)));
  CHECK(abs(exact) < oracle::mp("1e-40"));

  const MobiusMap psi(cplx(0.3, 0.1), 1.0);
  const DiskPoint dx(0.2, 0.0), dy(0.0, -0.4);
  const double residual = green(psi.apply(dx), psi.apply(dy)) - green(dx, dy) + std::log(std::abs(psi.derivative(dx))) +
                          std::log(std::abs(psi.derivative(dy)));
  CHECK(std::abs(residual) < 1e-12);
  const oracle::mpc px = oracle::mobius(a, alpha, x);
  CHECK(std::abs(psi.apply(dx).re() - static_cast<double>(px.re)) < 1e-15);
  CHECK(std::abs(psi.apply(dx).im() - static_cast<double>(px.im)) < 1e-15);
}

TEST_CASE("poincare density") {
  CHECK(poincare_density(DiskPoint(0, 0)) == 1.0);
  CHECK(poincare_density(DiskPoint(0.5, 0)) == Approx(1.7777778).epsilon(1e-7));
  CHECK_THROWS_AS(poincare_density(DiskPoint::on_circle(0.3)), Error);
  std::mt19937_64 g(3);
  for (int i = 0; i < 200; ++i) {
    const DiskPoint x(oracle::random_point(g, 0.95));
    const double e = 0.5 * (1.0 - x.abs());
    CHECK(std::abs(green_regularized(x, x, e) + std::log(e) - 0.5 * std::log(poincare_density(x))) < 1e-13);
  }
}

TEST_CASE("conformal weights") {
  for (double g : {0.3, 1.0, std::sqrt(8.0 / 3.0), 1.9}) {
    const LiouvilleParams p{g, 1.0, 0.0};
    CHECK(conformal_weight(g, p) == Approx(1.0).epsilon(1e-15));
    CHECK(conformal_weight(0.0, p) == 0.0);
    CHECK(conformal_weight(p.Q(), p) == Approx(p.Q() * p.Q() / 4.0).epsilon(1e-15));
  }
  const oracle::mp g = sqrt(oracle::mp(8) / 3), Q = 2 / g + g / 2;
  const double ref = static_cast<double>(oracle::mp(1) / 2 * (Q - oracle::mp(1) / 2));
  CHECK(ref == Approx(0.7706207).epsilon(1e-7));
  CHECK(std::abs(conformal_weight(1.0, LiouvilleParams{std::sqrt(8.0 / 3.0), 1.0, 0.0}) - ref) < 1e-14);
}

TEST_CASE("LiouvilleParams validation") {
  CHECK_NOTHROW(LiouvilleParams({2.0, 1.0, 0.0}).validate());
  CHECK_THROWS_AS(LiouvilleParams({2.1, 1.0, 0.0}).validate(), Error);
  CHECK_THROWS_AS(LiouvilleParams({1.0, 0.0, 0.0}).validate(), Error);
  CHECK_THROWS_AS(LiouvilleParams({1.0, -1.0, 2.0}).validate(), Error);
}

TEST_CASE("curvatures of flat and constant factors") {
  const PolarGrid grid{32, 64};
  const auto flat = curvatures(ConformalFactor::constant(grid, 0.0));
  for (double r : flat.bulk) CHECK(std::abs(r) < 1e-12);
  for (double k : flat.boundary) CHECK(k == Approx(1.0).epsilon(1e-14));
  const double c = 0.7;
  const auto shifted = curvatures(ConformalFactor::constant(grid, c));
  for (double r : shifted.bulk) CHECK(std::abs(r) < 1e-12);
  for (double k : shifted.boundary) CHECK(k == Approx(std::exp(-c / 2)).epsilon(1e-14));
  CHECK_THROWS_AS(curvatures(ConformalFactor::constant(PolarGrid{8, 64}, 0.0)), Error);
}

TEST_CASE("Gauss-Bonnet under refinement") {
  auto phi = [](double r, double) { return 1.0 - r * r; };
  // The discrete curvature moments telescope, so every resolution is within roundoff of 4 pi.
  for (int n : {16, 32, 64, 128, 256})
    CHECK(std::abs(gauss_bonnet(ConformalFactor::from_function(PolarGrid{n, 2 * n}, phi)) - 4.0 * M_PI) < 1e-6);
  // A non-radial factor.
  auto psi = [](double r, double t) { return 0.3 * r * r * r * std::cos(t) - 0.2 * r * r; };
  CHECK(std::abs(gauss_bonnet(ConformalFactor::from_function(PolarGrid{256, 512}, psi)) - 4.0 * M_PI) < 1e-5);
}

TEST_CASE("weyl anomaly: zero, constant shift, cocycle, flat direct") {
  const LiouvilleParams p{std::sqrt(8.0 / 3.0), 1.0, 0.0};
  const PolarGrid grid{64, 128};
  const auto zero = ConformalFactor::constant(grid, 0.0);
  CHECK(weyl_anomaly(zero, zero, p) == 0.0);
  const double c = 0.37;
  CHECK(std::abs(weyl_anomaly(ConformalFactor::constant(grid, c), zero, p) - (1 + 6 * p.Q() * p.Q()) * c / 12.0) < 1e-10);

  std::mt19937_64 g(4);
  std::normal_distribution<double> n01(0.0, 0.3);
  for (int trial = 0; trial < 5; ++trial) {
    const double a1 = n01(g), a2 = n01(g), b1 = n01(g), b2 = n01(g), c0 = n01(g);
    auto f1 = [=](double r, double t) { return a1 * r * std::cos(t) + a2 * r * r + c0; };
    auto f2 = [=](double r, double t) { return b1 * r * r * std::sin(2 * t) + b2 * r * r * r * std::cos(t); };
    auto base = [](double r, double) { return 0.1 * r * r; };
    auto base1 = [=](double r, double t) { return base(r, t) + f1(r, t); };
    auto sum = [=](double r, double t) { return f1(r, t) + f2(r, t); };
    const double lhs = weyl_anomaly(sum, base, p, 64);
    const double rhs = weyl_anomaly(f1, base, p, 64) + weyl_anomaly(f2, base1, p, 64);
    CHECK(std::abs(lhs - rhs) < 1e-6);
    const auto phi = ConformalFactor::from_function(grid, f1);
    CHECK(std::abs(weyl_anomaly(phi, zero, p) - weyl_anomaly_flat_direct(phi, p)) < 1e-8);
  }
  CHECK_THROWS_AS(weyl_anomaly(ConformalFactor::constant(PolarGrid{32, 64}, 0.0), zero, p), Error);
}
