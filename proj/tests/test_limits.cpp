#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rzl/error.hpp"
#include "rzl/limits.hpp"

using namespace rzl;
using namespace rzl::limits;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

const double kE = std::exp(1.0);

}  // namespace

TEST_SUITE("limits") {

TEST_CASE("F_m small examples") {
  CHECK(eval_F(3, 0.0) == cplx(0.25));
  CHECK(rel(eval_F(1, 1.0), 1.0) < 1e-14);
  CHECK(rel(eval_F(1, 1.0), oracle::F(1, 1.0)) < 1e-14);
  CHECK(rel(eval_F(0, 1.0), kE - 1.0) < 1e-14);
  CHECK(rel(eval_F(0, 1.0), oracle::F(0, 1.0)) < 1e-14);
}

TEST_CASE("F_m matches quadrature across branches") {
  // Covers the small-|t| series, forward recurrence (|t| >= m) and backward
  // recurrence (1 <= |t| < m) paths.
  const int orders[] = {0, 1, 2, 3, 5, 10, 20, 40, 64};
  const double radii[] = {1e-6, 1e-3, 0.3, 0.99, 1.0, 1.7, 4.0, 9.5, 20.0, 35.0};
  const double angles[] = {0.0, 0.4, 1.2, kPi / 2, 2.0, 3.0, kPi};
  double worst = 0.0;
  for (int m : orders)
    for (double r : radii)
      for (double a : angles) {
        const cplx t = std::polar(r, a);
        worst = std::max(worst, rel(eval_F(m, t), oracle::F(m, t)));
      }
  CHECK(worst < 1e-12);
}

TEST_CASE("F_m batch agrees with single evaluation") {
  const cplx t{2.5, -7.0};
  const auto all = eval_F_all(12, t);
  for (int m = 0; m <= 12; ++m) CHECK(all[std::size_t(m)] == eval_F(m, t));
}

TEST_CASE("F_m rejects bad arguments") {
  CHECK_THROWS_AS(eval_F(0, cplx(NAN, 0.0)), Error);
  CHECK_THROWS_AS(eval_F(0, cplx(0.0, INFINITY)), Error);
  CHECK_THROWS_AS(eval_F(-1, 1.0), Error);
  try {
    eval_F(1, cplx(NAN, 1.0));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
}

TEST_CASE("conjugation symmetry") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> d(-15.0, 15.0);
  for (int k = 0; k < 100; ++k) {
    const cplx t{d(gen), d(gen)};
    const int m = k % 8;
    const cplx a = eval_F(m, std::conj(t)), b = std::conj(eval_F(m, t));
    CHECK(std::abs(a - b) <= 1e-14 * std::abs(b));
  }
}

TEST_CASE("three-term recurrence") {
  // Residual measured against the size of the terms being combined.
  double worst = 0.0;
  for (int m = 1; m <= 10; ++m)
    for (double r : {1e-3, 0.01, 0.5, 1.0, 2.0, 5.0, 12.0, 20.0})
      for (double a : {0.0, 0.7, kPi / 2, 2.2, kPi, -1.1}) {
        const cplx t = std::polar(r, a);
        const cplx lhs = t * eval_F(m, t) + double(m) * eval_F(m - 1, t);
        const cplx et = std::exp(t);
        const double scale = std::max({std::abs(et), std::abs(t * eval_F(m, t)), m * std::abs(eval_F(m - 1, t))});
        worst = std::max(worst, std::abs(lhs - et) / scale);
      }
  CHECK(worst <= 1e-10);
}

TEST_CASE("derivative is the next order") {
  const double h = 1e-5;
  for (int m = 0; m <= 6; ++m)
    for (cplx t : {cplx(-3.0), cplx(0.2), cplx(1.5), cplx(6.0), cplx(0.5, 2.0), cplx(-1.0, 4.0)}) {
      const cplx fd = (eval_F(m, t + h) - eval_F(m, t - h)) / (2.0 * h);
      CHECK(rel(fd, eval_F(m + 1, t)) < 1e-6);
    }
}

TEST_CASE("log F second derivative") {
  CHECK(std::abs(log_F_dd(0, 0.0) - 1.0 / 12.0) < 1e-14);
  CHECK(std::abs(log_F_dd(1, 0.0) - 1.0 / 18.0) < 1e-14);
  // Finite differences of log F_m, independent of the F_{m+1}, F_{m+2} identity.
  const auto logF0 = [](double x) { return std::log(eval_F(0, x).real()); };
  CHECK(std::abs(oracle::second_difference(logF0, 0.0, 1e-4) - 1.0 / 12.0) < 1e-6 / 12.0);
  for (int m : {0, 1, 3})
    for (double s : {-2.0, -0.5, 0.3, 1.0, 2.5}) {
      const auto logF = [m](double x) { return std::log(eval_F(m, x).real()); };
      const double fd = oracle::richardson_second_difference(logF, s, 2e-3);
      CHECK(std::abs(log_F_dd(m, s).real() - fd) <= 1e-6 * std::abs(fd));
      CHECK(rel(log_F_dd(m, s), oracle::log_F_dd(m, s)) < 1e-11);
    }
}

TEST_CASE("G matrix") {
  const Mat2 g0 = G_matrix(0, 0.0);
  CHECK(g0.a11 == cplx(1.0));
  CHECK(g0.a12 == cplx(1.0));
  CHECK(g0.a21 == cplx(1.0));
  CHECK(g0.a22 == cplx(1.0));
  CHECK(g0.det() == cplx(0.0));

  const Mat2 g1 = G_matrix(0, 1.0);
  CHECK(rel(g1.a11, (kE * kE - 1.0) / 2.0) < 1e-14);
  CHECK(rel(g1.a12, kE - 1.0) < 1e-14);
  CHECK(rel(g1.a21, kE - 1.0) < 1e-14);
  CHECK(g1.a22 == cplx(1.0));

  for (int m = 0; m < 4; ++m) {
    const Mat2 g = G_matrix(m, cplx(0.0, 3.7));
    CHECK(std::abs(g.a11 - 1.0 / (m + 1)) < 1e-15);
    CHECK(g.a22 == cplx(1.0 / (m + 1)));
    CHECK(g.a12 == std::conj(g.a21));
  }
}

TEST_CASE("strict Cauchy-Schwarz and positive det G off the origin") {
  for (int m = 0; m <= 5; ++m) {
    CHECK(G_matrix(m, 0.0).det() == cplx(0.0));
    for (double r = 0.01; r <= 10.0; r *= 1.25)
      for (double a = 0.0; a < 2 * kPi; a += 0.3) {
        const cplx x = std::polar(r, a);
        const double lhs = (eval_F(m, x) * eval_F(m, std::conj(x))).real();
        const double rhs = (eval_F(m, 0.0) * eval_F(m, x + std::conj(x))).real();
        CHECK(lhs < rhs);
        const Mat2 g = G_matrix(m, x);
        CHECK(g.det().real() > 0.0);
        CHECK(std::abs(g.a12 - std::conj(g.a21)) == 0.0);
      }
  }
}

TEST_CASE("Q matrix") {
  const Mat2 q = Q_matrix(0, 0.8);
  for (cplx v : {q.a11, q.a12, q.a21, q.a22}) CHECK(v.imag() == 0.0);

  const Mat2 q1 = Q_matrix(0, 1.0);
  const auto ref = oracle::Q(0, 1.0);
  CHECK(std::abs(q1.a11 - ref(0, 0)) < 1e-10);
  CHECK(std::abs(q1.a12 - ref(0, 1)) < 1e-10);
  CHECK(std::abs(q1.a21 - ref(1, 0)) < 1e-10);
  CHECK(std::abs(q1.a22 - ref(1, 1)) < 1e-10);

  const Mat2 qh = Q_matrix(1, cplx(0.5, 0.0));
  CHECK(std::abs(qh.a21 - std::conj(qh.a12)) < 1e-14);
  const Mat2 qc = Q_matrix(1, cplx(0.3, 1.9));
  CHECK(std::abs(qc.a21 - std::conj(qc.a12)) < 1e-12 * std::abs(qc.a12));

  CHECK_THROWS_AS(Q_matrix(0, 1e-9), Error);
  try {
    Q_matrix(1, cplx(0.0, 5e-9));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate);
  }
}

TEST_CASE("perm2") {
  CHECK(perm2({1.0, 0.0, 0.0, 1.0}) == cplx(1.0));
  CHECK(perm2({1.0, 2.0, 3.0, 4.0}) == cplx(10.0));
  CHECK(perm2({cplx(2.0, 1.0), 0.0, 0.0, cplx(0.5, -3.0)}) == cplx(2.0, 1.0) * cplx(0.5, -3.0));
}

TEST_CASE("density limit") {
  const LimitGeometry unit{1.0, 1.0, 1.0};
  CHECK(std::abs(density_limit(0, unit, 0.0) - 1.0 / (12 * kPi)) < 1e-15);
  CHECK(std::abs(density_limit(1, unit, 0.0) - 1.0 / (18 * kPi)) < 1e-15);
  // Depends on beta(u) only through its real part.
  CHECK(density_limit(1, unit, cplx(0.7, 2.0)) == density_limit(1, unit, cplx(0.7, -5.0)));
  for (double x : {-5.0, -1.0, 0.0, 2.0, 9.0}) CHECK(density_limit(2, unit, x) > 0.0);
  // Prefactor is (t0 ||P||)^2.
  const LimitGeometry scaled{0.5, 8.0, 4.0};
  CHECK(std::abs(density_limit(1, scaled, 0.3) - 2.0 * density_limit(1, unit, 0.3)) < 1e-15);
}

TEST_CASE("pair limit matches the dense-algebra oracle") {
  const LimitGeometry unit{1.0, 1.0, 1.0};
  for (int m : {0, 1, 2})
    for (cplx b : {cplx(0.2), cplx(2.0), cplx(20.0), cplx(0.0, 1.0), cplx(0.0, 13.0), cplx(-1.5, 2.5)}) {
      const auto p = pair_limit(m, unit, b);
      CHECK(std::abs(p.K_tilde_inf - oracle::K_tilde(m, b)) <= 1e-8 * std::abs(p.K_tilde_inf));
      // K and K_tilde differ by the product of limit densities.
      const double d = density_limit(m, unit, b) * density_limit(m, unit, 0.0);
      CHECK(std::abs(p.K_inf - p.K_tilde_inf * d) <= 1e-12 * p.K_inf);
    }
}

TEST_CASE("pair limit along the sphere normal tends to 1 with repulsion at 0") {
  const LimitGeometry unit{1.0, 1.0, 1.0};
  CHECK(pair_limit(1, unit, 0.2).K_tilde_inf < 1.0);
  double prev = 0.0;
  // Up to 2 Re beta near the exp overflow threshold.
  for (double l = 5.0; l <= 345.0; l += 5.0) {
    const double k = pair_limit(1, unit, l).K_tilde_inf;
    REQUIRE(std::isfinite(k));
    CHECK(k > prev);
    CHECK(k < 1.0);
    prev = k;
  }
  CHECK(std::abs(pair_limit(1, unit, 100.0).K_tilde_inf - 1.0) < 0.01);
}

TEST_CASE("pair limit along the angular direction oscillates") {
  const LimitGeometry unit{1.0, 1.0, 1.0};
  int changes = 0;
  double prev = pair_limit(1, unit, cplx(0.0, 0.1)).K_tilde_inf - 1.0;
  for (int k = 2; k <= 300; ++k) {
    const double v = pair_limit(1, unit, cplx(0.0, 0.1 * k)).K_tilde_inf - 1.0;
    if ((v > 0) != (prev > 0)) ++changes;
    prev = v;
  }
  CHECK(changes >= 3);
}

TEST_CASE("pair limit depends on u only through beta(u)") {
  const LimitGeometry g{1.0, 1.0, 1.0};
  const auto a = pair_limit(1, g, cplx(1.3, -0.4));
  const auto b = pair_limit(1, g, cplx(1.3, -0.4));
  CHECK(a.K_inf == b.K_inf);
  CHECK(a.K_tilde_inf == b.K_tilde_inf);
  CHECK_THROWS_AS(pair_limit(1, g, 0.0), Error);
}

}  // TEST_SUITE
