#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rzl/error.hpp"
#include "rzl/montecarlo.hpp"

using namespace rzl;
using namespace rzl::montecarlo;
using geometry::RadialProfile;

namespace {

CVec expand(const std::vector<cplx>& roots) {
  CVec c{1.0};
  for (auto r : roots) {
    CVec next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = next;
  }
  return c;
}

double nearest(const CVec& roots, cplx r) {
  double best = 1e300;
  for (auto v : roots) best = std::min(best, std::abs(v - r));
  return best;
}

}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("streams are deterministic and independent") {
  Stream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  bool differs_c = false, differs_d = false;
  for (int k = 0; k < 100; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs_c |= x != c.next_u64();
    differs_d |= x != d.next_u64();
  }
  CHECK(differs_c);
  CHECK(differs_d);
  const auto table = szego::compute_norms(RadialProfile::circle(), 20);
  Stream s1(42, 0), s2(42, 0);
  CHECK(sample_poly(table, 20, s1) == sample_poly(table, 20, s2));
}

TEST_CASE("uniform and gaussian moments") {
  Stream s(1, 0);
  double su = 0, sa = 0, sr = 0, si = 0;
  cplx mean = 0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const double u = s.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    su += u;
    const cplx a = s.complex_gaussian();
    sa += std::norm(a);
    sr += a.real() * a.real();
    si += a.imag() * a.imag();
    mean += a;
  }
  CHECK(std::abs(su / n - 0.5) < 0.01);
  CHECK(sa / n >= 0.97);
  CHECK(sa / n <= 1.03);
  CHECK(std::abs(sr / n - 0.5) < 0.03);
  CHECK(std::abs(si / n - 0.5) < 0.03);
  CHECK(std::abs(mean / double(n)) < 0.03);
}

TEST_CASE("coefficients are scaled by the norms") {
  const auto circle = szego::compute_norms(RadialProfile::circle(), 10);
  const auto wide = szego::compute_norms(RadialProfile::ellipsoid({0.25}), 10);
  Stream a(9, 1), b(9, 1), g(9, 1);
  const auto c = sample_poly(circle, 10, a);
  const auto w = sample_poly(wide, 10, b);
  for (int k = 0; k <= 10; ++k) {
    const cplx x = g.complex_gaussian();
    CHECK(c[k] == x);
    CHECK(std::abs(w[k] - x / std::pow(2.0, k)) < 1e-15 * std::abs(x));
  }
  const auto sphere = szego::compute_norms(RadialProfile::sphere(1), 4);
  CHECK_THROWS_AS(sample_poly(sphere, 4, a), Error);
}

TEST_CASE("root finder examples") {
  const CVec quad{-1.0, 0.0, 1.0};
  const auto r = find_roots(quad);
  REQUIRE(r.size() == 2);
  CHECK(nearest(r, 1.0) < 1e-12);
  CHECK(nearest(r, -1.0) < 1e-12);

  const std::vector<cplx> f{0.5, 2.0, -1.0};
  const auto r3 = find_roots(expand(f));
  REQUIRE(r3.size() == 3);
  for (auto v : f) CHECK(nearest(r3, v) < 1e-10);

  // Trailing zeros lower the degree.
  const CVec padded{-1.0, 0.0, 1.0, 0.0, 1e-320};
  CHECK(find_roots(padded).size() == 2);
  const CVec zero{0.0, 0.0};
  CHECK_THROWS_AS(find_roots(zero), Error);
}

TEST_CASE("expand and solve round trip") {
  Stream s(5, 0);
  for (int k = 0; k < 20; ++k) {
    std::vector<cplx> roots;
    for (int j = 0; j < 8; ++j) roots.push_back(2.0 * s.complex_gaussian());
    const auto found = find_roots(expand(roots));
    for (auto v : roots) CHECK(nearest(found, v) < 1e-8);
  }
}

TEST_CASE("degree 50 residual gate") {
  const auto table = szego::compute_norms(RadialProfile::circle(), 50);
  int pass = 0;
  for (int t = 0; t < 100; ++t) {
    Stream s(11, std::uint64_t(t));
    const auto c = sample_poly(table, 50, s);
    try {
      const auto r = find_roots(c);
      double cmax = 0.0;
      for (auto v : c) cmax = std::max(cmax, std::abs(v));
      bool ok = r.size() == 50;
      for (auto v : r) ok &= std::abs(horner(c, v)) <= 1e-8 * cmax * std::pow(std::max(1.0, std::abs(v)), 50);
      pass += ok;
    } catch (const Error&) {
    }
  }
  CHECK(pass >= 99);
}

TEST_CASE("config validation") {
  EnsembleConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.trials = 99;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = {};
  cfg.window.re_max = 11.0;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = {};
  cfg.bins_re = 0;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = {};
  cfg.window.im_min = cfg.window.im_max;
  CHECK_THROWS_AS(validate(cfg), Error);
}

TEST_CASE("circle histogram") {
  const auto table = szego::compute_norms(RadialProfile::circle(), 100);
  EnsembleConfig cfg;
  cfg.trials = 2000;
  cfg.seed = 2024;
  const auto h = estimate_density(cfg, table, 1.0);
  CHECK(h.trials_used + h.trials_discarded == cfg.trials);
  CHECK(h.trials_discarded <= cfg.trials / 100);
  CHECK(h.mean_roots_per_trial() == 100.0);
  std::int64_t sum = 0;
  for (const auto& b : h.bins) sum += b.count;
  CHECK(sum == h.in_window);

  const int c = h.central_bin();
  REQUIRE(c >= 0);
  const auto& mid = h.bins[std::size_t(c)];
  CHECK(std::abs(mid.center) < 1e-12);
  CHECK(std::abs(mid.predicted * 12 * kPi - 1.0) < 0.05);
  CHECK(std::abs(mid.z_score) < 3.0);
  CHECK(h.fraction_within(3.0) >= 0.9);

  // Conjugate bins agree statistically.
  for (int i = 0; i < h.bins_re; ++i)
    for (int j = 0; j < h.bins_im / 2; ++j) {
      const auto& a = h.at(i, j);
      const auto& b = h.at(i, h.bins_im - 1 - j);
      CHECK(std::abs(a.center - std::conj(b.center)) < 1e-12);
      const double se = std::hypot(a.std_error, b.std_error);
      CHECK(std::abs(a.empirical - b.empirical) < 3.5 * se);
    }
}

TEST_CASE("histogram is reproducible and rotation invariant") {
  const auto table = szego::compute_norms(RadialProfile::circle(), 60);
  EnsembleConfig cfg;
  cfg.N = 60;
  cfg.trials = 400;
  cfg.bins_re = cfg.bins_im = 3;
  const auto a = estimate_density(cfg, table, 1.0);
  const auto b = estimate_density(cfg, table, 1.0);
  std::ostringstream sa, sb;
  write_histogram_csv(sa, a);
  write_histogram_csv(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("re_u,im_u,count,empirical,predicted,z_score\n", 0) == 0);

  const auto r = estimate_density(cfg, table, std::polar(1.0, 0.7));
  for (std::size_t k = 0; k < a.bins.size(); ++k) {
    const double se = std::hypot(a.bins[k].std_error, r.bins[k].std_error);
    CHECK(std::abs(a.bins[k].empirical - r.bins[k].empirical) < 3.5 * se);
  }
}

TEST_CASE("doubling N moves the histogram only slightly") {
  EnsembleConfig cfg;
  cfg.trials = 500;
  cfg.bins_re = cfg.bins_im = 3;
  const auto h100 = estimate_density(cfg, szego::compute_norms(RadialProfile::circle(), 100), 1.0);
  cfg.N = 200;
  const auto h200 = estimate_density(cfg, szego::compute_norms(RadialProfile::circle(), 200), 1.0);
  for (std::size_t k = 0; k < h100.bins.size(); ++k) {
    const double se = std::hypot(h100.bins[k].std_error, h200.bins[k].std_error);
    const double drift = std::abs(h100.bins[k].empirical - h200.bins[k].empirical);
    CHECK(drift < 3.5 * se + 2.0 / 100 * h100.bins[k].predicted);
  }
}

TEST_CASE("preconditions") {
  EnsembleConfig cfg;
  cfg.trials = 100;
  const auto sphere = szego::compute_norms(RadialProfile::sphere(1), 100);
  CHECK_THROWS_AS(estimate_density(cfg, sphere, 1.0), Error);
  const auto circle = szego::compute_norms(RadialProfile::circle(), 100);
  CHECK_THROWS_AS(estimate_density(cfg, circle, 1.3), Error);
  cfg.N = 150;
  CHECK_THROWS_AS(estimate_density(cfg, circle, 1.0), Error);
}

}  // TEST_SUITE
