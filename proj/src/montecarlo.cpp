#include "rzl/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "rzl/error.hpp"
#include "rzl/format.hpp"
#include "rzl/geometry.hpp"
#include "rzl/limits.hpp"
#include "rzl/parallel.hpp"

namespace rzl::montecarlo {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace

Stream::Stream(std::uint64_t seed, std::uint64_t stream_id)
    : key_(mix64(seed + 0x9e3779b97f4a7c15ULL) ^ mix64(stream_id * 0xd1b54a32d192ed03ULL + 1)) {}

std::uint64_t Stream::next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

double Stream::uniform() { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

cplx Stream::complex_gaussian() {
  // Box-Muller; radius drawn so that E|a|^2 = 1.
  const double r = std::sqrt(-std::log(uniform()));
  const double theta = 2.0 * kPi * uniform();
  return {r * std::cos(theta), r * std::sin(theta)};
}

CVec sample_poly(const szego::NormTable& table, int N, Stream& rng) {
  if (table.m() != 0) throw Error(ErrorKind::precondition, "sample_poly: needs an m = 0 table");
  if (N < 1 || N > table.N()) throw Error(ErrorKind::precondition, "sample_poly: N outside [1, table degree]");
  CVec c(std::size_t(N + 1));
  const auto n = table.norms();
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = rng.complex_gaussian() / std::sqrt(n[k]);
  return c;
}

cplx horner(std::span<const cplx> coeffs, cplx z) {
  cplx p{};
  for (std::size_t k = coeffs.size(); k-- > 0;) p = p * z + coeffs[k];
  return p;
}

namespace {

struct Eval {
  cplx p, dp;
};

Eval horner_d(std::span<const cplx> c, cplx z) {
  cplx p{}, dp{};
  for (std::size_t k = c.size(); k-- > 0;) {
    dp = dp * z + p;
    p = p * z + c[k];
  }
  return {p, dp};
}

bool passes_gate(std::span<const cplx> c, cplx r, double cmax) {
  const int d = int(c.size()) - 1;
  return std::abs(horner(c, r)) <= 1e-8 * cmax * std::pow(std::max(1.0, std::abs(r)), d);
}

// One Newton step, kept only if it lowers the residual.
void polish(std::span<const cplx> c, cplx& r) {
  const auto e = horner_d(c, r);
  if (e.dp == 0.0) return;
  const cplx cand = r - e.p / e.dp;
  if (std::abs(horner(c, cand)) < std::abs(e.p)) r = cand;
}

bool aberth(std::span<const cplx> c, CVec& z) {
  const int d = int(c.size()) - 1;
  const double radius = std::pow(std::abs(c[0]) / std::abs(c[std::size_t(d)]), 1.0 / d);
  z.resize(std::size_t(d));
  for (int k = 0; k < d; ++k) z[std::size_t(k)] = std::polar(radius, 2.0 * kPi * k / d + 0.4);
  std::vector<bool> done(std::size_t(d), false);
  for (int it = 0; it < 500; ++it) {
    bool all = true;
    for (int i = 0; i < d; ++i) {
      if (done[std::size_t(i)]) continue;
      const cplx zi = z[std::size_t(i)];
      const auto e = horner_d(c, zi);
      if (e.p == 0.0) {
        done[std::size_t(i)] = true;
        continue;
      }
      const cplx ratio = e.p / e.dp;
      cplx repulse{};
      for (int j = 0; j < d; ++j)
        if (j != i) repulse += 1.0 / (zi - z[std::size_t(j)]);
      const cplx step = ratio / (1.0 - ratio * repulse);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return false;
      z[std::size_t(i)] = zi - step;
      if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(zi)))
        done[std::size_t(i)] = true;
      else
        all = false;
    }
    if (all) return true;
  }
  return false;
}

CVec companion_roots(std::span<const cplx> c) {
  const int d = int(c.size()) - 1;
  CMat comp = CMat::Zero(d, d);
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -c[std::size_t(i)] / c[std::size_t(d)];
  const Eigen::ComplexEigenSolver<CMat> eig(comp, false);
  CVec out(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) out[std::size_t(i)] = eig.eigenvalues()(i);
  return out;
}

}  // namespace

CVec find_roots(std::span<const cplx> coeffs) {
  std::size_t hi = coeffs.size();
  while (hi > 0 && std::abs(coeffs[hi - 1]) < 1e-300) --hi;
  if (hi == 0) throw Error(ErrorKind::precondition, "find_roots: zero polynomial");
  std::size_t lo = 0;
  while (std::abs(coeffs[lo]) == 0.0) ++lo;  // exact zero roots
  const auto c = coeffs.subspan(lo, hi - lo);
  CVec roots(lo, cplx{});
  if (c.size() <= 1) return roots;

  double cmax = 0.0;
  for (const auto& v : c) cmax = std::max(cmax, std::abs(v));
  const auto all_pass = [&](CVec& z) {
    for (auto& r : z) polish(c, r);
    return std::all_of(z.begin(), z.end(), [&](cplx r) { return passes_gate(c, r, cmax); });
  };

  CVec z;
  if (!(aberth(c, z) && all_pass(z))) {
    z = companion_roots(c);
    if (!all_pass(z)) throw Error(ErrorKind::accuracy, "find_roots: residual gate failed after polishing");
  }
  roots.insert(roots.end(), z.begin(), z.end());
  return roots;
}

void validate(const EnsembleConfig& cfg) {
  const auto fail = [](const char* why) { throw Error(ErrorKind::precondition, why); };
  if (cfg.N < 1) fail("ensemble: N must be positive");
  if (cfg.trials < 100) fail("ensemble: need at least 100 trials");
  if (cfg.bins_re < 1 || cfg.bins_im < 1) fail("ensemble: bin counts must be positive");
  const auto& w = cfg.window;
  if (!(w.re_min < w.re_max) || !(w.im_min < w.im_max)) fail("ensemble: empty window");
  for (double re : {w.re_min, w.re_max})
    for (double im : {w.im_min, w.im_max})
      if (!(std::abs(cplx(re, im)) <= cfg.max_abs_u)) fail("ensemble: window exceeds max |u|");
}

int DensityHistogram::central_bin() const {
  const int ir = int(std::floor(-window.re_min / (window.re_max - window.re_min) * bins_re));
  const int ii = int(std::floor(-window.im_min / (window.im_max - window.im_min) * bins_im));
  if (ir < 0 || ir >= bins_re || ii < 0 || ii >= bins_im) return -1;
  return ii * bins_re + ir;
}

double DensityHistogram::fraction_within(double z) const {
  if (bins.empty()) return 0.0;
  const auto n = std::count_if(bins.begin(), bins.end(), [z](const Bin& b) { return std::abs(b.z_score) < z; });
  return double(n) / double(bins.size());
}

DensityHistogram estimate_density(const EnsembleConfig& cfg, const szego::NormTable& table,
                                  cplx z) {
  validate(cfg);
  if (table.m() != 0) throw Error(ErrorKind::precondition, "estimate_density: needs an m = 0 table");
  if (cfg.N > table.N()) throw Error(ErrorKind::precondition, "estimate_density: N exceeds table degree");
  const double r = std::abs(z);
  if (!(r > 0.0)) throw Error(ErrorKind::precondition, "estimate_density: z = 0");
  // Any torus-invariant measure on a circle of radius r has n_k proportional to r^{2k}.
  const double n_ratio = table.norms()[1] / table.norms()[0];
  if (std::abs(n_ratio - r * r) > 1e-9 * r * r)
    throw Error(ErrorKind::precondition, "estimate_density: z is not on the table's circle");

  const auto profile = geometry::RadialProfile::ellipsoid({1.0 / (r * r)});
  const auto pt = geometry::project_to_boundary(profile, {z});
  const auto jet = geometry::geometry_jet(profile, pt);
  const auto geom = geometry::limit_geometry(jet);
  const cplx phase = z / r;

  DensityHistogram h;
  h.bins_re = cfg.bins_re;
  h.bins_im = cfg.bins_im;
  h.window = cfg.window;
  const auto& win = cfg.window;
  const double dre = (win.re_max - win.re_min) / cfg.bins_re;
  const double dim = (win.im_max - win.im_min) / cfg.bins_im;
  const double area = dre * dim;
  h.bins.resize(std::size_t(cfg.bins_re * cfg.bins_im));
  for (int ii = 0; ii < cfg.bins_im; ++ii) {
    for (int ir = 0; ir < cfg.bins_re; ++ir) {
      auto& b = h.bins[std::size_t(ii * cfg.bins_re + ir)];
      b.center = {win.re_min + (ir + 0.5) * dre, win.im_min + (ii + 0.5) * dim};
      constexpr int sub = 4;
      double acc = 0.0;
      for (int a = 0; a < sub; ++a)
        for (int c = 0; c < sub; ++c) {
          const cplx w{win.re_min + (ir + (a + 0.5) / sub) * dre, win.im_min + (ii + (c + 0.5) / sub) * dim};
          const cplx u = w * phase;
          acc += limits::density_limit(0, geom, geometry::beta(jet, std::span<const cplx>(&u, 1)));
        }
      b.predicted = acc / (sub * sub);
    }
  }

  // Fixed chunking keeps every trial on its own stream regardless of threads.
  constexpr int kChunks = 64;
  struct Partial {
    std::vector<std::int64_t> counts;
    std::int64_t roots = 0, in_window = 0;
    int used = 0, discarded = 0;
  };
  std::vector<Partial> parts(kChunks);
  const int N = cfg.N;
  parallel_for(kChunks, [&](std::size_t chunk) {
    auto& part = parts[chunk];
    part.counts.assign(h.bins.size(), 0);
    for (int t = int(chunk); t < cfg.trials; t += kChunks) {
      Stream rng(cfg.seed, std::uint64_t(t));
      const auto coeffs = sample_poly(table, N, rng);
      CVec roots;
      try {
        roots = find_roots(coeffs);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::accuracy) throw;
        ++part.discarded;
        continue;
      }
      ++part.used;
      part.roots += std::int64_t(roots.size());
      for (const auto& zeta : roots) {
        const cplx w = double(N) * (zeta - z) * std::conj(phase);
        const int ir = int(std::floor((w.real() - win.re_min) / dre));
        const int ii = int(std::floor((w.imag() - win.im_min) / dim));
        if (ir < 0 || ir >= cfg.bins_re || ii < 0 || ii >= cfg.bins_im) continue;
        ++part.counts[std::size_t(ii * cfg.bins_re + ir)];
        ++part.in_window;
      }
    }
  });

  for (const auto& part : parts) {
    for (std::size_t k = 0; k < h.bins.size(); ++k) h.bins[k].count += part.counts[k];
    h.total_roots += part.roots;
    h.in_window += part.in_window;
    h.trials_used += part.used;
    h.trials_discarded += part.discarded;
  }
  const double norm = double(h.trials_used) * area;
  for (auto& b : h.bins) {
    b.empirical = double(b.count) / norm;
    b.std_error = std::sqrt(std::max(b.predicted * norm, 1.0)) / norm;
    b.z_score = (b.empirical - b.predicted) / b.std_error;
  }
  return h;
}

void write_histogram_csv(std::ostream& os, const DensityHistogram& h) {
  os << "re_u,im_u,count,empirical,predicted,z_score\n";
  for (const auto& b : h.bins)
    os << fmt17(b.center.real()) << ',' << fmt17(b.center.imag()) << ',' << b.count << ','
       << fmt17(b.empirical) << ',' << fmt17(b.predicted) << ',' << fmt17(b.z_score) << '\n';
}

}  // namespace rzl::montecarlo
