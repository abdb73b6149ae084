#pragma once

// Monte Carlo zeros for m = 0: Gaussian random polynomials in the orthonormal
// basis z^k / sqrt(n_k), their roots, and a histogram of the rescaled zeros
// u = N (zeta - z) near a boundary point z.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rzl/szego.hpp"
#include "rzl/types.hpp"

namespace rzl::montecarlo {

/// Counter-based stream: the k-th draw is a hash of (key, k), so a trial's
/// numbers depend only on the master seed and the trial number.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  /// Uniform on (0, 1).
  double uniform();
  /// Standard complex Gaussian: independent N(0, 1/2) parts, E|a|^2 = 1.
  cplx complex_gaussian();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Coefficients c_k = a_k / sqrt(n_k), k = 0..N, with a_k standard complex Gaussian.
CVec sample_poly(const szego::NormTable& table, int N, Stream& rng);

/// All roots of sum c_k z^k. Throws accuracy if any root misses the residual
/// gate |p(r)| <= 1e-8 max|c_k| max(1, |r|)^d after polishing.
CVec find_roots(std::span<const cplx> coeffs);

/// p(z) by Horner's rule, coefficients in ascending order.
cplx horner(std::span<const cplx> coeffs, cplx z);

struct Window {
  double re_min = -4.5, re_max = 4.5;
  double im_min = -4.5, im_max = 4.5;
};

struct EnsembleConfig {
  int N = 100;
  int trials = 10000;
  std::uint64_t seed = 1;
  Window window;
  int bins_re = 9, bins_im = 9;
  double max_abs_u = 10.0;
};

/// Throws precondition unless the config is usable.
void validate(const EnsembleConfig& cfg);

struct Bin {
  cplx center;
  std::int64_t count = 0;
  double empirical = 0.0;  // count / (trials * area)
  double predicted = 0.0;  // bin average of D^inf
  double std_error = 0.0;  // sqrt(expected count) / (trials * area)
  double z_score = 0.0;
};

/// Bins are laid out row-major over (im, re); the coordinate is the rotated
/// rescaling w = N (zeta - z) conj(z) / |z|, which is u itself at z = 1.
struct DensityHistogram {
  int bins_re = 0, bins_im = 0;
  Window window;
  std::vector<Bin> bins;
  int trials_used = 0;
  int trials_discarded = 0;
  std::int64_t total_roots = 0;
  std::int64_t in_window = 0;

  const Bin& at(int i_re, int i_im) const { return bins[std::size_t(i_im * bins_re + i_re)]; }
  double mean_roots_per_trial() const { return trials_used ? double(total_roots) / trials_used : 0.0; }
  /// Bin containing w = 0, or -1.
  int central_bin() const;
  double fraction_within(double z) const;
};

DensityHistogram estimate_density(const EnsembleConfig& cfg, const szego::NormTable& table,
                                  cplx z);

/// `re_u,im_u,count,empirical,predicted,z_score`.
void write_histogram_csv(std::ostream& os, const DensityHistogram& h);

}  // namespace rzl::montecarlo
