#pragma once

// Finite-N zero statistics from the Kac-Rice formula.
//
// The Gaussian field f = sum a_J z^J / sqrt(n_J) has covariance S_N. At a
// point x, with A = S_N(x, x), B_j = d/d conj(w_j) S_N(x, x) and
// C_ij = d^2/dz_i d conj(w_j) S_N(x, x), the conditional derivative covariance
// is Lambda = C - B^* A^{-1} B and the zero density is tr(Lambda) / (pi A).
// Two points stack the same blocks 2x2.

#include <span>
#include <vector>

#include "rzl/geometry.hpp"
#include "rzl/szego.hpp"
#include "rzl/types.hpp"

namespace rzl::kacrice {

struct OnePointBlocks {
  double A;
  CVec B;
  CMat C;
  CMat Lambda;
};

struct TwoPointBlocks {
  CMat A;       // 2 x 2
  CMat B;       // 2 x 2(m+1)
  CMat C;       // 2(m+1) x 2(m+1)
  CMat Lambda;  // 2(m+1) x 2(m+1)

  /// (m+1) x (m+1) block (a, b) of Lambda, a, b in {0, 1}.
  CMat lambda_block(int a, int b) const;
};

/// Blocks at x = z + u/N using degree-N kernels.
OnePointBlocks one_point_blocks(const szego::NormTable& table, std::span<const cplx> x, int N);

/// Blocks for the points (x1, x2).
TwoPointBlocks two_point_blocks(const szego::NormTable& table, std::span<const cplx> x1,
                                std::span<const cplx> x2, int N);

/// Expected zero density D^N at z + u/N.
double density_N(const szego::NormTable& table, std::span<const cplx> z, std::span<const cplx> u,
                 int N);

struct PairCorrelation {
  double K_N;
  double K_tilde_N;
};

/// Pair correlation between z + u/N and z. Requires |beta(u)| >= kTolBeta.
PairCorrelation pair_N(const szego::NormTable& table, const geometry::GeometryJet& jet,
                       std::span<const cplx> z, std::span<const cplx> u, int N);

/// Pair correlation K^N(x1, x2) for two explicit points, normalized by the
/// one-point densities at x1 and x2.
PairCorrelation pair_at(const szego::NormTable& table, std::span<const cplx> x1,
                        std::span<const cplx> x2, int N);

enum class Study { density, pair };

struct ConvergenceRow {
  int N;
  double D_scaled;  // D^N(z + u/N) / N^2
  double K_scaled;  // K^N / N^4 (NaN for density studies)
  double K_tilde;   // (NaN for density studies)
  double err_D;     // relative to the scaling limit
  double err_K;     // relative error of K_scaled (NaN for density studies)
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double D_limit;
  double K_limit;        // NaN for density studies
  double K_tilde_limit;  // NaN for density studies
  double rate_D;         // least-squares slope of log err_D against log N
  double rate_K;         // same for err_K (NaN for density studies)
  bool flagged;          // error at the largest N above 10%
};

/// Finite-N statistics over N_list (ascending, >= 3 entries) against the limits.
ConvergenceTable convergence_table(const szego::NormTable& table, const geometry::GeometryJet& jet,
                                   std::span<const cplx> z, std::span<const cplx> u,
                                   std::span<const int> N_list, Study study);

/// Least-squares slope of log(err) against log(N), skipping non-positive errors.
double fitted_rate(std::span<const int> N, std::span<const double> err);

}  // namespace rzl::kacrice
