#pragma once

// Scaling-limit calculus for zeros of random polynomials on Reinhardt domains.
//
// Every limit covariance near a strictly pseudoconvex boundary point reduces to
// the model function
//
//     F_m(t) = \int_0^1 e^{t y} y^m dy,
//
// evaluated at combinations of beta(u), the weighted average of u_i / z_i.
// The 2x2 matrices G_m and Q_m package the two-point covariance and its Schur
// complement, from which the limiting density and pair correlation follow.

#include <array>

#include "rzl/types.hpp"

namespace rzl::limits {

/// Plain 2x2 complex matrix, row-major: {a11, a12, a21, a22}.
struct Mat2 {
  cplx a11{}, a12{}, a21{}, a22{};

  cplx det() const { return a11 * a22 - a12 * a21; }
  Mat2 inverse() const;
  friend Mat2 operator*(const Mat2& x, const Mat2& y);
  friend Mat2 operator-(const Mat2& x, const Mat2& y);
};

/// Geometric data at a boundary point that the limits depend on.
struct LimitGeometry {
  cplx t0;           // 1 / (d'rho(z) . z)
  double P_norm_sq;  // ||P||^2, P = d''rho(z)
  cplx beta_of_P;    // beta(P), which equals t0 * ||P||^2
};

inline constexpr int kMaxOrder = 64;

/// F_m(t) to ~1e-13 relative. Series for |t| < 1, three-term recurrence
/// F_m = (e^t - m F_{m-1}) / t elsewhere, run in whichever direction is stable.
cplx eval_F(int m, cplx t);

/// All of F_0(t) .. F_mmax(t) in one pass.
std::vector<cplx> eval_F_all(int mmax, cplx t);

/// (log F_m)''(s) = (F_{m+2} F_m - F_{m+1}^2) / F_m^2, using F_m' = F_{m+1}.
cplx log_F_dd(int m, cplx s);

/// [[F_m(x + conj x), F_m(x)], [F_m(conj x), F_m(0)]].
Mat2 G_matrix(int m, cplx x);

/// G_{m+2}(x) - G_{m+1}(x) G_m(x)^{-1} G_{m+1}(x). Rejects |x| < kTolBeta.
Mat2 Q_matrix(int m, cplx x);

/// Permanent a11 a22 + a12 a21.
cplx perm2(const Mat2& M);

/// D^inf(u) = ((t0 ||P||)^2 / pi) (log F_m)''(2 Re beta(u)).
double density_limit(int m, const LimitGeometry& geom, cplx beta_u);

struct PairLimit {
  double K_inf;        // lim K^N(z + u/N, z) / N^4
  double K_tilde_inf;  // normalized pair correlation
};

/// Scaling limit of the two-point correlation at separation u/N, given beta(u).
PairLimit pair_limit(int m, const LimitGeometry& geom, cplx beta_u);

}  // namespace rzl::limits
