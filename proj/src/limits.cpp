#include "rzl/limits.hpp"

#include <cmath>
#include <string>

#include "rzl/error.hpp"

namespace rzl::limits {

Mat2 Mat2::inverse() const {
  const cplx d = det();
  return {a22 / d, -a12 / d, -a21 / d, a11 / d};
}

Mat2 operator*(const Mat2& x, const Mat2& y) {
  return {x.a11 * y.a11 + x.a12 * y.a21, x.a11 * y.a12 + x.a12 * y.a22,
          x.a21 * y.a11 + x.a22 * y.a21, x.a21 * y.a12 + x.a22 * y.a22};
}

Mat2 operator-(const Mat2& x, const Mat2& y) {
  return {x.a11 - y.a11, x.a12 - y.a12, x.a21 - y.a21, x.a22 - y.a22};
}

namespace {

// Power series sum_k t^k / (k! (m + k + 1)); only used for |t| < 1 where the
// terms fall off faster than 1/k!.
void series_small(int mmax, cplx t, std::vector<cplx>& out) {
  std::vector<cplx> coef;  // t^k / k!
  cplx c{1.0, 0.0};
  for (int k = 0; k < 64; ++k) {
    coef.push_back(c);
    c *= t / double(k + 1);
    if (std::abs(c) < 1e-19) break;
  }
  for (int m = 0; m <= mmax; ++m) {
    cplx sum{};
    for (std::size_t k = 0; k < coef.size(); ++k) {
      const cplx term = coef[k] / double(m + int(k) + 1);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    out[m] = sum;
  }
}

// F_M(t) e^{-t} = sum_k (-t)^k M! / (M + k + 1)!, geometric with ratio < 1/2
// once M >= 2|t|, and free of cancellation.
cplx shifted_series(int M, cplx t) {
  cplx term = 1.0 / double(M + 1);
  cplx sum = term;
  for (int k = 1; k < 400; ++k) {
    term *= -t / double(M + k + 1);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

void eval_upper_half(int mmax, cplx t, std::vector<cplx>& out) {
  const double r = std::abs(t);
  if (r < 1.0) {
    series_small(mmax, t, out);
    return;
  }
  const cplx et = std::exp(t);
  // Error amplification of the forward step k is k/|t|: forward is stable up
  // to k = |t|, backward above it.
  const int kstar = std::min(mmax, int(std::floor(r)));
  out[0] = (et - 1.0) / t;
  for (int k = 1; k <= kstar; ++k) out[k] = (et - double(k) * out[k - 1]) / t;
  if (kstar == mmax) return;

  const int M = std::max(mmax, int(std::ceil(2.0 * r)) + 1);
  cplx f = et * shifted_series(M, t);
  if (M == mmax) out[M] = f;
  for (int k = M; k > kstar + 1; --k) {
    f = (et - t * f) / double(k);
    if (k - 1 <= mmax) out[k - 1] = f;
  }
}

void check_args(int mmax, cplx t) {
  if (!std::isfinite(t.real()) || !std::isfinite(t.imag()))
    throw Error(ErrorKind::domain, "F_m: non-finite argument");
  if (mmax < 0 || mmax > kMaxOrder + 2)
    throw Error(ErrorKind::domain, "F_m: order out of range: " + std::to_string(mmax));
  if (t.real() > 700.0) throw Error(ErrorKind::domain, "F_m: Re t too large, e^t overflows");
}

}  // namespace

std::vector<cplx> eval_F_all(int mmax, cplx t) {
  check_args(mmax, t);
  std::vector<cplx> out(mmax + 1);
  // Evaluate in the closed upper half plane; F_m(conj t) = conj F_m(t) then
  // holds exactly.
  if (t.imag() < 0.0) {
    eval_upper_half(mmax, std::conj(t), out);
    for (auto& v : out) v = std::conj(v);
  } else {
    eval_upper_half(mmax, t, out);
  }
  return out;
}

cplx eval_F(int m, cplx t) { return eval_F_all(m, t)[m]; }

cplx log_F_dd(int m, cplx s) {
  const auto f = eval_F_all(m + 2, s);
  if (std::abs(f[m]) < 1e-300) throw Error(ErrorKind::singularity, "(log F_m)'': F_m vanishes");
  const cplx r1 = f[m + 1] / f[m];
  return f[m + 2] / f[m] - r1 * r1;
}

Mat2 G_matrix(int m, cplx x) {
  const cplx fx = eval_F(m, x);
  return {eval_F(m, 2.0 * x.real()), fx, std::conj(fx), 1.0 / double(m + 1)};
}

Mat2 Q_matrix(int m, cplx x) {
  if (std::abs(x) < kTolBeta)
    throw Error(ErrorKind::degenerate, "Q_m: |beta| below tolerance (tangential direction)");
  const Mat2 g0 = G_matrix(m, x);
  const Mat2 g1 = G_matrix(m + 1, x);
  const Mat2 g2 = G_matrix(m + 2, x);
  return g2 - g1 * g0.inverse() * g1;
}

cplx perm2(const Mat2& M) { return M.a11 * M.a22 + M.a12 * M.a21; }

namespace {

double drop_imag(cplx v, const char* what) {
  if (std::abs(v.imag()) > 1e-10 * std::abs(v.real()))
    throw Error(ErrorKind::accuracy, std::string(what) + ": imaginary residue too large");
  return v.real();
}

// D G D with D = diag(e^{-Re x}, 1). perm(Q) / det(G) is unchanged by this
// congruence, and the entries stay O(1) relative to each other.
Mat2 balanced_G(int m, cplx x) {
  const double d = std::exp(-x.real());
  Mat2 g = G_matrix(m, x);
  g.a11 *= d * d;
  g.a12 *= d;
  g.a21 *= d;
  return g;
}

}  // namespace

double density_limit(int m, const LimitGeometry& geom, cplx beta_u) {
  const cplx scale = geom.t0 * geom.t0 * geom.P_norm_sq / kPi;
  return drop_imag(scale * log_F_dd(m, 2.0 * beta_u.real()), "density_limit");
}

PairLimit pair_limit(int m, const LimitGeometry& geom, cplx beta_u) {
  if (std::abs(beta_u) < kTolBeta)
    throw Error(ErrorKind::degenerate, "pair_limit: |beta(u)| below tolerance (tangential direction)");
  const Mat2 g0 = balanced_G(m, beta_u);
  const Mat2 g1 = balanced_G(m + 1, beta_u);
  const Mat2 g2 = balanced_G(m + 2, beta_u);
  const cplx ratio = perm2(g2 - g1 * g0.inverse() * g1) / g0.det();
  const cplx tp2 = geom.t0 * geom.t0 * geom.P_norm_sq;
  const cplx K = tp2 * tp2 / (kPi * kPi) * ratio;
  const cplx Kt = ratio / (log_F_dd(m, 2.0 * beta_u.real()) * log_F_dd(m, 0.0));
  return {drop_imag(K, "pair_limit K"), drop_imag(Kt, "pair_limit K_tilde")};
}

}  // namespace rzl::limits
