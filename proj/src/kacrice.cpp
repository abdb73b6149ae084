#include "rzl/kacrice.hpp"

#include <cmath>
#include <limits>

#include "rzl/error.hpp"
#include "rzl/limits.hpp"
#include "rzl/parallel.hpp"

namespace rzl::kacrice {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

CVec shifted(std::span<const cplx> z, std::span<const cplx> u, int N) {
  if (u.size() != z.size()) throw Error(ErrorKind::precondition, "direction has the wrong dimension");
  if (N <= 0) throw Error(ErrorKind::precondition, "N must be positive");
  CVec x(z.begin(), z.end());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += u[i] / double(N);
  return x;
}

double real_checked(cplx v, const char* what) {
  if (std::abs(v.imag()) > 1e-8 * std::abs(v.real()))
    throw Error(ErrorKind::accuracy, std::string(what) + ": unexpected imaginary part");
  return v.real();
}

}  // namespace

CMat TwoPointBlocks::lambda_block(int a, int b) const {
  const auto n = Lambda.rows() / 2;
  return Lambda.block(a * n, b * n, n, n);
}

OnePointBlocks one_point_blocks(const szego::NormTable& table, std::span<const cplx> x, int N) {
  const auto jet = szego::kernel_jet(table, x, x, N);
  const auto n = Eigen::Index(x.size());
  OnePointBlocks out;
  out.A = jet.S.real();
  out.B = jet.dS_w;
  out.C = jet.d2S;
  if (!(out.A > 1e-12 * out.C.norm()))
    throw Error(ErrorKind::conditioning, "Kac-Rice: S_N(x, x) is numerically singular");
  out.Lambda = out.C;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out.Lambda(i, j) -= std::conj(out.B[std::size_t(i)]) * out.B[std::size_t(j)] / out.A;
  return out;
}

TwoPointBlocks two_point_blocks(const szego::NormTable& table, std::span<const cplx> x1,
                                std::span<const cplx> x2, int N) {
  const auto n = Eigen::Index(x1.size());
  const std::span<const cplx> pts[2] = {x1, x2};
  TwoPointBlocks out{CMat(2, 2), CMat(2, 2 * n), CMat(2 * n, 2 * n), CMat()};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const auto jet = szego::kernel_jet(table, pts[a], pts[b], N);
      out.A(a, b) = jet.S;
      for (Eigen::Index j = 0; j < n; ++j) out.B(a, b * n + j) = jet.dS_w[std::size_t(j)];
      out.C.block(a * n, b * n, n, n) = jet.d2S;
    }
  }
  const cplx det = out.A(0, 0) * out.A(1, 1) - out.A(0, 1) * out.A(1, 0);
  if (!(det.real() > 1e-14 * (out.A(0, 0) * out.A(1, 1)).real()))
    throw Error(ErrorKind::degenerate,
                "Kac-Rice: points are too close for this N (det A vanishes)");
  // A = L L^*, so B^* A^{-1} B = Y^* Y with Y = L^{-1} B; Lambda stays Hermitian.
  const double a11 = out.A(0, 0).real();
  const double l11 = std::sqrt(a11);
  const cplx l21 = out.A(1, 0) / l11;
  const double l22 = std::sqrt(det.real() / a11);
  CMat Y(2, 2 * n);
  Y.row(0) = out.B.row(0) / l11;
  Y.row(1) = (out.B.row(1) - l21 * Y.row(0)) / l22;
  const CMat C = 0.5 * (out.C + out.C.adjoint());
  out.Lambda = C - Y.adjoint() * Y;
  return out;
}

double density_N(const szego::NormTable& table, std::span<const cplx> z, std::span<const cplx> u,
                 int N) {
  const auto x = shifted(z, u, N);
  const auto blocks = one_point_blocks(table, x, N);
  return blocks.Lambda.trace().real() / (kPi * blocks.A);
}

PairCorrelation pair_at(const szego::NormTable& table, std::span<const cplx> x1,
                        std::span<const cplx> x2, int N) {
  const auto blocks = two_point_blocks(table, x1, x2, N);
  const CMat L11 = blocks.lambda_block(0, 0);
  const CMat L22 = blocks.lambda_block(1, 1);
  const CMat L12 = blocks.lambda_block(0, 1);
  const CMat L21 = blocks.lambda_block(1, 0);
  const cplx cross = (L12.array() * L21.transpose().array()).sum();
  const cplx detA = blocks.A(0, 0) * blocks.A(1, 1) - blocks.A(0, 1) * blocks.A(1, 0);
  const double K = real_checked((L11.trace() * L22.trace() + cross) / (kPi * kPi * detA), "pair_N");

  const auto d1 = one_point_blocks(table, x1, N);
  const auto d2 = one_point_blocks(table, x2, N);
  const double D1 = d1.Lambda.trace().real() / (kPi * d1.A);
  const double D2 = d2.Lambda.trace().real() / (kPi * d2.A);
  return {K, K / (D1 * D2)};
}

PairCorrelation pair_N(const szego::NormTable& table, const geometry::GeometryJet& jet,
                       std::span<const cplx> z, std::span<const cplx> u, int N) {
  if (std::abs(geometry::beta(jet, u)) < kTolBeta)
    throw Error(ErrorKind::degenerate, "pair_N: |beta(u)| below tolerance (tangential direction)");
  const auto x = shifted(z, u, N);
  return pair_at(table, x, z, N);
}

double fitted_rate(std::span<const int> N, std::span<const double> err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < N.size(); ++k) {
    if (!(err[k] > 0.0)) continue;
    const double x = std::log(double(N[k])), y = std::log(err[k]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++n;
  }
  if (n < 2) return kNaN;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceTable convergence_table(const szego::NormTable& table, const geometry::GeometryJet& jet,
                                   std::span<const cplx> z, std::span<const cplx> u,
                                   std::span<const int> N_list, Study study) {
  if (N_list.size() < 3) throw Error(ErrorKind::precondition, "convergence: need at least 3 values of N");
  for (std::size_t k = 0; k < N_list.size(); ++k) {
    if (N_list[k] <= 0 || N_list[k] > table.N())
      throw Error(ErrorKind::precondition, "convergence: N outside (0, table degree]");
    if (k && N_list[k] <= N_list[k - 1])
      throw Error(ErrorKind::precondition, "convergence: N list must be strictly ascending");
  }
  const int m = table.m();
  const auto geom = geometry::limit_geometry(jet);
  const cplx b = geometry::beta(jet, u);

  ConvergenceTable out;
  out.D_limit = limits::density_limit(m, geom, b);
  out.K_limit = out.K_tilde_limit = out.rate_K = kNaN;
  if (study == Study::pair) {
    const auto lim = limits::pair_limit(m, geom, b);
    out.K_limit = lim.K_inf;
    out.K_tilde_limit = lim.K_tilde_inf;
  }

  out.rows.resize(N_list.size());
  parallel_for(N_list.size(), [&](std::size_t k) {
    const int N = N_list[k];
    ConvergenceRow row{N, density_N(table, z, u, N) / (double(N) * N), kNaN, kNaN, 0.0, kNaN};
    row.err_D = std::abs(row.D_scaled - out.D_limit) / std::abs(out.D_limit);
    if (study == Study::pair) {
      const auto pc = pair_N(table, jet, z, u, N);
      row.K_scaled = pc.K_N / std::pow(double(N), 4);
      row.K_tilde = pc.K_tilde_N;
      row.err_K = std::abs(row.K_scaled - out.K_limit) / std::abs(out.K_limit);
    }
    out.rows[k] = row;
  });

  std::vector<double> eD, eK;
  for (const auto& r : out.rows) {
    eD.push_back(r.err_D);
    eK.push_back(r.err_K);
  }
  out.rate_D = fitted_rate(N_list, eD);
  if (study == Study::pair) out.rate_K = fitted_rate(N_list, eK);
  const auto& last = out.rows.back();
  out.flagged = last.err_D > 0.1 || (study == Study::pair && !(last.err_K <= 0.1));
  return out;
}

}  // namespace rzl::kacrice
