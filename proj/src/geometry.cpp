#include "rzl/geometry.hpp"

#include <charconv>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "rzl/error.hpp"

namespace rzl::geometry {

namespace {

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size() || item.empty())
      throw Error(ErrorKind::precondition, "profile: bad number '" + std::string(item) + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

RadialProfile RadialProfile::circle() {
  RadialProfile p = sphere(0);
  p.kind_ = ProfileKind::circle;
  p.name_ = "circle";
  return p;
}

RadialProfile RadialProfile::sphere(int m) {
  if (m < 0) throw Error(ErrorKind::precondition, "sphere: dimension must be >= 0");
  RadialProfile p;
  p.kind_ = ProfileKind::sphere;
  p.m_ = m;
  p.name_ = "sphere:" + std::to_string(m);
  const auto n = std::size_t(m + 1);
  p.rho_ = [](std::span<const double> s) {
    double acc = -1.0;
    for (double v : s) acc += v;
    return acc;
  };
  p.grad_ = [n](std::span<const double>) { return std::vector<double>(n, 1.0); };
  p.hess_ = [n](std::span<const double>) { return std::vector<double>(n * n, 0.0); };
  return p;
}

RadialProfile RadialProfile::ellipsoid(std::vector<double> a) {
  if (a.empty()) throw Error(ErrorKind::precondition, "ellipsoid: need at least one coefficient");
  for (double v : a)
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorKind::precondition, "ellipsoid: coefficients must be positive");
  RadialProfile p;
  p.kind_ = ProfileKind::ellipsoid;
  p.m_ = int(a.size()) - 1;
  p.name_ = "ellipsoid";
  p.params_ = a;
  const auto n = a.size();
  p.rho_ = [a](std::span<const double> s) {
    double acc = -1.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * s[i];
    return acc;
  };
  p.grad_ = [a](std::span<const double>) { return a; };
  p.hess_ = [n](std::span<const double>) { return std::vector<double>(n * n, 0.0); };
  return p;
}

RadialProfile RadialProfile::power_ellipsoid(std::vector<double> pw) {
  if (pw.empty()) throw Error(ErrorKind::precondition, "pellipsoid: need at least one exponent");
  for (double v : pw)
    if (!(v >= 1.0) || !std::isfinite(v))
      throw Error(ErrorKind::precondition, "pellipsoid: exponents must be >= 1");
  RadialProfile p;
  p.kind_ = ProfileKind::power_ellipsoid;
  p.m_ = int(pw.size()) - 1;
  p.name_ = "pellipsoid";
  p.params_ = pw;
  const auto n = pw.size();
  p.rho_ = [pw](std::span<const double> s) {
    double acc = -1.0;
    for (std::size_t i = 0; i < pw.size(); ++i) acc += std::pow(s[i], pw[i]);
    return acc;
  };
  p.grad_ = [pw](std::span<const double> s) {
    std::vector<double> g(pw.size());
    for (std::size_t i = 0; i < pw.size(); ++i)
      g[i] = pw[i] == 1.0 ? 1.0 : pw[i] * std::pow(s[i], pw[i] - 1.0);
    return g;
  };
  p.hess_ = [pw, n](std::span<const double> s) {
    std::vector<double> h(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (pw[i] != 1.0) h[i * n + i] = pw[i] * (pw[i] - 1.0) * std::pow(s[i], pw[i] - 2.0);
    return h;
  };
  return p;
}

RadialProfile RadialProfile::custom(int m, ScalarFn rho, VectorFn grad, MatrixFn hess,
                                    std::string name) {
  if (m < 0) throw Error(ErrorKind::precondition, "custom profile: m must be >= 0");
  RadialProfile p;
  p.kind_ = ProfileKind::custom;
  p.m_ = m;
  p.name_ = std::move(name);
  p.rho_ = std::move(rho);
  p.grad_ = std::move(grad);
  p.hess_ = std::move(hess);
  const std::vector<double> origin(std::size_t(m + 1), 0.0);
  if (!(p.rho_(origin) < 0.0))
    throw Error(ErrorKind::precondition, "custom profile: rho_hat(0) must be negative");
  return p;
}

RadialProfile RadialProfile::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  const auto head = spec.substr(0, colon);
  const auto tail = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (head == "circle" && tail.empty()) return circle();
  if (head == "sphere") {
    if (tail.empty()) return sphere(1);
    const auto v = parse_list(tail);
    if (v.size() != 1 || v[0] != std::floor(v[0]) || v[0] < 0)
      throw Error(ErrorKind::precondition, "sphere:<m> needs a non-negative integer");
    return sphere(int(v[0]));
  }
  if (head == "ellipsoid" && !tail.empty()) return ellipsoid(parse_list(tail));
  if (head == "pellipsoid" && !tail.empty()) return power_ellipsoid(parse_list(tail));
  throw Error(ErrorKind::precondition, "unknown profile '" + std::string(spec) + "'");
}

namespace {

std::vector<double> squared_moduli(std::span<const cplx> z) {
  std::vector<double> s(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) s[i] = std::norm(z[i]);
  return s;
}

void check_dim(const RadialProfile& profile, std::size_t n) {
  if (n != std::size_t(profile.m() + 1))
    throw Error(ErrorKind::precondition, "point has " + std::to_string(n) +
                                             " coordinates, profile expects " +
                                             std::to_string(profile.m() + 1));
}

BoundaryPoint make_point(CVec z) {
  BoundaryPoint p;
  p.r.reserve(z.size());
  for (const auto& v : z) p.r.push_back(std::abs(v));
  p.z = std::move(z);
  return p;
}

}  // namespace

double RadialProfile::rho(std::span<const cplx> z) const {
  const auto s = squared_moduli(z);
  return rho_(s);
}

BoundaryPoint on_boundary(const RadialProfile& profile, CVec z) {
  check_dim(profile, z.size());
  const double r = profile.rho(z);
  if (!(std::abs(r) <= kBoundaryTol))
    throw Error(ErrorKind::precondition, "point is off the boundary: rho = " + std::to_string(r));
  return make_point(std::move(z));
}

BoundaryPoint project_to_boundary(const RadialProfile& profile, CVec z) {
  check_dim(profile, z.size());
  const auto s = squared_moduli(z);
  double total = 0.0;
  for (double v : s) total += v;
  if (!(total > 0.0)) throw Error(ErrorKind::precondition, "cannot project the origin to the boundary");

  std::vector<double> work(s.size());
  const auto g = [&](double t) {
    for (std::size_t i = 0; i < s.size(); ++i) work[i] = t * t * s[i];
    return profile.rho_hat(work);
  };
  double lo = 0.0, hi = 1.0;
  while (g(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e150) throw Error(ErrorKind::precondition, "profile does not exit along this ray");
  }
  while (hi - lo > 1e-14 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  // Pick whichever endpoint is closer to the zero set.
  const double t = std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
  for (auto& v : z) v *= t;
  return on_boundary(profile, std::move(z));
}

void require_torus_point(const BoundaryPoint& p) {
  for (double r : p.r)
    if (!(r > 1e-12))
      throw Error(ErrorKind::precondition, "boundary point has a vanishing coordinate");
}

GeometryJet geometry_jet(const RadialProfile& profile, const BoundaryPoint& z) {
  check_dim(profile, z.z.size());
  const auto s = squared_moduli(z.z);
  const auto g = profile.grad_hat(s);
  GeometryJet jet;
  jet.d_rho.resize(z.z.size());
  jet.P.resize(z.z.size());
  double dz = 0.0;  // d'rho . z = sum rho_hat_i |z_i|^2, real
  double pn = 0.0;
  for (std::size_t i = 0; i < z.z.size(); ++i) {
    jet.d_rho[i] = g[i] * std::conj(z.z[i]);
    jet.P[i] = g[i] * z.z[i];
    dz += g[i] * s[i];
    pn += std::norm(jet.P[i]);
  }
  if (!(std::abs(dz) >= 1e-12))
    throw Error(ErrorKind::degenerate, "d'rho(z) . z vanishes: degenerate boundary point");
  jet.t0 = 1.0 / dz;
  jet.P_norm_sq = pn;
  return jet;
}

cplx beta(const GeometryJet& jet, std::span<const cplx> u) {
  if (u.size() != jet.d_rho.size())
    throw Error(ErrorKind::precondition, "beta: direction has the wrong dimension");
  cplx acc{};
  for (std::size_t i = 0; i < u.size(); ++i) acc += jet.d_rho[i] * u[i];
  return acc * jet.t0;
}

limits::LimitGeometry limit_geometry(const GeometryJet& jet) {
  const cplx via_t0 = jet.t0 * jet.P_norm_sq;
  const cplx via_beta = beta(jet, jet.P);
  if (std::abs(via_t0 - via_beta) > 1e-12 * std::abs(via_t0))
    throw Error(ErrorKind::accuracy, "beta(P) disagrees with t0 ||P||^2");
  return {jet.t0, jet.P_norm_sq, via_beta};
}

double levi_min_eig(const RadialProfile& profile, const BoundaryPoint& z) {
  check_dim(profile, z.z.size());
  const int n = profile.m() + 1;
  if (n == 1) return std::numeric_limits<double>::infinity();
  const auto s = squared_moduli(z.z);
  const auto g = profile.grad_hat(s);
  const auto h = profile.hess_hat(s);

  // L(k, j) = d^2 rho / dz_j d conj(z_k); the Levi form is v^* L v.
  CMat L(n, n);
  Eigen::VectorXcd dbar(n);
  for (int k = 0; k < n; ++k) {
    dbar(k) = std::conj(g[k] * std::conj(z.z[k]));
    for (int j = 0; j < n; ++j)
      L(k, j) = h[std::size_t(j * n + k)] * std::conj(z.z[j]) * z.z[k] + (j == k ? g[k] : 0.0);
  }
  // Columns 1..m of the Householder Q span conj(d)^perp = {v : d . v = 0}.
  const Eigen::HouseholderQR<CMat> qr{CMat(dbar)};
  const CMat Q = qr.householderQ();
  const CMat basis = Q.rightCols(n - 1);
  const CMat restricted = basis.adjoint() * L * basis;
  const Eigen::SelfAdjointEigenSolver<CMat> eig(restricted, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

void admit(const RadialProfile& profile, const BoundaryPoint& z) {
  if (!(levi_min_eig(profile, z) > 0.0))
    throw Error(ErrorKind::precondition,
                "profile '" + profile.name() + "' is not strictly pseudoconvex at this point");
}

}  // namespace rzl::geometry
