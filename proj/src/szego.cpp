#include "rzl/szego.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string_view>

#include "rzl/error.hpp"
#include "rzl/limits.hpp"

namespace rzl::szego {

std::size_t index_count(int m, int N) {
  if (m < 0 || N < 0) return N < 0 ? 0 : 1;
  // binomial(N + m + 1, m + 1) built up as a running product of exact integers.
  long double c = 1.0L;
  for (int k = 1; k <= m + 1; ++k) {
    c = c * (N + k) / k;
    if (c > 1e18L) return std::size_t(-1);
  }
  return std::size_t(std::llround(c));
}

namespace {

void compositions(int parts, int total, std::vector<std::uint16_t>& prefix,
                  std::vector<std::uint16_t>& out) {
  if (parts == 1) {
    prefix.push_back(std::uint16_t(total));
    out.insert(out.end(), prefix.begin(), prefix.end());
    prefix.pop_back();
    return;
  }
  for (int v = 0; v <= total; ++v) {
    prefix.push_back(std::uint16_t(v));
    compositions(parts - 1, total - v, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

IndexSet::IndexSet(int m, int N) : m_(m), N_(N) {
  if (m < 0 || N < 0) throw Error(ErrorKind::precondition, "index set: m and N must be >= 0");
  if (N > 65535) throw Error(ErrorKind::precondition, "index set: degree too large");
  count_ = index_count(m, N);
  if (count_ > kMaxIndices)
    throw Error(ErrorKind::precondition, "index set: more than 1e7 multi-indices requested");
  data_.reserve(count_ * std::size_t(m + 1));
  std::vector<std::uint16_t> prefix;
  for (int d = 0; d <= N; ++d) compositions(m + 1, d, prefix, data_);
}

std::size_t IndexSet::prefix(int d) const {
  if (d < 0) return 0;
  return index_count(m_, std::min(d, N_));
}

IndexSet enumerate_indices(int m, int N) { return IndexSet(m, N); }

NormTable::NormTable(IndexSet indices, std::vector<double> norms, std::string measure_tag)
    : indices_(std::move(indices)), norms_(std::move(norms)), measure_tag_(std::move(measure_tag)) {
  if (norms_.size() != indices_.size())
    throw Error(ErrorKind::precondition, "norm table: size mismatch");
  for (double n : norms_)
    if (!(n > 0.0) || !std::isfinite(n))
      throw Error(ErrorKind::precondition, "norm table: norms must be positive and finite");
}

double NormTable::norm(std::span<const int> J) const {
  const int m = this->m();
  if (J.size() != std::size_t(m + 1)) throw Error(ErrorKind::precondition, "norm: wrong index length");
  int deg = 0;
  for (int j : J) {
    if (j < 0) throw Error(ErrorKind::precondition, "norm: negative exponent");
    deg += j;
  }
  if (deg > N()) throw Error(ErrorKind::precondition, "norm: index beyond table degree");
  // Rank inside the degree block: compositions whose first differing entry is smaller.
  std::size_t rank = indices_.prefix(deg - 1);
  int rem = deg;
  for (int i = 0; i < m; ++i) {
    for (int v = 0; v < J[i]; ++v) rank += index_count(m - i - 1, rem - v) - index_count(m - i - 1, rem - v - 1);
    rem -= J[i];
  }
  return norms_[rank];
}

NormTable NormTable::scaled(double c) const {
  std::vector<double> n(norms_);
  for (auto& v : n) v *= c;
  return NormTable(indices_, std::move(n), measure_tag_);
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(std::size_t(n), 0.0);
  w.assign(std::size_t(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = t;
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
    }
    x[std::size_t(i)] = -t;
    x[std::size_t(n - 1 - i)] = t;
    w[std::size_t(i)] = w[std::size_t(n - 1 - i)] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

namespace {

constexpr const char* kArcTag = "normalized arc measure dtheta/2pi";
constexpr const char* kSurfaceTag = "torus-invariant surface measure";

// Radius of the m = 0 boundary circle.
double circle_radius(const geometry::RadialProfile& profile) {
  return geometry::project_to_boundary(profile, {cplx{1.0, 0.0}}).r[0];
}

struct CurveSample {
  double log_r0, log_r1, log_weight;  // weight includes ds/dphi and the GL weight
};

std::vector<CurveSample> modulus_curve(const geometry::RadialProfile& profile, int order) {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  std::vector<CurveSample> out;
  out.reserve(x.size());
  const double half = 0.25 * kPi;  // phi in [0, pi/2]
  for (std::size_t q = 0; q < x.size(); ++q) {
    const double phi = half * (x[q] + 1.0);
    const double c = std::cos(phi), s = std::sin(phi);
    const auto pt = geometry::project_to_boundary(profile, {cplx{c, 0.0}, cplx{s, 0.0}});
    const double r0 = pt.r[0], r1 = pt.r[1];
    const double R = std::hypot(r0, r1);
    const std::vector<double> sq{r0 * r0, r1 * r1};
    const auto g = profile.grad_hat(sq);
    // Implicit differentiation of rho_hat(R^2 c^2, R^2 s^2) = 0 in phi.
    const double gR = 2.0 * R * (g[0] * c * c + g[1] * s * s);
    const double gphi = 2.0 * R * R * c * s * (g[1] - g[0]);
    const double dR = -gphi / gR;
    const double ds = std::hypot(R, dR);
    out.push_back({std::log(r0), std::log(r1), std::log(ds * w[q] * half)});
  }
  return out;
}

std::vector<double> curve_norms(const IndexSet& idx, const std::vector<CurveSample>& curve) {
  std::vector<double> n(idx.size());
  const double torus = std::log(4.0 * kPi * kPi);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto J = idx[k];
    double acc = 0.0;
    for (const auto& c : curve)
      acc += std::exp((2.0 * J[0] + 1.0) * c.log_r0 + (2.0 * J[1] + 1.0) * c.log_r1 + c.log_weight);
    n[k] = std::exp(torus) * acc;
  }
  return n;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]) / std::abs(b[k]));
  return d;
}

}  // namespace

NormTable quadrature_norms(const geometry::RadialProfile& profile, int N, int quad_order) {
  if (quad_order < 2) throw Error(ErrorKind::precondition, "quadrature order must be >= 2");
  IndexSet idx(profile.m(), N);
  if (profile.m() == 0) {
    // (1 / 2 pi) \int_0^{2 pi} |r e^{i theta}|^{2k} d theta by Gauss-Legendre in theta.
    const double r = circle_radius(profile);
    std::vector<double> x, w;
    gauss_legendre(quad_order, x, w);
    std::vector<double> n(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      double acc = 0.0;
      for (std::size_t q = 0; q < x.size(); ++q) {
        const cplx pt = std::polar(r, kPi * (x[q] + 1.0));
        acc += w[q] * std::pow(std::norm(pt), double(idx[k][0]));
      }
      n[k] = acc * kPi / (2.0 * kPi);
    }
    return NormTable(std::move(idx), std::move(n), kArcTag);
  }
  if (profile.m() != 1)
    throw Error(ErrorKind::precondition, "quadrature norms are implemented for m <= 1 only");

  int order = quad_order;
  auto coarse = curve_norms(idx, modulus_curve(profile, order));
  for (;;) {
    if (order > 16384) throw Error(ErrorKind::accuracy, "norm quadrature did not converge");
    auto fine = curve_norms(idx, modulus_curve(profile, 2 * order));
    if (max_rel_diff(coarse, fine) <= 1e-9)
      return NormTable(std::move(idx), std::move(fine), kSurfaceTag);
    coarse = std::move(fine);
    order *= 2;
  }
}

NormTable compute_norms(const geometry::RadialProfile& profile, int N, int quad_order) {
  const int m = profile.m();
  if (m == 0) {
    IndexSet idx(0, N);
    const double r2 = std::pow(circle_radius(profile), 2.0);
    std::vector<double> n(idx.size());
    for (std::size_t k = 0; k < n.size(); ++k) n[k] = std::pow(r2, double(k));
    return NormTable(std::move(idx), std::move(n), kArcTag);
  }
  if (profile.kind() == geometry::ProfileKind::sphere) {
    // \int_{S^{2m+1}} |z^J|^2 d sigma = 2 pi^{m+1} J! / (|J| + m)!.
    IndexSet idx(m, N);
    std::vector<double> n(idx.size());
    const double base = std::log(2.0) + (m + 1) * std::log(kPi);
    for (std::size_t k = 0; k < n.size(); ++k) {
      const auto J = idx[k];
      double lg = base;
      int deg = 0;
      for (auto j : J) {
        lg += std::lgamma(j + 1.0);
        deg += j;
      }
      n[k] = std::exp(lg - std::lgamma(deg + m + 1.0));
    }
    return NormTable(std::move(idx), std::move(n), kSurfaceTag);
  }
  if (m != 1)
    throw Error(ErrorKind::precondition, "m >= 2 is supported only for the sphere");
  return quadrature_norms(profile, N, quad_order);
}

// ---------------------------------------------------------------------------
// Persistence

void write_table(std::ostream& os, const NormTable& table) {
  os << "#m=" << table.m() << '\n'
     << "#N=" << table.N() << '\n'
     << "#measure=" << table.measure_tag() << '\n'
     << "#order=graded-lex\n";
  char buf[64];
  const auto& idx = table.indices();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto J = idx[k];
    for (std::size_t i = 0; i < J.size(); ++i) {
      if (i) os << ',';
      os << J[i];
    }
    const auto res = std::to_chars(buf, buf + sizeof buf, table.norms()[k],
                                   std::chars_format::general, 17);
    os << '\t' << std::string_view(buf, std::size_t(res.ptr - buf)) << '\n';
  }
}

namespace {

[[noreturn]] void bad_file(const std::string& why) {
  throw Error(ErrorKind::precondition, "norm table file: " + why);
}

template <class T>
T parse_number(std::string_view text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    bad_file("bad number '" + std::string(text) + "'");
  return v;
}

std::string_view header_value(const std::string& line, std::string_view key) {
  if (line.rfind(key, 0) != 0) bad_file("expected header '" + std::string(key) + "'");
  return std::string_view(line).substr(key.size());
}

}  // namespace

NormTable read_table(std::istream& is) {
  std::string line;
  const auto next = [&]() {
    if (!std::getline(is, line)) bad_file("unexpected end of file");
  };
  next();
  const int m = parse_number<int>(header_value(line, "#m="));
  next();
  const int N = parse_number<int>(header_value(line, "#N="));
  next();
  const std::string measure(header_value(line, "#measure="));
  next();
  if (line != "#order=graded-lex") bad_file("unsupported order '" + line + "'");

  IndexSet idx(m, N);
  std::vector<double> norms(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    next();
    const auto tab = line.find('\t');
    if (tab == std::string::npos) bad_file("missing tab on line " + std::to_string(k + 5));
    std::string_view key(line.data(), tab);
    const auto J = idx[k];
    for (std::size_t i = 0; i < J.size(); ++i) {
      const auto comma = i + 1 < J.size() ? key.find(',') : key.size();
      if (comma == std::string_view::npos) bad_file("short multi-index");
      if (parse_number<int>(key.substr(0, comma)) != J[i]) bad_file("indices out of graded-lex order");
      key.remove_prefix(std::min(key.size(), comma + 1));
    }
    norms[k] = parse_number<double>(std::string_view(line).substr(tab + 1));
  }
  if (std::getline(is, line) && !line.empty()) bad_file("trailing data");
  return NormTable(std::move(idx), std::move(norms), measure);
}

// ---------------------------------------------------------------------------
// Kernel evaluation

namespace {

void check_point(const NormTable& t, std::span<const cplx> z, std::span<const cplx> w) {
  if (z.size() != std::size_t(t.m() + 1) || w.size() != std::size_t(t.m() + 1))
    throw Error(ErrorKind::precondition, "kernel: point dimension does not match table");
}

int resolve_degree(const NormTable& t, int degree) {
  if (degree < 0) return t.N();
  if (degree > t.N()) throw Error(ErrorKind::precondition, "kernel: degree exceeds table degree");
  return degree;
}

// powers[i * (N + 1) + k] = v_i^k
std::vector<cplx> power_table(std::span<const cplx> v, int N, bool conjugate) {
  std::vector<cplx> p(v.size() * std::size_t(N + 1));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const cplx x = conjugate ? std::conj(v[i]) : v[i];
    cplx acc{1.0, 0.0};
    for (int k = 0; k <= N; ++k) {
      p[i * std::size_t(N + 1) + std::size_t(k)] = acc;
      acc *= x;
    }
  }
  return p;
}

KernelJet direct_jet(const NormTable& t, std::span<const cplx> z, std::span<const cplx> w, int N) {
  const int n = t.m() + 1;
  const auto stride = std::size_t(N + 1);
  const auto zp = power_table(z, N, false);
  const auto wp = power_table(w, N, true);
  KernelJet jet{0.0, CVec(std::size_t(n)), CVec(std::size_t(n)), CMat::Zero(n, n)};
  std::vector<cplx> az(static_cast<std::size_t>(n)), bw(static_cast<std::size_t>(n));
  const auto& idx = t.indices();
  const auto norms = t.norms();
  const std::size_t count = idx.prefix(N);
  for (std::size_t k = 0; k < count; ++k) {
    const auto J = idx[k];
    const double inv = 1.0 / norms[k];
    cplx zJ{1.0, 0.0}, wJ{1.0, 0.0};
    for (int i = 0; i < n; ++i) {
      zJ *= zp[std::size_t(i) * stride + J[i]];
      wJ *= wp[std::size_t(i) * stride + J[i]];
    }
    // J_i z^{J - e_i} without dividing by z_i.
    for (int i = 0; i < n; ++i) {
      if (J[i] == 0) {
        az[std::size_t(i)] = bw[std::size_t(i)] = 0.0;
        continue;
      }
      cplx a = double(J[i]) * zp[std::size_t(i) * stride + J[i] - 1u];
      cplx b = double(J[i]) * wp[std::size_t(i) * stride + J[i] - 1u];
      for (int l = 0; l < n; ++l) {
        if (l == i) continue;
        a *= zp[std::size_t(l) * stride + J[l]];
        b *= wp[std::size_t(l) * stride + J[l]];
      }
      az[std::size_t(i)] = a;
      bw[std::size_t(i)] = b;
    }
    const cplx zi = zJ * inv;
    jet.S += zi * wJ;
    for (int j = 0; j < n; ++j) {
      jet.dS_w[std::size_t(j)] += zi * bw[std::size_t(j)];
      const cplx ai = az[std::size_t(j)] * inv;
      jet.dS_z[std::size_t(j)] += ai * wJ;
      if (az[std::size_t(j)] == 0.0) continue;
      for (int l = 0; l < n; ++l) jet.d2S(j, l) += ai * bw[std::size_t(l)];
    }
  }
  return jet;
}

// Log-magnitude of v^k, with 0^0 = 1.
struct LogPow {
  double logabs, arg;
  double mag(int k) const { return k == 0 ? 0.0 : k * logabs; }
  double phase(int k) const { return k * arg; }
};

KernelJet log_scaled_jet(const NormTable& t, std::span<const cplx> z, std::span<const cplx> w,
                         int N) {
  const int n = t.m() + 1;
  std::vector<LogPow> lz(static_cast<std::size_t>(n)), lw(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    lz[std::size_t(i)] = {std::log(std::abs(z[std::size_t(i)])), std::arg(z[std::size_t(i)])};
    lw[std::size_t(i)] = {std::log(std::abs(w[std::size_t(i)])), -std::arg(w[std::size_t(i)])};
  }
  const auto& idx = t.indices();
  const auto norms = t.norms();
  const std::size_t count = idx.prefix(N);

  const auto term_mag = [&](std::span<const std::uint16_t> J, int dz, int dw, double logn) {
    double s = -logn;
    for (int i = 0; i < n; ++i) {
      s += lz[std::size_t(i)].mag(J[i] - (i == dz ? 1 : 0));
      s += lw[std::size_t(i)].mag(J[i] - (i == dw ? 1 : 0));
    }
    return s;
  };
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < count; ++k) shift = std::max(shift, term_mag(idx[k], -1, -1, std::log(norms[k])));

  KernelJet jet{0.0, CVec(std::size_t(n)), CVec(std::size_t(n)), CMat::Zero(n, n)};
  const auto term = [&](std::span<const std::uint16_t> J, int dz, int dw, double logn) {
    double ph = 0.0;
    for (int i = 0; i < n; ++i) {
      ph += lz[std::size_t(i)].phase(J[i] - (i == dz ? 1 : 0));
      ph += lw[std::size_t(i)].phase(J[i] - (i == dw ? 1 : 0));
    }
    double c = 1.0;
    if (dz >= 0) c *= J[dz];
    if (dw >= 0) c *= J[dw];
    return std::polar(c * std::exp(term_mag(J, dz, dw, logn) - shift), ph);
  };
  for (std::size_t k = 0; k < count; ++k) {
    const auto J = idx[k];
    const double logn = std::log(norms[k]);
    jet.S += term(J, -1, -1, logn);
    for (int i = 0; i < n; ++i) {
      if (J[i] == 0) continue;
      jet.dS_w[std::size_t(i)] += term(J, -1, i, logn);
      jet.dS_z[std::size_t(i)] += term(J, i, -1, logn);
      for (int j = 0; j < n; ++j)
        if (J[j] != 0) jet.d2S(i, j) += term(J, i, j, logn);
    }
  }
  const double half = std::exp(0.5 * shift);
  const auto rescale = [&](cplx& v) {
    v = v * half * half;
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw Error(ErrorKind::accuracy, "kernel: value overflows double precision");
  };
  rescale(jet.S);
  for (auto& v : jet.dS_w) rescale(v);
  for (auto& v : jet.dS_z) rescale(v);
  for (Eigen::Index k = 0; k < jet.d2S.size(); ++k) rescale(jet.d2S.data()[k]);
  return jet;
}

double max_modulus(std::span<const cplx> z, std::span<const cplx> w) {
  double r = 0.0;
  for (const auto& v : z) r = std::max(r, std::abs(v));
  for (const auto& v : w) r = std::max(r, std::abs(v));
  return r;
}

}  // namespace

KernelJet kernel_jet(const NormTable& table, std::span<const cplx> z, std::span<const cplx> w,
                     int degree, KernelMode mode) {
  check_point(table, z, w);
  const int N = resolve_degree(table, degree);
  if (mode == KernelMode::automatic)
    mode = (max_modulus(z, w) > 1.5 && N > 500) ? KernelMode::log_scaled : KernelMode::direct;
  return mode == KernelMode::log_scaled ? log_scaled_jet(table, z, w, N) : direct_jet(table, z, w, N);
}

cplx kernel_value(const NormTable& table, std::span<const cplx> z, std::span<const cplx> w,
                  int degree) {
  check_point(table, z, w);
  const int N = resolve_degree(table, degree);
  if (max_modulus(z, w) > 1.5 && N > 500) return log_scaled_jet(table, z, w, N).S;
  const int n = table.m() + 1;
  const auto stride = std::size_t(N + 1);
  const auto zp = power_table(z, N, false);
  const auto wp = power_table(w, N, true);
  const auto& idx = table.indices();
  const auto norms = table.norms();
  cplx S{};
  for (std::size_t k = 0, count = idx.prefix(N); k < count; ++k) {
    const auto J = idx[k];
    cplx term{1.0 / norms[k], 0.0};
    for (int i = 0; i < n; ++i)
      term *= zp[std::size_t(i) * stride + J[i]] * wp[std::size_t(i) * stride + J[i]];
    S += term;
  }
  return S;
}

ScaledRatio scaled_ratio(const NormTable& table, const geometry::GeometryJet& jet,
                         std::span<const cplx> z, std::span<const cplx> u,
                         std::span<const cplx> v, int N) {
  if (N <= 0) throw Error(ErrorKind::precondition, "scaled_ratio: N must be positive");
  if (u.size() != z.size() || v.size() != z.size())
    throw Error(ErrorKind::precondition, "scaled_ratio: dimension mismatch");
  CVec x(z.begin(), z.end()), y(z.begin(), z.end());
  for (std::size_t i = 0; i < z.size(); ++i) {
    x[i] += u[i] / double(N);
    y[i] += v[i] / double(N);
  }
  const cplx num = kernel_value(table, x, y, N);
  const cplx den = kernel_value(table, z, z, N);
  const int m = table.m();
  const cplx arg = geometry::beta(jet, u) + std::conj(geometry::beta(jet, v));
  return {num / den, limits::eval_F(m, arg) * double(m + 1)};
}

EmpiricalConstant empirical_constant(const NormTable& table, std::span<const cplx> z) {
  if (table.N() < 50) throw Error(ErrorKind::precondition, "empirical_constant: table degree must be >= 50");
  const double S = kernel_value(table, z, z).real();
  return {S / std::pow(double(table.N()), table.m() + 1), table.N()};
}

}  // namespace rzl::szego
