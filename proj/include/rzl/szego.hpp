#pragma once

// Partial Szego kernels S_N(z, w) = sum_{|J| <= N} z^J conj(w)^J / n_J.
//
// For a torus-invariant measure the monomials are mutually orthogonal, so the
// monomial norms n_J = \int |z^J|^2 dmu are the whole inner product.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rzl/geometry.hpp"
#include "rzl/types.hpp"

namespace rzl::szego {

/// Multi-indices of length m+1 and degree <= N, stored flat in graded-lex
/// order: by total degree, then lexicographically ascending.
class IndexSet {
 public:
  IndexSet(int m, int N);

  int m() const { return m_; }
  int N() const { return N_; }
  std::size_t size() const { return count_; }
  /// Number of indices with degree <= d (a prefix of the ordering).
  std::size_t prefix(int d) const;
  std::span<const std::uint16_t> operator[](std::size_t k) const {
    return {data_.data() + k * std::size_t(m_ + 1), std::size_t(m_ + 1)};
  }

 private:
  int m_, N_;
  std::size_t count_;
  std::vector<std::uint16_t> data_;
};

inline constexpr std::size_t kMaxIndices = 10'000'000;

/// binomial(N + m + 1, m + 1), the number of indices of degree <= N.
std::size_t index_count(int m, int N);

/// Enumerate all J with |J| <= N in graded-lex order.
IndexSet enumerate_indices(int m, int N);

class NormTable {
 public:
  NormTable(IndexSet indices, std::vector<double> norms, std::string measure_tag);

  int m() const { return indices_.m(); }
  int N() const { return indices_.N(); }
  const IndexSet& indices() const { return indices_; }
  std::span<const double> norms() const { return norms_; }
  const std::string& measure_tag() const { return measure_tag_; }
  double total_mass() const { return norms_.front(); }

  /// Norm of z^J; J must have degree <= N.
  double norm(std::span<const int> J) const;

  /// Same table with every norm multiplied by c > 0.
  NormTable scaled(double c) const;

 private:
  IndexSet indices_;
  std::vector<double> norms_;
  std::string measure_tag_;
};

inline constexpr int kDefaultQuadOrder = 256;

/// Monomial norms for the profile's torus-invariant surface measure
/// (normalized arc measure d theta / 2 pi when m = 0). Circle and sphere use
/// closed forms; other m = 1 profiles use Gauss-Legendre quadrature along
/// the modulus curve, doubling the order until it converges to 1e-9.
NormTable compute_norms(const geometry::RadialProfile& profile, int N,
                        int quad_order = kDefaultQuadOrder);

/// The quadrature path for m <= 1, regardless of profile kind. Used directly
/// as an oracle for the closed forms.
NormTable quadrature_norms(const geometry::RadialProfile& profile, int N,
                           int quad_order = kDefaultQuadOrder);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

/// Text persistence: `#m=`, `#N=`, `#measure=`, `#order=graded-lex` headers,
/// then `j0,...,jm<TAB>n_J` per line with 17 significant digits.
void write_table(std::ostream& os, const NormTable& table);
NormTable read_table(std::istream& is);

struct KernelJet {
  cplx S;      // S_N(z, w)
  CVec dS_w;   // d/d conj(w_j) S_N
  CVec dS_z;   // d/d z_i S_N
  CMat d2S;    // d^2 / dz_i d conj(w_j) S_N
};

enum class KernelMode {
  automatic,   // log_scaled when max |z_i|, |w_i| > 1.5 and degree > 500
  direct,      // power tables in plain floating point
  log_scaled,  // per-term log-magnitude and phase, one common rescaling
};

/// S_N and its derivatives at (z, w). `degree` < 0 means the full table.
KernelJet kernel_jet(const NormTable& table, std::span<const cplx> z, std::span<const cplx> w,
                     int degree = -1, KernelMode mode = KernelMode::automatic);

/// S_N(z, w) only.
cplx kernel_value(const NormTable& table, std::span<const cplx> z, std::span<const cplx> w,
                  int degree = -1);

struct ScaledRatio {
  cplx ratio;      // S_N(z + u/N, z + v/N) / S_N(z, z)
  cplx predicted;  // F_m(beta(u) + conj beta(v)) / F_m(0)
};

ScaledRatio scaled_ratio(const NormTable& table, const geometry::GeometryJet& jet,
                         std::span<const cplx> z, std::span<const cplx> u,
                         std::span<const cplx> v, int N);

struct EmpiricalConstant {
  double C_hat;
  int N_used;
};

/// S_N(z, z) / N^{m+1} at the table's top degree (>= 50).
EmpiricalConstant empirical_constant(const NormTable& table, std::span<const cplx> z);

}  // namespace rzl::szego
