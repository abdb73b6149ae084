#pragma once

// Complete Reinhardt domains {rho < 0} with rho(z) = rho_hat(|z_0|^2, ..., |z_m|^2).
//
// Working in squared moduli s_i = |z_i|^2 makes torus invariance structural.
// The chain rule gives d rho / d z_i = rho_hat_i(s) conj(z_i) and
// d rho / d conj(z_i) = rho_hat_i(s) z_i.

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rzl/limits.hpp"
#include "rzl/types.hpp"

namespace rzl::geometry {

enum class ProfileKind { circle, sphere, ellipsoid, power_ellipsoid, custom };

class RadialProfile {
 public:
  using ScalarFn = std::function<double(std::span<const double>)>;
  using VectorFn = std::function<std::vector<double>(std::span<const double>)>;
  /// Row-major (m+1) x (m+1) second partials of rho_hat.
  using MatrixFn = std::function<std::vector<double>(std::span<const double>)>;

  /// |z_0|^2 - 1.
  static RadialProfile circle();
  /// Unit sphere in C^{m+1}: sum s_i - 1.
  static RadialProfile sphere(int m);
  /// sum a_i s_i - 1, a_i > 0.
  static RadialProfile ellipsoid(std::vector<double> a);
  /// sum s_i^{p_i} - 1, p_i >= 1.
  static RadialProfile power_ellipsoid(std::vector<double> p);
  /// User-supplied profile with analytic gradient and Hessian (in s).
  static RadialProfile custom(int m, ScalarFn rho, VectorFn grad, MatrixFn hess, std::string name);

  /// Parses `circle`, `sphere`, `sphere:<m>`, `ellipsoid:a0,a1,...`, `pellipsoid:p0,p1,...`.
  static RadialProfile parse(std::string_view spec);

  ProfileKind kind() const { return kind_; }
  int m() const { return m_; }
  const std::vector<double>& params() const { return params_; }
  const std::string& name() const { return name_; }

  double rho_hat(std::span<const double> s) const { return rho_(s); }
  std::vector<double> grad_hat(std::span<const double> s) const { return grad_(s); }
  std::vector<double> hess_hat(std::span<const double> s) const { return hess_(s); }

  /// rho(z) for a full complex point.
  double rho(std::span<const cplx> z) const;

 private:
  RadialProfile() = default;

  ProfileKind kind_ = ProfileKind::custom;
  int m_ = 0;
  std::vector<double> params_;
  std::string name_;
  ScalarFn rho_;
  VectorFn grad_;
  MatrixFn hess_;
};

inline constexpr double kBoundaryTol = 1e-10;

/// A point of the boundary, validated against the profile.
struct BoundaryPoint {
  CVec z;
  std::vector<double> r;  // |z_i|
};

/// Validates |rho(z)| <= kBoundaryTol. Throws precondition otherwise.
BoundaryPoint on_boundary(const RadialProfile& profile, CVec z);

/// Scales z radially onto the boundary (bisection on t -> rho_hat(t^2 s)).
BoundaryPoint project_to_boundary(const RadialProfile& profile, CVec z);

/// Throws unless every |z_i| > 1e-12.
void require_torus_point(const BoundaryPoint& p);

struct GeometryJet {
  CVec d_rho;  // d rho / d z_i
  CVec P;      // d rho / d conj(z_i)
  cplx t0;     // 1 / (d'rho . z)
  double P_norm_sq;
};

GeometryJet geometry_jet(const RadialProfile& profile, const BoundaryPoint& z);

/// beta(u) = t0 (d'rho . u). C-linear in u; beta(z) = 1.
cplx beta(const GeometryJet& jet, std::span<const cplx> u);

/// Smallest eigenvalue of the Levi form on {v : d'rho . v = 0}; +inf when m = 0.
double levi_min_eig(const RadialProfile& profile, const BoundaryPoint& z);

/// Throws precondition unless the Levi form is positive at z (admission gate
/// for custom profiles; built-ins pass everywhere off the coordinate planes).
void admit(const RadialProfile& profile, const BoundaryPoint& z);

/// t0, ||P||^2 and beta(P) for the limit formulas.
limits::LimitGeometry limit_geometry(const GeometryJet& jet);

}  // namespace rzl::geometry
