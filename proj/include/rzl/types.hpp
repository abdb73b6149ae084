#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace rzl {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Directions with |beta(u)| below this are treated as holomorphic-tangential.
inline constexpr double kTolBeta = 1e-8;

}  // namespace rzl
