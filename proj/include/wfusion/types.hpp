#pragma once

#include <complex>
#include <Eigen/Dense>

namespace wfusion {

using Real = double;
using Complex = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;
using Eigen::Index;

inline constexpr Complex kImag{0.0, 1.0};

}  // namespace wfusion
