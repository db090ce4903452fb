#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace noma {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using MatF = Eigen::MatrixXf;
using VecF = Eigen::VectorXf;
using BitMat = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

using cplx = std::complex<double>;

} // namespace noma
