#pragma once

#include <Eigen/Dense>

namespace tarifflab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace tarifflab
