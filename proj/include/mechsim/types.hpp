#pragma once

#include <Eigen/Dense>

namespace mechsim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace mechsim
