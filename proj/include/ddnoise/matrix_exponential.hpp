#pragma once

#include <Eigen/Dense>

namespace ddnoise {

// Scaling and squaring with a degree-13 Pade approximant. Throws DomainError on
// non-finite input.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a);
Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& a);

}  // namespace ddnoise
