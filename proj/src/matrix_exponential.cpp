#include "ddnoise/matrix_exponential.hpp"

#include <array>
#include <cmath>

#include "ddnoise/errors.hpp"

namespace ddnoise {
namespace {

// Pade(13,13) numerator coefficients and the 1-norm bound below which no scaling
// is needed for double precision.
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

template <typename Matrix>
Matrix expm_pade13(const Matrix& a) {
  if (!a.allFinite()) {
    throw DomainError("matrix_exponential: non-finite entries");
  }
  const Eigen::Index n = a.rows();
  if (n == 0) return a;

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 == 0.0) return Matrix::Identity(n, n);
  int squarings = 0;
  if (norm1 > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  }
  const Matrix scaled = a / std::ldexp(1.0, squarings);

  const auto& b = kPade13;
  const Matrix ident = Matrix::Identity(n, n);
  const Matrix a2 = scaled * scaled;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;

  const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                         b[3] * a2 + b[1] * ident;
  const Matrix u = scaled * u_inner;
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                   b[2] * a2 + b[0] * ident;

  Matrix result = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) {
    result = result * result;
  }
  return result;
}

}  // namespace

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a) { return expm_pade13(a); }

Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& a) { return expm_pade13(a); }

}  // namespace ddnoise
