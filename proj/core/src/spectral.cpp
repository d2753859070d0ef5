#include "aei/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aei/errors.hpp"

namespace aei {

SkewMatrix::SkewMatrix(const Mat& entries) {
  if (entries.rows() != entries.cols()) {
    throw InvalidArgument("SkewMatrix: matrix is not square");
  }
  if (entries.rows() < 2) {
    throw InvalidArgument("SkewMatrix: dimension must be at least 2");
  }
  if (!entries.allFinite()) {
    throw InvalidArgument("SkewMatrix: non-finite entry");
  }
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double violation = (entries + entries.transpose()).cwiseAbs().maxCoeff();
  if (violation > kTolerance * scale) {
    throw InvalidArgument("SkewMatrix: antisymmetry violated by " +
                          std::to_string(violation));
  }
  entries_ = 0.5 * (entries - entries.transpose());
}

double SkewMatrix::norm_inf() const {
  return entries_.cwiseAbs().rowwise().sum().maxCoeff();
}

double SkewSpectrum::norm() const { return omegas.cwiseAbs().maxCoeff(); }

double SkewSpectrum::unitarity_residual() const {
  const auto n = P.cols();
  return (P.adjoint() * P - CMat::Identity(n, n)).cwiseAbs().maxCoeff();
}

double SkewSpectrum::reconstruction_residual() const {
  const Eigen::VectorXcd lambda = Complex(0.0, 1.0) * omegas.cast<Complex>();
  const CMat rebuilt = P * lambda.asDiagonal() * P.adjoint();
  return (rebuilt - source.entries().cast<Complex>()).cwiseAbs().maxCoeff();
}

SkewSpectrum skew_spectral(const SkewMatrix& b) {
  // H = -iB is Hermitian and B = i·H, so the eigenvalues of B are i·eig(H).
  const CMat hermitian = Complex(0.0, -1.0) * b.entries().cast<Complex>();
  Eigen::SelfAdjointEigenSolver<CMat> solver(hermitian);
  if (solver.info() != Eigen::Success) {
    throw SpectralError("skew_spectral: Hermitian eigensolver failed");
  }
  // Eigenvalues come back ascending.
  return SkewSpectrum{solver.eigenvectors(), solver.eigenvalues(), b};
}

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

Complex phi_scalar(int k, Complex z) {
  if (k < 0) throw InvalidArgument("phi_scalar: negative index");
  if (k == 0) return std::exp(z);

  if (std::abs(z) < 1.0) {
    // φ_k(z) = Σ_m z^m/(m+k)!
    Complex term = 1.0 / factorial(k);
    Complex sum = term;
    for (int m = 1; m < 60; ++m) {
      term *= z / static_cast<double>(m + k);
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }

  Complex phi = std::exp(z);
  double inv_fact = 1.0;  // 1/(j-1)!
  for (int j = 1; j <= k; ++j) {
    if (j > 1) inv_fact /= (j - 1);
    phi = (phi - inv_fact) / z;
  }
  return phi;
}

PhiTable::PhiTable(SkewSpectrum spectrum, double scale)
    : spectrum_(std::move(spectrum)), scale_(scale) {
  if (!std::isfinite(scale)) throw InvalidArgument("PhiTable: scale not finite");
}

Complex PhiTable::eigen_argument(int j, double tau) const {
  return {0.0, tau * scale_ * spectrum_.omegas[j]};
}

Mat PhiTable::assemble(const Eigen::VectorXcd& diagonal) const {
  const CMat& p = spectrum_.P;
  const CMat full = p * diagonal.asDiagonal() * p.adjoint();
  const double magnitude = std::max(1.0, full.cwiseAbs().maxCoeff());
  const double residue = full.imag().cwiseAbs().maxCoeff();
  if (!(residue <= kImaginaryResidueTolerance * magnitude)) {
    throw SpectralError("matrix function has imaginary residue " +
                        std::to_string(residue));
  }
  return full.real();
}

Mat PhiTable::phi(int k, double tau) const {
  const auto key = std::make_pair(k, tau);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  Mat m = matfun([k](Complex z) { return phi_scalar(k, z); }, tau);
  std::lock_guard lock(mutex_);
  // A concurrent caller may have inserted first; keep the first value.
  return cache_.emplace(key, std::move(m)).first->second;
}

Mat PhiTable::matfun(const ScalarFunction& f, double tau) const {
  const int d = dim();
  Eigen::VectorXcd diagonal(d);
  for (int j = 0; j < d; ++j) diagonal[j] = f(eigen_argument(j, tau));
  return assemble(diagonal);
}

Mat PhiTable::matfun_ratio(const ScalarFunction& numerator,
                           const ScalarFunction& denominator,
                           double tau) const {
  const int d = dim();
  Eigen::VectorXcd diagonal(d);
  for (int j = 0; j < d; ++j) {
    const Complex z = eigen_argument(j, tau);
    const Complex den = denominator(z);
    if (std::abs(den) < kResonanceGuard) {
      throw NearSingularCoefficient(
          "coefficient denominator vanishes at eigenvalue argument " +
              std::to_string(z.imag()),
          std::abs(den));
    }
    diagonal[j] = numerator(z) / den;
  }
  return assemble(diagonal);
}

}  // namespace aei
