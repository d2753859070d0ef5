#pragma once

// Spectral calculus for real skew-symmetric matrices.
//
// Every coefficient of the exponential integrators is an analytic function
// of the single matrix hΩ = (h/ε)·B. A skew-symmetric B is unitarily
// diagonalizable, B = P·diag(i·ω)·Pᴴ, so any such function is evaluated as
// Re(P·diag(f(i·τ·(h/ε)·ω_j))·Pᴴ). The decomposition is done once per
// problem and reused for every coefficient.

#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <utility>

#include <Eigen/Dense>

namespace aei {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// Real d×d matrix with entries(i,j) == -entries(j,i) exactly, d >= 2.
class SkewMatrix {
 public:
  // Relative antisymmetry tolerance accepted on input. Accepted input is
  // re-antisymmetrized so the stored entries satisfy the invariant exactly.
  static constexpr double kTolerance = 1e-14;

  explicit SkewMatrix(const Mat& entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Mat& entries() const { return entries_; }
  // Maximum absolute row sum.
  double norm_inf() const;

 private:
  Mat entries_;
};

struct SkewSpectrum {
  CMat P;       // unitary
  Vec omegas;   // eigenvalues of B are i·omegas[j], ascending
  SkewMatrix source;

  // Spectral norm of B, max_j |omegas[j]|.
  double norm() const;
  // max_ij |(PᴴP - I)_ij| and max_ij |(P·diag(iω)·Pᴴ - B)_ij|.
  double unitarity_residual() const;
  double reconstruction_residual() const;
};

SkewSpectrum skew_spectral(const SkewMatrix& b);

// φ_0(z) = e^z, φ_k(z) = ∫₀¹ e^{(1-σ)z} σ^{k-1}/(k-1)! dσ.
Complex phi_scalar(int k, Complex z);

using ScalarFunction = std::function<Complex(Complex)>;

// Entry-wise tolerance on the imaginary part discarded when assembling a
// real matrix function, relative to max(1, largest entry).
inline constexpr double kImaginaryResidueTolerance = 1e-11;
// Reciprocals of coefficient functions below this magnitude are refused.
inline constexpr double kResonanceGuard = 1e-8;

// Matrix functions of τ·scale·B, scale = h/ε. The φ cache is keyed on
// (k, τ) and guarded by a mutex, so one table may be shared.
class PhiTable {
 public:
  PhiTable(SkewSpectrum spectrum, double scale);

  PhiTable(const PhiTable&) = delete;
  PhiTable& operator=(const PhiTable&) = delete;

  const SkewSpectrum& spectrum() const { return spectrum_; }
  double scale() const { return scale_; }
  int dim() const { return spectrum_.source.dim(); }

  // The scalar argument i·τ·scale·ω_j for eigenvalue j.
  Complex eigen_argument(int j, double tau) const;

  // φ_k(τ·scale·B), cached.
  Mat phi(int k, double tau) const;

  // Re(P·diag(f(i·τ·scale·ω_j))·Pᴴ).
  Mat matfun(const ScalarFunction& f, double tau) const;

  // numerator(z)/denominator(z) as a matrix function. Throws
  // NearSingularCoefficient if |denominator| < kResonanceGuard at any
  // eigenvalue argument.
  Mat matfun_ratio(const ScalarFunction& numerator,
                   const ScalarFunction& denominator, double tau) const;

 private:
  Mat assemble(const Eigen::VectorXcd& diagonal) const;

  SkewSpectrum spectrum_;
  double scale_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, double>, Mat> cache_;
};

}  // namespace aei
