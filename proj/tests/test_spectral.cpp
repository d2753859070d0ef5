#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "aei/errors.hpp"
#include "aei/spectral.hpp"
#include "support.hpp"

namespace aei {
namespace {

using test::field_matrix;

TEST(SkewMatrix, RejectsNonSkewInput) {
  Mat a(2, 2);
  a << 0.0, 1.0, -1.0 + 1e-10, 0.0;
  EXPECT_THROW(SkewMatrix{a}, InvalidArgument);
}

TEST(SkewMatrix, RejectsDimensionOne) {
  EXPECT_THROW(SkewMatrix{Mat::Zero(1, 1)}, InvalidArgument);
}

TEST(SkewMatrix, RejectsNonSquareAndNonFinite) {
  EXPECT_THROW(SkewMatrix{Mat::Zero(2, 3)}, InvalidArgument);
  Mat a = Mat::Zero(2, 2);
  a(0, 1) = std::nan("");
  a(1, 0) = std::nan("");
  EXPECT_THROW(SkewMatrix{a}, InvalidArgument);
}

TEST(SkewMatrix, StoredEntriesAreExactlyAntisymmetric) {
  Mat a(3, 3);
  a << 0.0, 0.3, -0.7, -0.3, 0.0, 1.1, 0.7, -1.1 * (1 + 1e-16), 0.0;
  const SkewMatrix b(a);
  EXPECT_TRUE((b.entries() + b.entries().transpose()).isZero(0.0));
}

TEST(SkewSpectral, RotationGenerator) {
  Mat a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  const SkewSpectrum s = skew_spectral(SkewMatrix(a));
  ASSERT_EQ(s.omegas.size(), 2);
  EXPECT_NEAR(s.omegas(0), -1.0, 1e-14);
  EXPECT_NEAR(s.omegas(1), 1.0, 1e-14);
}

TEST(SkewSpectral, FieldMatrixHasAxisNorm) {
  const SkewSpectrum s = skew_spectral(SkewMatrix(field_matrix()));
  // The axis vector of the field is (-1, 0.2, -0.2).
  const double w = std::sqrt(1.0 + 0.04 + 0.04);
  EXPECT_NEAR(s.omegas(0), -w, 1e-13);
  EXPECT_NEAR(s.omegas(1), 0.0, 1e-13);
  EXPECT_NEAR(s.omegas(2), w, 1e-13);
  EXPECT_NEAR(s.norm(), w, 1e-13);
  EXPECT_LE(s.unitarity_residual(), 1e-12);
  EXPECT_LE(s.reconstruction_residual(), 1e-12);
}

TEST(SkewSpectral, ZeroMatrix) {
  const SkewSpectrum s = skew_spectral(SkewMatrix(Mat::Zero(3, 3)));
  EXPECT_TRUE(s.omegas.isZero(0.0));
  EXPECT_LE(s.unitarity_residual(), 1e-12);
}

TEST(SkewSpectral, RandomMatricesSatisfyInvariants) {
  std::mt19937_64 rng(7);
  for (int d = 2; d <= 7; ++d) {
    const Mat b = test::random_skew(d, rng, 3.0);
    const SkewSpectrum s = skew_spectral(SkewMatrix(b));
    EXPECT_LE(s.unitarity_residual(), 1e-12) << "d=" << d;
    EXPECT_LE(s.reconstruction_residual(),
              1e-12 * std::max(1.0, SkewMatrix(b).norm_inf()))
        << "d=" << d;
    // Eigenvalues come in ±ω pairs.
    for (int j = 0; j < d; ++j) {
      EXPECT_NEAR(s.omegas(j), -s.omegas(d - 1 - j), 1e-12);
    }
    if (d % 2 == 1) {
      EXPECT_NEAR(s.omegas(d / 2), 0.0, 1e-12);
    }
  }
}

TEST(PhiScalar, ValuesAtZero) {
  EXPECT_EQ(phi_scalar(0, 0.0), Complex(1.0));
  EXPECT_EQ(phi_scalar(1, 0.0), Complex(1.0));
  EXPECT_NEAR(std::abs(phi_scalar(2, 0.0) - 0.5), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(phi_scalar(3, 0.0) - 1.0 / 6.0), 0.0, 1e-16);
}

TEST(PhiScalar, PhiOneAtIPi) {
  const Complex v = phi_scalar(1, Complex(0.0, std::numbers::pi));
  EXPECT_NEAR(v.real(), 0.0, 1e-15);
  EXPECT_NEAR(v.imag(), 2.0 / std::numbers::pi, 1e-15);
}

TEST(PhiScalar, PhiTwoMatchesAdaptiveQuadrature) {
  using boost::math::quadrature::gauss_kronrod;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> log_mag(std::log(1e-8), std::log(10.0));
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (int n = 0; n < 100; ++n) {
    const Complex z = std::polar(std::exp(log_mag(rng)), angle(rng));
    auto re = [&](double s) { return std::real(std::exp((1.0 - s) * z)) * s; };
    auto im = [&](double s) { return std::imag(std::exp((1.0 - s) * z)) * s; };
    const Complex oracle(gauss_kronrod<double, 61>::integrate(re, 0.0, 1.0, 15, 1e-15),
                         gauss_kronrod<double, 61>::integrate(im, 0.0, 1.0, 15, 1e-15));
    const Complex got = phi_scalar(2, z);
    EXPECT_LE(std::abs(got - oracle), 1e-12 * std::abs(oracle)) << "z=" << z;
  }
}

TEST(PhiScalar, RecurrenceAcrossSeriesThreshold) {
  for (double r : {0.5, 0.9, 0.999, 1.0, 1.001, 1.5, 4.0}) {
    const Complex z = std::polar(r, 0.3);
    for (int k = 1; k <= 4; ++k) {
      double fact = 1.0;
      for (int j = 2; j < k; ++j) fact *= j;
      const Complex lhs = phi_scalar(k, z) * z;
      const Complex rhs = phi_scalar(k - 1, z) - 1.0 / fact;
      EXPECT_LE(std::abs(lhs - rhs), 1e-14) << "k=" << k << " r=" << r;
    }
  }
}

TEST(PhiTable, PhiOneAtZeroScaleIsIdentity) {
  PhiTable t(skew_spectral(SkewMatrix(field_matrix())), 1.0);
  EXPECT_TRUE(t.phi(1, 0.0).isApprox(Mat::Identity(3, 3), 1e-15));
}

TEST(PhiTable, PhiZeroIsARotation) {
  PhiTable t(skew_spectral(SkewMatrix(field_matrix())), 7.3);
  for (double tau : {0.25, 0.5, 1.0, -1.0}) {
    const Mat q = t.phi(0, tau);
    EXPECT_LE((q.transpose() * q - Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(q.determinant(), 1.0, 1e-10);
  }
}

TEST(PhiTable, PhiOneMatchesTaylorSum) {
  const double eps = 0.05, h = 0.05;
  PhiTable t(skew_spectral(SkewMatrix(field_matrix())), h / eps);
  const Mat m = (h / eps) * field_matrix();
  // φ₁(M) = Σ M^j/(j+1)!
  Mat sum = Mat::Zero(3, 3);
  Mat term = Mat::Identity(3, 3);
  for (int j = 0; j <= 30; ++j) {
    sum += term / std::tgamma(j + 2.0);
    term = term * m;
  }
  EXPECT_LE((t.phi(1, 1.0) - sum).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PhiTable, MatrixRecurrenceOnRandomSkew) {
  std::mt19937_64 rng(3);
  for (int d : {2, 3, 5}) {
    const Mat b = test::random_skew(d, rng, 2.0);
    PhiTable t(skew_spectral(SkewMatrix(b)), 1.7);
    for (double tau : {0.0, 0.1, 0.5, 1.0, 2.0}) {
      const Mat m = tau * 1.7 * b;
      double fact = 1.0;
      for (int k = 1; k <= 3; ++k) {
        const Mat r = t.phi(k, tau) * m - t.phi(k - 1, tau) +
                      Mat::Identity(d, d) / fact;
        EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-10) << "d=" << d << " k=" << k;
        fact *= k;
      }
    }
  }
}

TEST(PhiTable, MatfunBasics) {
  PhiTable t(skew_spectral(SkewMatrix(field_matrix())), 0.8);
  const Mat one = t.matfun([](Complex) { return Complex(1.0); }, 1.0);
  EXPECT_TRUE(one.isApprox(Mat::Identity(3, 3), 1e-14));
  const Mat e = t.matfun([](Complex z) { return std::exp(z); }, 1.0);
  EXPECT_TRUE(e.isApprox(t.phi(0, 1.0), 1e-14));
}

TEST(PhiTable, RatioAtZeroArgument) {
  PhiTable t(skew_spectral(SkewMatrix(field_matrix())), 0.0);
  const Mat r = t.matfun_ratio([](Complex z) { return phi_scalar(2, z); },
                               [](Complex z) { return phi_scalar(1, -z); }, 1.0);
  EXPECT_TRUE(r.isApprox(0.5 * Mat::Identity(3, 3), 1e-15));
}

TEST(PhiTable, RatioRefusesResonance) {
  Mat a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  PhiTable t(skew_spectral(SkewMatrix(a)), 2.0 * std::numbers::pi);
  EXPECT_THROW(t.matfun_ratio([](Complex) { return Complex(1.0); },
                              [](Complex z) { return phi_scalar(1, -z); }, 1.0),
               NearSingularCoefficient);
}

TEST(PhiTable, CacheReturnsSameValues) {
  PhiTable t(skew_spectral(SkewMatrix(field_matrix())), 1.3);
  const Mat first = t.phi(2, 0.5);
  const Mat second = t.phi(2, 0.5);
  EXPECT_TRUE((first - second).isZero(0.0));
}

}  // namespace
}  // namespace aei
