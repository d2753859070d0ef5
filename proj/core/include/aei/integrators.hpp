#pragma once

// One-step adaptive exponential integrators for ẍ = (1/ε)B·ẋ + F(x).
//
// The explicit s-stage schemes share the form
//
//   X_i     = x_n + c_i·h·φ₁(c_i·hΩ)·v_n + h²·Σ_j α_ij(hΩ)·F(X_j)
//   x_{n+1} = x_n + h·φ₁(hΩ)·v_n + h²·Σ_i β_i(hΩ)·F(X_i)
//   v_{n+1} = e^{hΩ}·v_n + h·Σ_i γ_i(hΩ)·F(X_i)
//
// with Ω = B/ε and α strictly lower triangular. EM1 replaces the stage sum
// by the average of F along the chord [x_n, x_{n+1}] and is solved by
// fixed-point iteration.

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aei/model.hpp"
#include "aei/spectral.hpp"

namespace aei {

// SE is the symplectic Euler comparison baseline on the (x, p) form.
enum class MethodId { M1, M2, SM1, SM2, SM3, EM1, SE };

std::string_view to_string(MethodId id);
std::optional<MethodId> parse_method(std::string_view name);
const std::vector<MethodId>& all_methods();  // the six exponential methods

bool is_explicit_aei(MethodId id);

// Diagonally implicit RK tableau. Only the strictly lower part of A enters
// the exponential method, because the diagonal terms carry a (c_i - c_i)
// factor.
struct RKTableau {
  std::vector<double> c;
  Mat a;
  std::vector<double> b;
  bool symplectic = false;

  int stages() const { return static_cast<int>(c.size()); }
  // |Σb - 1|
  double consistency_residual() const;
  // max_ij |b_i a_ij + b_j a_ji - b_i b_j|
  double symplecticity_residual() const;

  static RKTableau sm1();
  static RKTableau sm2();
  static RKTableau sm3();
};

// Scalar coefficient functions of an explicit method evaluated at one
// complex argument K (an eigenvalue of hΩ).
struct ScalarCoefficients {
  std::vector<double> c;
  Eigen::MatrixXcd alpha;
  Eigen::VectorXcd beta;
  Eigen::VectorXcd gamma;

  int stages() const { return static_cast<int>(c.size()); }
};

ScalarCoefficients rk_to_aei_scalar(const RKTableau& tab, Complex k);
// Throws InvalidArgument for EM1 and SE.
ScalarCoefficients scalar_coefficients(MethodId id, Complex k);

struct AeiCoefficients {
  std::vector<std::vector<Mat>> alpha;  // s×s, each d×d
  std::vector<Mat> beta;
  std::vector<Mat> gamma;
};

// α_ij = a_ij(c_i-c_j)φ₁((c_i-c_j)hΩ), β_i = b_i(1-c_i)φ₁((1-c_i)hΩ),
// γ_i = b_i·e^{(1-c_i)hΩ}; the table must be built with scale h/ε.
AeiCoefficients rk_to_aei(const RKTableau& tab, const PhiTable& table);

struct Em1Options {
  int quad_order = 5;
  double fp_tol = 1e-14;
  int fp_max = 10;
};

// Gauss-Legendre rule on [0, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(int order);

struct MethodSpec {
  MethodId id;
  double h;
  double epsilon;
  int stages;
  std::vector<double> c;
  std::vector<std::vector<Mat>> alpha;
  std::vector<Mat> beta;
  std::vector<Mat> gamma;
  std::vector<Mat> stage_propagators;  // c_i·h·φ₁(c_i·hΩ)
  Mat exp_h_omega;
  Mat phi1_h_omega;
  Mat phi2_h_omega;  // EM1 only
  bool symmetric = false;
  bool symplectic = false;
  bool energy_preserving = false;
  Em1Options em1;  // EM1 only
  QuadratureRule quadrature;  // EM1 only
  Mat se_solve;  // SE only: (I - hB/(2ε))⁻¹
};

// Precomputes all coefficient matrices for (problem, h). h may be negative
// (used for the adjoint round trip). Throws NearSingularCoefficient when a
// reciprocal coefficient hits a step-size resonance.
MethodSpec make_method(MethodId id, const Problem& prob, double h,
                       const Em1Options& em1 = {});

struct StepReport {
  State next;
  int fp_iterations = 0;
  bool fp_converged = true;
  double fp_residual = 0.0;
};

// Explicit scheme step. Throws NonFinite if the result overflows.
StepReport aei_step(const MethodSpec& m, const Problem& prob, const State& s);
StepReport em1_step(const MethodSpec& m, const Problem& prob, const State& s);
StepReport se_step(const MethodSpec& m, const Problem& prob, const State& s);
// Dispatches on m.id.
StepReport step(const MethodSpec& m, const Problem& prob, const State& s);

struct Sample {
  double t;
  Vec x;
  Vec v;
  double energy;
};

struct Trajectory {
  std::vector<Sample> samples;
  int stride = 1;
  std::string method;
  double h = 0.0;
  double epsilon = 0.0;
  // Set when a step produced Inf/NaN; samples hold everything before it.
  bool aborted = false;
  std::string abort_reason;
  // Non-fatal observations, e.g. |x| leaving the expected compact set.
  std::vector<std::string> diagnostics;
  int fp_max_iterations = 0;
  long fp_unconverged_steps = 0;

  const Sample& back() const { return samples.back(); }
};

// Runs round(T/h) steps from the problem's initial state, recording every
// stride-th state (and the initial one).
Trajectory integrate(const MethodSpec& m, const Problem& prob, double t_end,
                     int stride);

}  // namespace aei
