#pragma once

// Empirical certification of the structural properties of the integrators:
// symplecticity conditions on the scalar coefficient functions, numerical
// symplecticity of the canonical one-step map, symmetry, energy drift,
// convergence tables and step-size resonance scans.

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "aei/integrators.hpp"
#include "aei/model.hpp"
#include "aei/reference.hpp"

namespace aei {

// ---------------------------------------------------------------------------
// Symplecticity conditions on the coefficient functions.
//
// For K = i·k the three families are checked scalar-wise:
//   (1) γ_j(K) - K·β_j(K) = d_j, constant in K
//   (2) γ_j[φ̄₁(K) - c_j·φ̄₁(c_jK)] = β_j[e^{-K} + K·φ̄₁(K) - c_jK·φ̄₁(c_jK)]
//   (3) β̄_i·γ_j - ½K·β̄_i·β_j - ᾱ_ji·(γ_j - Kβ_j)
//         = β_j·γ̄_i + ½K·β_j·β̄_i - α_ij·(γ̄_i + Kβ̄_i)
// where the bar is complex conjugation of the function value.

struct ConditionResidual {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  std::vector<Complex> d;  // d_j from the first sample

  double max() const { return std::max({r1, r2, r3}); }
};

ConditionResidual symplectic_condition_residual(MethodId id, std::span<const double> k_samples);
// Samples k = (h/ε)·ω_j over the spectrum's eigenvalues.
ConditionResidual symplectic_condition_residual(MethodId id, const SkewSpectrum& spectrum, double h,
                           double eps);

// ---------------------------------------------------------------------------
// Maps in canonical variables.

using CanonicalMap = std::function<CanonicalState(const CanonicalState&)>;

// ‖JᵀSJ - S‖∞ (max row sum) with J the central-difference Jacobian of `map`
// at `at` and S = [[0, I], [-I, 0]].
double symplecticity_residual(const CanonicalMap& map, const CanonicalState& at,
                              double delta);

// The one-step map (x, p) ↦ (x', p') of the method. delta <= 0 selects
// 1e-5·max(1, ‖(x, p)‖∞).
double symplecticity_residual(MethodId id, const Problem& prob, const State& s,
                              double h, double delta = 0.0,
                              const Em1Options& em1 = {});

// ‖step(-h)(step(h)(s)) - s‖∞ / max(1, ‖s‖∞) over (x, v).
double symmetry_residual(MethodId id, const Problem& prob, const State& s,
                         double h, const Em1Options& em1 = {});

// ---------------------------------------------------------------------------
// Energy drift.

struct DriftSeries {
  std::vector<double> times;
  std::vector<double> err;  // (E_n - E_0)/E_0
  double max_abs = 0.0;
  // max|ERR| on the second half of the time span over the first half,
  // denominator floored at 1e-15.
  double secular_ratio = 0.0;
};

DriftSeries energy_drift(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Convergence.

struct ConvergenceRow {
  double epsilon;
  double h;
  double err_x;  // |x_n - x(T)| / |x(T)|
  double err_v;
  bool skipped;  // h > ε for a method whose bound needs h <= C·ε
};

struct ConvergenceTable {
  std::string method;
  double t_end = 1.0;
  std::vector<ConvergenceRow> rows;  // sorted by (ε, h)

  std::vector<double> epsilons() const;
  std::vector<double> step_sizes() const;
  // Least-squares slope of log err against log h at fixed ε.
  double slope_x(double eps) const;
  double slope_v(double eps) const;
  // max over ε of err_x at this h (non-skipped rows only).
  double uniform_err_x(double h) const;
  // max/min over ε of err_x at this h; NaN unless every ε has the row.
  double spread_x(double h) const;
  const ConvergenceRow* find(double eps, double h) const;
};

// Least-squares slope of log(err) against log(h).
double fit_slope(std::span<const double> h, std::span<const double> err);

bool needs_h_below_eps(MethodId id);

struct ConvergenceOptions {
  double reference_tol = 1e-12;
  Em1Options em1{};
  int workers = 0;  // 0: hardware concurrency
};

// Steps h = 2^-i for i in `exponents` on [0, T] of builtin_problem(ε).
ConvergenceTable convergence_study(MethodId id, std::span<const double> eps_list,
                                   std::span<const int> exponents, double t_end,
                                   const ConvergenceOptions& opts = {});
// Same on an arbitrary problem family.
ConvergenceTable convergence_study(
    MethodId id, const std::function<Problem(double)>& family,
    std::span<const double> eps_list, std::span<const double> steps,
    double t_end, const ConvergenceOptions& opts = {});

// ---------------------------------------------------------------------------
// Resonance.

struct ResonancePoint {
  double ratio;             // h/ε
  double ratio_times_norm;  // (h/ε)·‖B‖₂
  double err_x;             // +inf when coefficients are singular or the run blew up
  bool singular;
};

struct ResonanceOptions {
  double reference_tol = 1e-12;
  Em1Options em1{};
  int workers = 0;
};

std::vector<ResonancePoint> resonance_scan(MethodId id, double eps,
                                           std::span<const double> ratios,
                                           double t_end,
                                           const ResonanceOptions& opts = {});

// Evenly spaced ratios (0, upper]: upper·k/count, k = 1..count.
std::vector<double> ratio_grid(double upper, int count);

// ---------------------------------------------------------------------------
// Aggregated verification suite.

struct CheckResult {
  std::string check;
  std::string method;
  double value;
  double threshold;
  bool upper_bound;  // pass iff value <= threshold (else value >= threshold)
  bool pass;
};

CheckResult make_check(std::string check, std::string method, double value,
                       double threshold, bool upper_bound);

struct VerifyOptions {
  std::uint64_t seed = 42;
  double drift_t_end = 1000.0;  // EM1 conservation horizon at ε = h = 0.05
  Em1Options em1{};
};

// φ-function checks: recurrence, reality, orthogonality of φ₀ and the
// quadrature oracle of the defining integral.
std::vector<CheckResult> phi_checks(std::uint64_t seed);

// Every structural check; deterministic in the seed.
std::vector<CheckResult> verification_suite(const VerifyOptions& opts);

// Runs fn(i) for i in [0, n) on a bounded pool of threads.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace aei
