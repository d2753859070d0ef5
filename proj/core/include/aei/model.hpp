#pragma once

// Problems of the form  ẍ = (1/ε)·B·ẋ + F(x),  F = -∇U,  B skew-symmetric.

#include <functional>
#include <optional>
#include <random>
#include <string>

#include "aei/spectral.hpp"

namespace aei {

using PotentialFn = std::function<double(const Vec&)>;
using ForceFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<Mat(const Vec&)>;

struct State {
  double t = 0.0;
  Vec x;
  Vec v;
};

// (x, p) with p = v - B·x/(2ε).
struct CanonicalState {
  Vec x;
  Vec p;
};

class Problem {
 public:
  // The force must be -∇U; see force_consistency_error().
  Problem(double epsilon, SkewMatrix b, PotentialFn potential, ForceFn force,
          Vec x0, Vec v0, std::string label = {});

  // Force generated from U by central differences, step 1e-6·max(1,|x_i|).
  // Accurate to roughly 1e-8; meant for tests and quick experiments only.
  static Problem from_potential(double epsilon, SkewMatrix b,
                                PotentialFn potential, Vec x0, Vec v0,
                                std::string label = {});

  double epsilon() const { return epsilon_; }
  const SkewMatrix& b() const { return b_; }
  int dim() const { return b_.dim(); }
  const Vec& x0() const { return x0_; }
  const Vec& v0() const { return v0_; }
  const std::string& label() const { return label_; }
  State initial_state() const { return {0.0, x0_, v0_}; }

  double potential(const Vec& x) const { return potential_(x); }
  Vec force(const Vec& x) const { return force_(x); }

  const std::optional<JacobianFn>& force_jacobian() const { return jacobian_; }
  // For linear problems F(x) = -K·x; used by the exact-flow oracle.
  const std::optional<Mat>& stiffness() const { return stiffness_; }

  Problem with_jacobian(JacobianFn jacobian) const;
  Problem with_stiffness(Mat k) const;
  Problem with_initial(Vec x0, Vec v0) const;
  Problem with_force(ForceFn force) const;

 private:
  double epsilon_;
  SkewMatrix b_;
  PotentialFn potential_;
  ForceFn force_;
  std::optional<JacobianFn> jacobian_;
  std::optional<Mat> stiffness_;
  Vec x0_;
  Vec v0_;
  std::string label_;
};

// Max over `samples` random points in the unit ball around x0 of
// ‖F(x) + ∇U(x)‖∞ with ∇U by central differences.
double force_consistency_error(const Problem& prob, std::mt19937_64& rng,
                               int samples = 10);

// E(x, v) = ½|v|² + U(x).
double energy(const Problem& prob, const Vec& x, const Vec& v);
inline double energy(const Problem& prob, const State& s) {
  return energy(prob, s.x, s.v);
}

// H(x, p) = ½|p + B·x/(2ε)|² + U(x).
double hamiltonian(const Problem& prob, const Vec& x, const Vec& p);

CanonicalState to_canonical(const Problem& prob, const State& s);
State from_canonical(const Problem& prob, const CanonicalState& c, double t);

// The 3-d charged-particle benchmark: quartic potential
// U = x1³ - x2³ + x1⁴/5 + x2⁴ + x3⁴ in a constant field.
Problem builtin_problem(double epsilon);

// Linear force F(x) = -K·x with K symmetric positive semidefinite.
Problem linear_problem(double epsilon, const SkewMatrix& b, const Mat& k,
                       const Vec& x0, const Vec& v0);

// Exact flow of a linear problem: exp(t·[[0, I], [-K, B/ε]]) applied to
// (x0, v0), by Padé scaling and squaring.
State exact_linear_solution(const Problem& prob, double t);
// Same flow started from an arbitrary state.
State exact_linear_flow(const Problem& prob, const State& from, double dt);

}  // namespace aei
