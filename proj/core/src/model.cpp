#include "aei/model.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "aei/errors.hpp"

namespace aei {

namespace {

double fd_step(double xi) { return 1e-6 * std::max(1.0, std::abs(xi)); }

Vec central_gradient(const PotentialFn& u, const Vec& x) {
  Vec g(x.size());
  Vec probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = fd_step(x[i]);
    probe[i] = x[i] + step;
    const double up = u(probe);
    probe[i] = x[i] - step;
    const double down = u(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace

Problem::Problem(double epsilon, SkewMatrix b, PotentialFn potential,
                 ForceFn force, Vec x0, Vec v0, std::string label)
    : epsilon_(epsilon),
      b_(std::move(b)),
      potential_(std::move(potential)),
      force_(std::move(force)),
      x0_(std::move(x0)),
      v0_(std::move(v0)),
      label_(std::move(label)) {
  if (!(epsilon_ > 0.0 && epsilon_ <= 1.0)) {
    throw InvalidArgument("Problem: epsilon must lie in (0, 1]");
  }
  if (x0_.size() != b_.dim() || v0_.size() != b_.dim()) {
    throw InvalidArgument("Problem: initial data dimension mismatch");
  }
  if (!x0_.allFinite() || !v0_.allFinite()) {
    throw InvalidArgument("Problem: non-finite initial data");
  }
  if (!potential_ || !force_) {
    throw InvalidArgument("Problem: potential and force are required");
  }
}

Problem Problem::from_potential(double epsilon, SkewMatrix b,
                                PotentialFn potential, Vec x0, Vec v0,
                                std::string label) {
  ForceFn force = [u = potential](const Vec& x) -> Vec {
    return -central_gradient(u, x);
  };
  return Problem(epsilon, std::move(b), std::move(potential), std::move(force),
                 std::move(x0), std::move(v0), std::move(label));
}

Problem Problem::with_jacobian(JacobianFn jacobian) const {
  Problem p = *this;
  p.jacobian_ = std::move(jacobian);
  return p;
}

Problem Problem::with_stiffness(Mat k) const {
  Problem p = *this;
  p.stiffness_ = std::move(k);
  return p;
}

Problem Problem::with_initial(Vec x0, Vec v0) const {
  if (x0.size() != dim() || v0.size() != dim()) {
    throw InvalidArgument("Problem: initial data dimension mismatch");
  }
  Problem p = *this;
  p.x0_ = std::move(x0);
  p.v0_ = std::move(v0);
  return p;
}

Problem Problem::with_force(ForceFn force) const {
  Problem p = *this;
  p.force_ = std::move(force);
  return p;
}

double force_consistency_error(const Problem& prob, std::mt19937_64& rng,
                               int samples) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  const int d = prob.dim();
  double worst = 0.0;
  for (int n = 0; n < samples; ++n) {
    Vec dir(d);
    for (int i = 0; i < d; ++i) dir[i] = normal(rng);
    const double radius = std::pow(uniform(rng), 1.0 / d);
    const Vec x = prob.x0() + radius * dir.normalized();
    const Vec residual =
        prob.force(x) +
        central_gradient([&](const Vec& y) { return prob.potential(y); }, x);
    worst = std::max(worst, residual.cwiseAbs().maxCoeff());
  }
  return worst;
}

double energy(const Problem& prob, const Vec& x, const Vec& v) {
  return 0.5 * v.squaredNorm() + prob.potential(x);
}

double hamiltonian(const Problem& prob, const Vec& x, const Vec& p) {
  const Vec v = p + prob.b().entries() * x / (2.0 * prob.epsilon());
  return 0.5 * v.squaredNorm() + prob.potential(x);
}

CanonicalState to_canonical(const Problem& prob, const State& s) {
  return {s.x, s.v - prob.b().entries() * s.x / (2.0 * prob.epsilon())};
}

State from_canonical(const Problem& prob, const CanonicalState& c, double t) {
  return {t, c.x, c.p + prob.b().entries() * c.x / (2.0 * prob.epsilon())};
}

Problem builtin_problem(double epsilon) {
  Mat b(3, 3);
  b << 0.0, 0.2, 0.2,
       -0.2, 0.0, 1.0,
       -0.2, -1.0, 0.0;
  // Horner form per coordinate keeps the evaluation order fixed.
  auto potential = [](const Vec& x) {
    return x[0] * x[0] * x[0] * (1.0 + x[0] / 5.0) +
           x[1] * x[1] * x[1] * (x[1] - 1.0) +
           x[2] * x[2] * x[2] * x[2];
  };
  auto force = [](const Vec& x) {
    Vec f(3);
    f[0] = -x[0] * x[0] * (3.0 + 0.8 * x[0]);
    f[1] = x[1] * x[1] * (3.0 - 4.0 * x[1]);
    f[2] = -4.0 * x[2] * x[2] * x[2];
    return f;
  };
  auto jacobian = [](const Vec& x) {
    Mat j = Mat::Zero(3, 3);
    j(0, 0) = -x[0] * (6.0 + 2.4 * x[0]);
    j(1, 1) = x[1] * (6.0 - 12.0 * x[1]);
    j(2, 2) = -12.0 * x[2] * x[2];
    return j;
  };
  Vec x0(3), v0(3);
  x0 << 0.6, 1.0, -1.0;
  v0 << -1.0, 0.5, 0.6;
  return Problem(epsilon, SkewMatrix(b), potential, force, x0, v0,
                 "charged-particle-quartic")
      .with_jacobian(jacobian);
}

Problem linear_problem(double epsilon, const SkewMatrix& b, const Mat& k,
                       const Vec& x0, const Vec& v0) {
  if (k.rows() != b.dim() || k.cols() != b.dim()) {
    throw InvalidArgument("linear_problem: stiffness dimension mismatch");
  }
  if ((k - k.transpose()).cwiseAbs().maxCoeff() >
      1e-14 * std::max(1.0, k.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("linear_problem: stiffness is not symmetric");
  }
  auto potential = [k](const Vec& x) { return 0.5 * x.dot(k * x); };
  auto force = [k](const Vec& x) -> Vec { return -(k * x); };
  auto jacobian = [k](const Vec&) -> Mat { return -k; };
  return Problem(epsilon, b, potential, force, x0, v0, "linear")
      .with_jacobian(jacobian)
      .with_stiffness(k);
}

State exact_linear_flow(const Problem& prob, const State& from, double dt) {
  if (!prob.stiffness()) {
    throw InvalidArgument("exact_linear_flow: problem is not linear");
  }
  const int d = prob.dim();
  Mat gen = Mat::Zero(2 * d, 2 * d);
  gen.topRightCorner(d, d) = Mat::Identity(d, d);
  gen.bottomLeftCorner(d, d) = -*prob.stiffness();
  gen.bottomRightCorner(d, d) = prob.b().entries() / prob.epsilon();
  const Mat flow = (dt * gen).exp();
  Vec y(2 * d);
  y << from.x, from.v;
  const Vec out = flow * y;
  return {from.t + dt, out.head(d), out.tail(d)};
}

State exact_linear_solution(const Problem& prob, double t) {
  return exact_linear_flow(prob, prob.initial_state(), t);
}

}  // namespace aei
