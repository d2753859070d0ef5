#include "aei/reference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aei/errors.hpp"

namespace aei {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// b - b̂ (error weights).
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                 e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

class FirstOrderSystem {
 public:
  explicit FirstOrderSystem(const Problem& prob)
      : prob_(prob), omega_(prob.b().entries() / prob.epsilon()),
        d_(prob.dim()) {}

  Vec operator()(const Vec& y) const {
    Vec dy(2 * d_);
    const auto x = y.head(d_);
    const auto v = y.tail(d_);
    dy.head(d_) = v;
    dy.tail(d_) = omega_ * v + prob_.force(x);
    return dy;
  }

 private:
  const Problem& prob_;
  Mat omega_;
  int d_;
};

}  // namespace

std::vector<State> reference_states(const Problem& prob,
                                    const std::vector<double>& times,
                                    const ReferenceOptions& opts,
                                    ReferenceStats* stats) {
  if (!(opts.tol >= 1e-13 && opts.tol <= 1e-6)) {
    throw InvalidArgument("reference_solve: tol must lie in [1e-13, 1e-6]");
  }
  if (!std::is_sorted(times.begin(), times.end()) ||
      (!times.empty() && times.front() < 0.0)) {
    throw InvalidArgument("reference_solve: times must be sorted and >= 0");
  }
  std::vector<State> out;
  if (times.empty()) return out;

  const int d = prob.dim();
  const FirstOrderSystem f(prob);
  const double t_max = times.back();
  const double h_floor = 1e-14 * std::max(t_max, 1e-300);

  Vec y(2 * d);
  y << prob.x0(), prob.v0();
  double t = 0.0;
  Vec k1 = f(y);

  // Initial step guess from the scale of the derivative.
  auto err_scale = [&](const Vec& a, const Vec& b) {
    return (opts.tol + opts.tol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array())
        .matrix();
  };
  double h = 0.01 * std::pow(opts.tol, 0.2) /
             std::max(1e-10, k1.cwiseAbs().maxCoeff() /
                                 std::max(1.0, y.cwiseAbs().maxCoeff()));
  h = std::min(h, std::max(t_max, 1e-300));
  double err_prev = 1e-4;
  ReferenceStats local;

  for (double target : times) {
    while (t < target) {
      if (local.accepted + local.rejected > opts.max_steps) {
        throw StepSizeUnderflow("reference_solve: step budget exhausted");
      }
      const double remaining = target - t;
      bool clipped = false;
      double step = h;
      if (step >= remaining) {
        step = remaining;
        clipped = true;
      }

      const Vec k2 = f(y + step * (a21 * k1));
      const Vec k3 = f(y + step * (a31 * k1 + a32 * k2));
      const Vec k4 = f(y + step * (a41 * k1 + a42 * k2 + a43 * k3));
      const Vec k5 = f(y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Vec k6 = f(y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 +
                                   a65 * k5));
      Vec y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Vec k7 = f(y_new);
      const Vec err_vec =
          step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const Vec scale = err_scale(y, y_new);
      const double err = std::sqrt(
          (err_vec.array() / scale.array()).square().mean());

      if (!std::isfinite(err)) {
        h = 0.2 * step;
        ++local.rejected;
      } else if (err <= 1.0) {
        // PI controller (Gustafsson), exponents 0.7/5 and 0.4/5.
        double factor = opts.safety * std::pow(err, -0.14) *
                        std::pow(err_prev, 0.08);
        factor = std::clamp(factor, opts.min_shrink, opts.max_growth);
        err_prev = std::max(err, 1e-4);
        t = clipped ? target : t + step;
        y = std::move(y_new);
        k1 = k7;
        ++local.accepted;
        // A clipped step says nothing about the natural step size.
        if (!clipped) h = step * factor;
      } else {
        const double factor =
            std::max(opts.min_shrink, opts.safety * std::pow(err, -0.2));
        h = step * factor;
        ++local.rejected;
      }
      if (h < h_floor) {
        throw StepSizeUnderflow("reference_solve: step " + std::to_string(h) +
                                " below floor at t=" + std::to_string(t));
      }
    }
    out.push_back({target, y.head(d), y.tail(d)});
  }
  if (stats) *stats = local;
  return out;
}

Trajectory reference_solve(const Problem& prob,
                           const std::vector<double>& times, double tol) {
  ReferenceOptions opts;
  opts.tol = tol;
  Trajectory traj;
  traj.method = "reference";
  traj.epsilon = prob.epsilon();
  for (auto& s : reference_states(prob, times, opts)) {
    const double e = energy(prob, s);
    traj.samples.push_back({s.t, std::move(s.x), std::move(s.v), e});
  }
  return traj;
}

State reference_state(const Problem& prob, double t_end, double tol) {
  ReferenceOptions opts;
  opts.tol = tol;
  return reference_states(prob, {t_end}, opts).front();
}

}  // namespace aei
