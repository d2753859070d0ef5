#include "aei/integrators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "aei/errors.hpp"

namespace aei {

namespace {

constexpr std::array<std::pair<MethodId, std::string_view>, 7> kNames{{
    {MethodId::M1, "M1"},
    {MethodId::M2, "M2"},
    {MethodId::SM1, "SM1"},
    {MethodId::SM2, "SM2"},
    {MethodId::SM3, "SM3"},
    {MethodId::EM1, "EM1"},
    {MethodId::SE, "SE"},
}};

Complex phi(int k, Complex z) { return phi_scalar(k, z); }

}  // namespace

std::string_view to_string(MethodId id) {
  for (const auto& [m, name] : kNames) {
    if (m == id) return name;
  }
  return "?";
}

std::optional<MethodId> parse_method(std::string_view name) {
  for (const auto& [m, n] : kNames) {
    if (n == name) return m;
  }
  return std::nullopt;
}

const std::vector<MethodId>& all_methods() {
  static const std::vector<MethodId> methods{MethodId::M1,  MethodId::M2,
                                             MethodId::SM1, MethodId::SM2,
                                             MethodId::SM3, MethodId::EM1};
  return methods;
}

bool is_explicit_aei(MethodId id) {
  return id != MethodId::EM1 && id != MethodId::SE;
}

// ---------------------------------------------------------------------------
// Tableaux

double RKTableau::consistency_residual() const {
  double sum = 0.0;
  for (double bi : b) sum += bi;
  return std::abs(sum - 1.0);
}

double RKTableau::symplecticity_residual() const {
  double worst = 0.0;
  const int s = stages();
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      worst = std::max(worst, std::abs(b[i] * a(i, j) + b[j] * a(j, i) -
                                       b[i] * b[j]));
    }
  }
  return worst;
}

// Implicit midpoint.
RKTableau RKTableau::sm1() {
  Mat a(1, 1);
  a << 0.5;
  return {{0.5}, a, {1.0}, true};
}

// Trapezoidal (Lobatto IIIA) tableau. It is not a symplectic RK method, but
// only c, a21 and b reach the exponential scheme, and with b = (1/2, 1/2)
// the resulting method satisfies the exponential symplecticity conditions
// (its hΩ → 0 limit is velocity Verlet).
RKTableau RKTableau::sm2() {
  Mat a(2, 2);
  a << 0.0, 0.0,
       0.5, 0.5;
  return {{0.0, 1.0}, a, {0.5, 0.5}, false};
}

// Two implicit midpoint half steps.
RKTableau RKTableau::sm3() {
  Mat a(2, 2);
  a << 0.25, 0.0,
       0.5, 0.25;
  return {{0.25, 0.75}, a, {0.5, 0.5}, true};
}

// ---------------------------------------------------------------------------
// Coefficients

ScalarCoefficients rk_to_aei_scalar(const RKTableau& tab, Complex k) {
  const int s = tab.stages();
  ScalarCoefficients out{tab.c, Eigen::MatrixXcd::Zero(s, s),
                         Eigen::VectorXcd(s), Eigen::VectorXcd(s)};
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < i; ++j) {
      const double dc = tab.c[i] - tab.c[j];
      out.alpha(i, j) = tab.a(i, j) * dc * phi(1, dc * k);
    }
    const double rest = 1.0 - tab.c[i];
    out.beta[i] = tab.b[i] * rest * phi(1, rest * k);
    out.gamma[i] = tab.b[i] * std::exp(rest * k);
  }
  return out;
}

ScalarCoefficients scalar_coefficients(MethodId id, Complex k) {
  switch (id) {
    case MethodId::M1: {
      ScalarCoefficients out{{0.0}, Eigen::MatrixXcd::Zero(1, 1),
                             Eigen::VectorXcd(1), Eigen::VectorXcd(1)};
      out.beta[0] = phi(2, k);
      out.gamma[0] = phi(1, k);
      return out;
    }
    case MethodId::M2: {
      ScalarCoefficients out{{0.0, 1.0}, Eigen::MatrixXcd::Zero(2, 2),
                             Eigen::VectorXcd(2), Eigen::VectorXcd(2)};
      out.alpha(1, 0) = phi(2, k);  // X_2 = x_{n+1}
      out.beta[0] = phi(2, k);
      out.beta[1] = 0.0;
      out.gamma[0] = phi(2, k) / phi(1, -k);
      out.gamma[1] = std::exp(k) * phi(2, -k) / phi(1, k);
      return out;
    }
    case MethodId::SM1:
      return rk_to_aei_scalar(RKTableau::sm1(), k);
    case MethodId::SM2:
      return rk_to_aei_scalar(RKTableau::sm2(), k);
    case MethodId::SM3:
      return rk_to_aei_scalar(RKTableau::sm3(), k);
    case MethodId::EM1:
    case MethodId::SE:
      break;
  }
  throw InvalidArgument("scalar_coefficients: " + std::string(to_string(id)) +
                        " is not an explicit stage method");
}

AeiCoefficients rk_to_aei(const RKTableau& tab, const PhiTable& table) {
  const int s = tab.stages();
  const int d = table.dim();
  AeiCoefficients out;
  out.alpha.assign(s, std::vector<Mat>(s, Mat::Zero(d, d)));
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < i; ++j) {
      const double dc = tab.c[i] - tab.c[j];
      out.alpha[i][j] = tab.a(i, j) * dc * table.phi(1, dc);
    }
    const double rest = 1.0 - tab.c[i];
    out.beta.push_back(tab.b[i] * rest * table.phi(1, rest));
    out.gamma.push_back(tab.b[i] * table.phi(0, rest));
  }
  return out;
}

QuadratureRule gauss_legendre(int order) {
  if (order < 1) throw InvalidArgument("gauss_legendre: order must be >= 1");
  // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
  Mat jacobi = Mat::Zero(order, order);
  for (int i = 1; i < order; ++i) {
    const double beta = i / std::sqrt(4.0 * i * i - 1.0);
    jacobi(i, i - 1) = beta;
    jacobi(i - 1, i) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(jacobi);
  QuadratureRule rule;
  for (int i = 0; i < order; ++i) {
    const double node = solver.eigenvalues()[i];
    const double w = solver.eigenvectors()(0, i);
    rule.nodes.push_back(0.5 * (node + 1.0));
    rule.weights.push_back(w * w);  // 2·w²/2 on [0, 1]
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Method construction

MethodSpec make_method(MethodId id, const Problem& prob, double h,
                       const Em1Options& em1) {
  if (!(std::isfinite(h) && h != 0.0)) {
    throw InvalidArgument("make_method: step size must be finite and nonzero");
  }
  const int d = prob.dim();
  const PhiTable table(skew_spectral(prob.b()), h / prob.epsilon());

  MethodSpec m{};
  m.id = id;
  m.h = h;
  m.epsilon = prob.epsilon();
  m.exp_h_omega = table.phi(0, 1.0);
  m.phi1_h_omega = table.phi(1, 1.0);

  auto set_rk = [&](const RKTableau& tab) {
    AeiCoefficients coeffs = rk_to_aei(tab, table);
    m.stages = tab.stages();
    m.c = tab.c;
    m.alpha = std::move(coeffs.alpha);
    m.beta = std::move(coeffs.beta);
    m.gamma = std::move(coeffs.gamma);
    m.symmetric = true;
    m.symplectic = true;
  };

  switch (id) {
    case MethodId::M1:
      m.stages = 1;
      m.c = {0.0};
      m.alpha = {{Mat::Zero(d, d)}};
      m.beta = {table.phi(2, 1.0)};
      m.gamma = {table.phi(1, 1.0)};
      break;
    case MethodId::M2: {
      m.stages = 2;
      m.c = {0.0, 1.0};
      const Mat phi2 = table.phi(2, 1.0);
      m.alpha = {{Mat::Zero(d, d), Mat::Zero(d, d)}, {phi2, Mat::Zero(d, d)}};
      m.beta = {phi2, Mat::Zero(d, d)};
      m.gamma = {
          table.matfun_ratio([](Complex z) { return phi(2, z); },
                             [](Complex z) { return phi(1, -z); }, 1.0),
          table.matfun_ratio(
              [](Complex z) { return std::exp(z) * phi(2, -z); },
              [](Complex z) { return phi(1, z); }, 1.0)};
      m.symmetric = true;
      break;
    }
    case MethodId::SM1:
      set_rk(RKTableau::sm1());
      break;
    case MethodId::SM2:
      set_rk(RKTableau::sm2());
      break;
    case MethodId::SM3:
      set_rk(RKTableau::sm3());
      break;
    case MethodId::EM1:
      if (em1.quad_order < 2 || !(em1.fp_tol > 0.0) || em1.fp_max < 1) {
        throw InvalidArgument("make_method: invalid EM1 options");
      }
      m.stages = 0;
      m.phi2_h_omega = table.phi(2, 1.0);
      m.em1 = em1;
      m.quadrature = gauss_legendre(em1.quad_order);
      m.symmetric = true;
      m.energy_preserving = true;
      break;
    case MethodId::SE: {
      m.stages = 1;
      const Mat half = h * prob.b().entries() / (2.0 * prob.epsilon());
      m.se_solve = (Mat::Identity(d, d) - half).partialPivLu().inverse();
      m.symplectic = true;
      break;
    }
  }

  for (int i = 0; i < m.stages && is_explicit_aei(id); ++i) {
    m.stage_propagators.push_back(m.c[i] * h * table.phi(1, m.c[i]));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Steps

namespace {

void require_finite(const State& s, MethodId id) {
  if (!s.x.allFinite() || !s.v.allFinite()) {
    throw NonFinite(std::string(to_string(id)) + ": non-finite state at t=" +
                    std::to_string(s.t));
  }
}

}  // namespace

StepReport aei_step(const MethodSpec& m, const Problem& prob, const State& s) {
  if (!is_explicit_aei(m.id)) {
    throw InvalidArgument("aei_step: method is not an explicit stage method");
  }
  const double h = m.h;
  const double h2 = h * h;
  std::vector<Vec> forces;
  forces.reserve(m.stages);
  for (int i = 0; i < m.stages; ++i) {
    Vec stage = s.x + m.stage_propagators[i] * s.v;
    for (int j = 0; j < i; ++j) stage.noalias() += h2 * (m.alpha[i][j] * forces[j]);
    forces.push_back(prob.force(stage));
  }

  StepReport report;
  report.next.t = s.t + h;
  report.next.x = s.x + h * (m.phi1_h_omega * s.v);
  report.next.v = m.exp_h_omega * s.v;
  for (int i = 0; i < m.stages; ++i) {
    report.next.x.noalias() += h2 * (m.beta[i] * forces[i]);
    report.next.v.noalias() += h * (m.gamma[i] * forces[i]);
  }
  require_finite(report.next, m.id);
  return report;
}

StepReport em1_step(const MethodSpec& m, const Problem& prob, const State& s) {
  if (m.id != MethodId::EM1) {
    throw InvalidArgument("em1_step: method is not EM1");
  }
  const double h = m.h;
  const auto& rule = m.quadrature;
  auto chord_average = [&](const Vec& end) {
    const Vec delta = end - s.x;
    Vec sum = Vec::Zero(s.x.size());
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      sum.noalias() += rule.weights[q] * prob.force(s.x + rule.nodes[q] * delta);
    }
    return sum;
  };

  const Vec base = s.x + h * (m.phi1_h_omega * s.v);
  const Mat kick = h * h * m.phi2_h_omega;
  Vec x_next = base;
  StepReport report;
  report.fp_converged = false;
  for (int it = 1; it <= m.em1.fp_max; ++it) {
    Vec updated = base + kick * chord_average(x_next);
    report.fp_residual = (updated - x_next).cwiseAbs().maxCoeff();
    report.fp_iterations = it;
    x_next = std::move(updated);
    if (report.fp_residual <= m.em1.fp_tol) {
      report.fp_converged = true;
      break;
    }
    if (!std::isfinite(report.fp_residual)) break;
  }

  report.next.t = s.t + h;
  report.next.v = m.exp_h_omega * s.v + h * (m.phi1_h_omega * chord_average(x_next));
  report.next.x = std::move(x_next);
  require_finite(report.next, m.id);
  return report;
}

StepReport se_step(const MethodSpec& m, const Problem& prob, const State& s) {
  if (m.id != MethodId::SE) {
    throw InvalidArgument("se_step: method is not SE");
  }
  const double h = m.h;
  const Mat half_b = prob.b().entries() / (2.0 * prob.epsilon());
  const Vec p = s.v - half_b * s.x;
  const Vec p_next =
      m.se_solve * (p + h * (half_b * (half_b * s.x)) + h * prob.force(s.x));
  StepReport report;
  report.next.t = s.t + h;
  report.next.x = s.x + h * (p_next + half_b * s.x);
  report.next.v = p_next + half_b * report.next.x;
  require_finite(report.next, m.id);
  return report;
}

StepReport step(const MethodSpec& m, const Problem& prob, const State& s) {
  switch (m.id) {
    case MethodId::EM1:
      return em1_step(m, prob, s);
    case MethodId::SE:
      return se_step(m, prob, s);
    default:
      return aei_step(m, prob, s);
  }
}

Trajectory integrate(const MethodSpec& m, const Problem& prob, double t_end,
                     int stride) {
  if (!(t_end > 0.0) || !(m.h > 0.0) || m.h > t_end * (1.0 + 1e-12)) {
    throw InvalidArgument("integrate: need 0 < h <= T");
  }
  if (stride < 1) throw InvalidArgument("integrate: stride must be >= 1");

  const long n = std::lround(t_end / m.h);
  Trajectory traj;
  traj.stride = stride;
  traj.method = std::string(to_string(m.id));
  traj.h = m.h;
  traj.epsilon = prob.epsilon();
  traj.samples.reserve(static_cast<std::size_t>(n / stride + 2));

  State s = prob.initial_state();
  traj.samples.push_back({0.0, s.x, s.v, energy(prob, s)});
  bool left_compact_set = false;
  for (long k = 1; k <= n; ++k) {
    try {
      StepReport r = step(m, prob, s);
      traj.fp_max_iterations = std::max(traj.fp_max_iterations, r.fp_iterations);
      if (!r.fp_converged) ++traj.fp_unconverged_steps;
      s = std::move(r.next);
    } catch (const NonFinite& e) {
      traj.aborted = true;
      traj.abort_reason = e.what();
      return traj;
    }
    s.t = static_cast<double>(k) * m.h;
    if (!left_compact_set && s.x.cwiseAbs().maxCoeff() > 1e3) {
      left_compact_set = true;
      traj.diagnostics.push_back("|x| exceeded 1e3 at t=" + std::to_string(s.t));
    }
    if (k % stride == 0) {
      traj.samples.push_back({s.t, s.x, s.v, energy(prob, s)});
    }
  }
  return traj;
}

}  // namespace aei
