#include "aei/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "aei/errors.hpp"

namespace aei {

// ---------------------------------------------------------------------------
// Eq. 17 style conditions

ConditionResidual symplectic_condition_residual(MethodId id, std::span<const double> k_samples) {
  ConditionResidual out;
  if (k_samples.empty()) return out;
  const auto phi1 = [](Complex z) { return phi_scalar(1, z); };
  bool have_d = false;

  for (double k : k_samples) {
    const Complex big_k(0.0, k);
    const ScalarCoefficients co = scalar_coefficients(id, big_k);
    const int s = co.stages();
    if (!have_d) {
      for (int j = 0; j < s; ++j) out.d.push_back(co.gamma[j] - big_k * co.beta[j]);
      have_d = true;
    }
    for (int j = 0; j < s; ++j) {
      const Complex g = co.gamma[j];
      const Complex b = co.beta[j];
      const double c = co.c[j];
      out.r1 = std::max(out.r1, std::abs(g - big_k * b - out.d[j]));

      const Complex phi1_bar = std::conj(phi1(big_k));
      const Complex phi1c_bar = std::conj(phi1(c * big_k));
      const Complex lhs = g * (phi1_bar - c * phi1c_bar);
      const Complex rhs =
          b * (std::exp(-big_k) + big_k * phi1_bar - c * big_k * phi1c_bar);
      out.r2 = std::max(out.r2, std::abs(lhs - rhs));
    }
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) {
        const Complex bi_bar = std::conj(co.beta[i]);
        const Complex gi_bar = std::conj(co.gamma[i]);
        const Complex bj = co.beta[j];
        const Complex gj = co.gamma[j];
        const Complex aji_bar = std::conj(co.alpha(j, i));
        const Complex aij = co.alpha(i, j);
        const Complex lhs = bi_bar * gj - 0.5 * big_k * bi_bar * bj -
                            aji_bar * (gj - big_k * bj);
        const Complex rhs = bj * gi_bar + 0.5 * big_k * bj * bi_bar -
                            aij * (gi_bar + big_k * bi_bar);
        out.r3 = std::max(out.r3, std::abs(lhs - rhs));
      }
    }
  }
  return out;
}

ConditionResidual symplectic_condition_residual(MethodId id, const SkewSpectrum& spectrum, double h,
                           double eps) {
  std::vector<double> ks;
  for (Eigen::Index j = 0; j < spectrum.omegas.size(); ++j) {
    ks.push_back(h / eps * spectrum.omegas[j]);
  }
  return symplectic_condition_residual(id, ks);
}

// ---------------------------------------------------------------------------
// Symplecticity and symmetry

double symplecticity_residual(const CanonicalMap& map, const CanonicalState& at,
                              double delta) {
  const auto d = at.x.size();
  const auto n = 2 * d;
  Vec y(n);
  y << at.x, at.p;
  auto eval = [&](const Vec& z) {
    const CanonicalState out = map({z.head(d), z.tail(d)});
    Vec r(n);
    r << out.x, out.p;
    return r;
  };
  Mat jac(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec plus = y, minus = y;
    plus[i] += delta;
    minus[i] -= delta;
    jac.col(i) = (eval(plus) - eval(minus)) / (2.0 * delta);
  }
  Mat s = Mat::Zero(n, n);
  s.topRightCorner(d, d) = Mat::Identity(d, d);
  s.bottomLeftCorner(d, d) = -Mat::Identity(d, d);
  return (jac.transpose() * s * jac - s).cwiseAbs().rowwise().sum().maxCoeff();
}

double symplecticity_residual(MethodId id, const Problem& prob, const State& s,
                              double h, double delta, const Em1Options& em1) {
  const MethodSpec m = make_method(id, prob, h, em1);
  const CanonicalState at = to_canonical(prob, s);
  if (delta <= 0.0) {
    delta = 1e-5 * std::max({1.0, at.x.cwiseAbs().maxCoeff(),
                             at.p.cwiseAbs().maxCoeff()});
  }
  const CanonicalMap map = [&](const CanonicalState& c) {
    const State next = step(m, prob, from_canonical(prob, c, s.t)).next;
    return to_canonical(prob, next);
  };
  return symplecticity_residual(map, at, delta);
}

double symmetry_residual(MethodId id, const Problem& prob, const State& s,
                         double h, const Em1Options& em1) {
  const MethodSpec forward = make_method(id, prob, h, em1);
  const MethodSpec backward = make_method(id, prob, -h, em1);
  const State there = step(forward, prob, s).next;
  const State back = step(backward, prob, there).next;
  const double scale = std::max({1.0, s.x.cwiseAbs().maxCoeff(),
                                 s.v.cwiseAbs().maxCoeff()});
  return std::max((back.x - s.x).cwiseAbs().maxCoeff(),
                  (back.v - s.v).cwiseAbs().maxCoeff()) /
         scale;
}

// ---------------------------------------------------------------------------
// Drift

DriftSeries energy_drift(const Trajectory& traj) {
  if (traj.samples.size() < 2) {
    throw InvalidArgument("energy_drift: need at least two samples");
  }
  DriftSeries out;
  const double e0 = traj.samples.front().energy;
  const double t0 = traj.samples.front().t;
  const double mid = 0.5 * (t0 + traj.samples.back().t);
  double first = 0.0, second = 0.0;
  for (const Sample& s : traj.samples) {
    const double err = (s.energy - e0) / e0;
    out.times.push_back(s.t);
    out.err.push_back(err);
    out.max_abs = std::max(out.max_abs, std::abs(err));
    if (s.t <= mid) {
      first = std::max(first, std::abs(err));
    } else {
      second = std::max(second, std::abs(err));
    }
  }
  out.secular_ratio = second / std::max(first, 1e-15);
  return out;
}

// ---------------------------------------------------------------------------
// Parallel helper

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (workers <= 0) {
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  const auto count = std::min<std::size_t>(n, static_cast<std::size_t>(workers));
  if (count <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Convergence

double fit_slope(std::span<const double> h, std::span<const double> err) {
  if (h.size() != err.size() || h.size() < 2) {
    throw InvalidArgument("fit_slope: need at least two matching points");
  }
  const double n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double lx = std::log(h[i]);
    const double ly = std::log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool needs_h_below_eps(MethodId id) {
  return id == MethodId::M1 || id == MethodId::M2 || id == MethodId::EM1;
}

std::vector<double> ConvergenceTable::epsilons() const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.epsilon) == out.end()) {
      out.push_back(r.epsilon);
    }
  }
  return out;
}

std::vector<double> ConvergenceTable::step_sizes() const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.h) == out.end()) out.push_back(r.h);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

double slope_of(const ConvergenceTable& t, double eps, bool velocity) {
  std::vector<double> hs, errs;
  for (const auto& r : t.rows) {
    if (r.epsilon != eps || r.skipped) continue;
    hs.push_back(r.h);
    errs.push_back(velocity ? r.err_v : r.err_x);
  }
  if (hs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return fit_slope(hs, errs);
}

}  // namespace

double ConvergenceTable::slope_x(double eps) const {
  return slope_of(*this, eps, false);
}

double ConvergenceTable::slope_v(double eps) const {
  return slope_of(*this, eps, true);
}

double ConvergenceTable::uniform_err_x(double h) const {
  double worst = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rows) {
    if (r.h != h || r.skipped) continue;
    worst = std::isnan(worst) ? r.err_x : std::max(worst, r.err_x);
  }
  return worst;
}

double ConvergenceTable::spread_x(double h) const {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double eps : epsilons()) {
    const ConvergenceRow* r = find(eps, h);
    if (!r || r->skipped) return std::numeric_limits<double>::quiet_NaN();
    lo = std::min(lo, r->err_x);
    hi = std::max(hi, r->err_x);
  }
  return hi / lo;
}

const ConvergenceRow* ConvergenceTable::find(double eps, double h) const {
  for (const auto& r : rows) {
    if (r.epsilon == eps && r.h == h) return &r;
  }
  return nullptr;
}

ConvergenceTable convergence_study(
    MethodId id, const std::function<Problem(double)>& family,
    std::span<const double> eps_list, std::span<const double> steps,
    double t_end, const ConvergenceOptions& opts) {
  if (!(t_end > 0.0 && t_end <= 1.0)) {
    throw InvalidArgument("convergence_study: T must lie in (0, 1]");
  }
  std::vector<double> eps_sorted(eps_list.begin(), eps_list.end());
  std::vector<double> h_sorted(steps.begin(), steps.end());
  std::sort(eps_sorted.begin(), eps_sorted.end());
  std::sort(h_sorted.begin(), h_sorted.end());

  std::vector<Problem> problems;
  for (double eps : eps_sorted) problems.push_back(family(eps));

  std::vector<State> refs(eps_sorted.size());
  parallel_for(eps_sorted.size(), opts.workers, [&](std::size_t i) {
    refs[i] = reference_state(problems[i], t_end, opts.reference_tol);
  });

  const std::size_t nh = h_sorted.size();
  std::vector<ConvergenceRow> rows(eps_sorted.size() * nh);
  parallel_for(rows.size(), opts.workers, [&](std::size_t idx) {
    const std::size_t ie = idx / nh;
    const double eps = eps_sorted[ie];
    const double h = h_sorted[idx % nh];
    ConvergenceRow& row = rows[idx];
    row = {eps, h, std::numeric_limits<double>::quiet_NaN(),
           std::numeric_limits<double>::quiet_NaN(), false};
    if (needs_h_below_eps(id) && h > eps * (1.0 + 1e-12)) {
      row.skipped = true;
      return;
    }
    const Problem& prob = problems[ie];
    const MethodSpec m = make_method(id, prob, h, opts.em1);
    const long n = std::lround(t_end / h);
    const Trajectory traj = integrate(m, prob, t_end, static_cast<int>(n));
    const State& ref = refs[ie];
    if (traj.aborted) {
      row.err_x = row.err_v = std::numeric_limits<double>::infinity();
      return;
    }
    row.err_x = (traj.back().x - ref.x).norm() / ref.x.norm();
    row.err_v = (traj.back().v - ref.v).norm() / ref.v.norm();
  });

  ConvergenceTable table;
  table.method = std::string(to_string(id));
  table.t_end = t_end;
  table.rows = std::move(rows);
  return table;
}

ConvergenceTable convergence_study(MethodId id, std::span<const double> eps_list,
                                   std::span<const int> exponents, double t_end,
                                   const ConvergenceOptions& opts) {
  std::vector<double> steps;
  for (int i : exponents) steps.push_back(std::ldexp(1.0, -i));
  return convergence_study(id, builtin_problem, eps_list, steps, t_end, opts);
}

// ---------------------------------------------------------------------------
// Resonance

std::vector<double> ratio_grid(double upper, int count) {
  std::vector<double> out;
  for (int k = 1; k <= count; ++k) out.push_back(upper * k / count);
  return out;
}

std::vector<ResonancePoint> resonance_scan(MethodId id, double eps,
                                           std::span<const double> ratios,
                                           double t_end,
                                           const ResonanceOptions& opts) {
  const Problem prob = builtin_problem(eps);
  const double norm_b = skew_spectral(prob.b()).norm();

  // Final times n·h for every ratio, with n = max(1, round(T/h)).
  std::vector<long> counts;
  std::vector<double> finals;
  for (double r : ratios) {
    const double h = r * eps;
    const long n = std::max(1L, std::lround(t_end / h));
    counts.push_back(n);
    finals.push_back(static_cast<double>(n) * h);
  }
  std::vector<double> times = finals;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  ReferenceOptions ref_opts;
  ref_opts.tol = opts.reference_tol;
  const std::vector<State> ref_states = reference_states(prob, times, ref_opts);
  std::map<double, const State*> ref_at;
  for (std::size_t i = 0; i < times.size(); ++i) ref_at[times[i]] = &ref_states[i];

  std::vector<ResonancePoint> out(ratios.size());
  parallel_for(ratios.size(), opts.workers, [&](std::size_t i) {
    const double ratio = ratios[i];
    const double h = ratio * eps;
    ResonancePoint& pt = out[i];
    pt = {ratio, ratio * norm_b, std::numeric_limits<double>::infinity(), false};
    MethodSpec m;
    try {
      m = make_method(id, prob, h, opts.em1);
    } catch (const NearSingularCoefficient&) {
      pt.singular = true;
      return;
    }
    State s = prob.initial_state();
    try {
      for (long k = 0; k < counts[i]; ++k) s = step(m, prob, s).next;
    } catch (const NonFinite&) {
      return;
    }
    const State& ref = *ref_at.at(finals[i]);
    pt.err_x = (s.x - ref.x).norm() / ref.x.norm();
  });
  return out;
}

// ---------------------------------------------------------------------------
// Suite

CheckResult make_check(std::string check, std::string method, double value,
                       double threshold, bool upper_bound) {
  const bool pass = upper_bound ? value <= threshold : value >= threshold;
  return {std::move(check), std::move(method), value, threshold, upper_bound,
          pass};
}

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Composite Gauss-Legendre quadrature of the defining φ_k integral.
Complex phi_by_quadrature(int k, Complex z) {
  static const QuadratureRule rule = gauss_legendre(20);
  constexpr int panels = 16;
  Complex sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = static_cast<double>(p) / panels;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double sigma = lo + rule.nodes[q] / panels;
      sum += rule.weights[q] / panels * std::exp((1.0 - sigma) * z) *
             std::pow(sigma, k - 1) / factorial(k - 1);
    }
  }
  return sum;
}

Mat random_skew(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = u(rng);
  }
  return a - a.transpose();
}

Vec random_box(std::mt19937_64& rng, int d, double half_width) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = u(rng);
  return v;
}

}  // namespace

std::vector<CheckResult> phi_checks(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;

  double recurrence = 0.0, reality = 0.0, orthogonality = 0.0, det_err = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const SkewMatrix b(random_skew(rng, 3));
    const SkewSpectrum spec = skew_spectral(b);
    for (double scale : {0.5, 1.0, 3.0}) {
      const PhiTable table(spec, scale);
      for (double tau : {0.25, 0.5, 1.0, 2.0}) {
        const Mat m = tau * scale * b.entries();
        const Mat id = Mat::Identity(3, 3);
        for (int k = 1; k <= 3; ++k) {
          const Mat lhs = table.phi(k, tau) * m - table.phi(k - 1, tau) +
                          id / factorial(k - 1);
          recurrence = std::max(recurrence, lhs.cwiseAbs().maxCoeff());
        }
        for (int k = 0; k <= 3; ++k) {
          Eigen::VectorXcd diag(3);
          for (int j = 0; j < 3; ++j) {
            diag[j] = phi_scalar(k, table.eigen_argument(j, tau));
          }
          const CMat full = spec.P * diag.asDiagonal() * spec.P.adjoint();
          reality = std::max(reality, full.imag().cwiseAbs().maxCoeff());
        }
        const Mat e = table.phi(0, tau);
        orthogonality = std::max(
            orthogonality, (e.transpose() * e - id).cwiseAbs().maxCoeff());
        det_err = std::max(det_err, std::abs(e.determinant() - 1.0));
      }
    }
  }
  out.push_back(make_check("phi_recurrence", "-", recurrence, 1e-10, true));
  out.push_back(make_check("phi_reality", "-", reality, 1e-11, true));
  out.push_back(make_check("phi0_orthogonal", "-", orthogonality, 1e-10, true));
  out.push_back(make_check("phi0_det", "-", det_err, 1e-10, true));

  std::uniform_real_distribution<double> log_mag(std::log(1e-8), std::log(10.0));
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  double quad = 0.0;
  for (int n = 0; n < 100; ++n) {
    const Complex z = std::polar(std::exp(log_mag(rng)), angle(rng));
    const Complex exact = phi_by_quadrature(2, z);
    quad = std::max(quad, std::abs(phi_scalar(2, z) - exact) / std::abs(exact));
  }
  out.push_back(make_check("phi2_quadrature", "-", quad, 1e-12, true));
  return out;
}

std::vector<CheckResult> verification_suite(const VerifyOptions& opts) {
  std::vector<CheckResult> out = phi_checks(opts.seed);
  std::mt19937_64 rng(opts.seed + 1);
  const std::vector<MethodId> symplectic{MethodId::SM1, MethodId::SM2,
                                         MethodId::SM3};
  const std::vector<MethodId> symmetric{MethodId::M2, MethodId::SM1,
                                        MethodId::SM2, MethodId::SM3};
  auto name = [](MethodId id) { return std::string(to_string(id)); };

  // Coefficient consistency: Σγ_i(0) = 1.
  for (MethodId id : all_methods()) {
    if (!is_explicit_aei(id)) continue;
    const ScalarCoefficients co = scalar_coefficients(id, Complex(0.0, 0.0));
    out.push_back(make_check("gamma_sum_at_zero", name(id),
                             std::abs(co.gamma.sum() - 1.0), 1e-14, true));
  }

  // Symplecticity conditions on the coefficient functions.
  const std::vector<double> ks{0.5, 1.0, 2.0, std::numbers::pi / 2, 3.0, 10.0};
  for (MethodId id : symplectic) {
    out.push_back(
        make_check("symplectic_conditions", name(id), symplectic_condition_residual(id, ks).max(), 1e-12, true));
  }
  {
    const std::vector<double> one{1.0};
    const ConditionResidual r = symplectic_condition_residual(MethodId::M1, one);
    out.push_back(make_check("symplectic_conditions_negative_control", "M1",
                             std::max(r.r2, r.r3), 1e-3, false));
  }

  // Numerical symplecticity of the canonical map.
  std::vector<State> states;
  for (int n = 0; n < 5; ++n) {
    states.push_back({0.0, random_box(rng, 3, 1.1), random_box(rng, 3, 1.1)});
  }
  for (MethodId id : symplectic) {
    double worst = 0.0;
    for (double eps : {0.1, 0.05}) {
      const Problem prob = builtin_problem(eps);
      for (double ratio : {0.5, 1.0, 2.0}) {
        for (const State& s : states) {
          worst = std::max(worst,
                           symplecticity_residual(id, prob, s, ratio * eps));
        }
      }
    }
    out.push_back(make_check("symplecticity_fd", name(id), worst, 1e-6, true));
  }
  {
    const Problem prob = builtin_problem(0.1);
    out.push_back(make_check(
        "symplecticity_negative_control", "M1",
        symplecticity_residual(MethodId::M1, prob, prob.initial_state(), 0.1),
        1e-3, false));
  }

  // Symmetry.
  {
    const Problem prob = builtin_problem(0.1);
    for (MethodId id : symmetric) {
      out.push_back(make_check(
          "symmetry", name(id),
          symmetry_residual(id, prob, prob.initial_state(), 0.1), 1e-10, true));
    }
    out.push_back(make_check(
        "symmetry", "EM1",
        symmetry_residual(MethodId::EM1, prob, prob.initial_state(), 0.1, opts.em1),
        10.0 * opts.em1.fp_tol, true));
    const Problem slow = builtin_problem(0.5);
    out.push_back(make_check(
        "symmetry_negative_control", "M1",
        symmetry_residual(MethodId::M1, slow, slow.initial_state(), 0.1), 1e-4,
        false));
  }

  // Exact energy conservation of EM1.
  {
    const Problem prob = builtin_problem(0.05);
    const MethodSpec m = make_method(MethodId::EM1, prob, 0.05, opts.em1);
    const Trajectory traj = integrate(m, prob, opts.drift_t_end, 1);
    const double drift =
        traj.aborted ? std::numeric_limits<double>::infinity()
                     : energy_drift(traj).max_abs;
    out.push_back(make_check("energy_conservation", "EM1", drift, 1e-8, true));
  }

  // One-step agreement with the exact flow of a linear problem, measured as
  // |Δx| + ε|Δv|.
  {
    const double eps = 0.1;
    Mat b(2, 2);
    b << 0.0, 1.0, -1.0, 0.0;
    Vec x0(2), v0(2);
    x0 << 1.0, 0.5;
    v0 << -0.3, 0.8;
    const Problem lin =
        linear_problem(eps, SkewMatrix(b), Mat::Identity(2, 2), x0, v0);
    for (MethodId id : all_methods()) {
      const int order = id == MethodId::M1 ? 1 : 2;
      double worst_ratio = 0.0;
      for (double h : {eps / 2, eps / 4, eps / 8}) {
        const MethodSpec m = make_method(id, lin, h, opts.em1);
        const State num = step(m, lin, lin.initial_state()).next;
        const State ex = exact_linear_solution(lin, h);
        const double err = (num.x - ex.x).norm() + eps * (num.v - ex.v).norm();
        worst_ratio = std::max(worst_ratio, err / std::pow(h, order + 1));
      }
      out.push_back(make_check("linear_one_step_error_over_h^(p+1)", name(id),
                               worst_ratio, 10.0, true));
    }
  }
  return out;
}

}  // namespace aei
