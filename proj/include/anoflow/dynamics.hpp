#pragma once
// Flow integration on the chart quotients, the linearized (variational) flow
// with identification transport, dominated-splitting estimation by power
// iteration, growth rates, periodic-orbit return maps, and orbit integrals.
//
// Integration runs in the covering chart: one classical 4th-order step from a
// canonical point, then canonicalization with crossing bookkeeping. Fields
// are globally defined and equivariant, so mid-step evaluations slightly
// outside the box are legitimate.

#include <anoflow/models.hpp>

#include <algorithm>
#include <optional>

namespace anoflow {

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec3> points;  // canonical chart points
  double step = 0.0;         // signed step actually used
  std::vector<Crossing> crossings;
};

struct FlowJacobian {
  double T = 0.0;
  Mat3 M = Mat3::Identity();
};

// A line in TM/<X> at a base point, represented by the metric-orthogonal
// unit vector with canonical sign (largest-magnitude component positive).
struct NormalLine {
  Vec3 base = Vec3::Zero();
  Vec3 dir = Vec3::Zero();
};

namespace detail {

inline Vec3 canonical_sign(Vec3 v) {
  int imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  return v(imax) < 0 ? (-v).eval() : v;
}

inline void check_speed(const VectorField& X, const Vec3& p) {
  if (X.value(p).norm() < 1e-13)
    throw DynamicsError("integrate_flow: vanishing vector field at (" +
                        std::to_string(p.x()) + ", " + std::to_string(p.y()) +
                        ", " + std::to_string(p.z()) + ")");
}

inline Vec3 rk4_point_step(const VectorField& X, const Vec3& p, double dt) {
  const Vec3 k1 = X.value(p);
  const Vec3 k2 = X.value(p + 0.5 * dt * k1);
  const Vec3 k3 = X.value(p + 0.5 * dt * k2);
  const Vec3 k4 = X.value(p + dt * k3);
  return p + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// joint step for (p, M) with dM/dt = DX(p) M
inline std::pair<Vec3, Mat3> rk4_variational_step(const VectorField& X,
                                                  const Vec3& p, const Mat3& M,
                                                  double dt) {
  auto f = [&](const Vec3& q, const Mat3& N) {
    return std::make_pair(X.value(q), (X.jacobian(q) * N).eval());
  };
  const auto [kp1, km1] = f(p, M);
  const auto [kp2, km2] = f(p + 0.5 * dt * kp1, M + 0.5 * dt * km1);
  const auto [kp3, km3] = f(p + 0.5 * dt * kp2, M + 0.5 * dt * km2);
  const auto [kp4, km4] = f(p + dt * kp3, M + dt * km3);
  return {p + (dt / 6.0) * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4),
          M + (dt / 6.0) * (km1 + 2.0 * km2 + 2.0 * km3 + km4)};
}

inline int even_step_count(double T, double step) {
  int n = static_cast<int>(std::ceil(std::fabs(T) / step));
  n = std::max(n, 2);
  if (n % 2) ++n;
  return n;
}

inline void record_crossings(std::vector<Crossing>& list, double time,
                             const std::array<int, 3>& wraps) {
  for (int axis = 0; axis < 3; ++axis)
    for (int k = 0; k < std::abs(wraps[axis]); ++k)
      list.push_back({time, axis, wraps[axis] > 0 ? +1 : -1});
}

}  // namespace detail

inline Trajectory integrate_flow(const FlowModel& model, const VectorField& X,
                                 Vec3 p, double T, double step) {
  if (!(step > 0.0)) throw DynamicsError("integrate_flow: step must be > 0");
  if (!std::isfinite(T)) throw DynamicsError("integrate_flow: T must be finite");
  Trajectory traj;
  p = canonicalize(model.chart, p);
  traj.times.push_back(0.0);
  traj.points.push_back(p);
  if (T == 0.0) {
    traj.step = step;
    return traj;
  }
  const int n = detail::even_step_count(T, step);
  const double dt = T / n;
  traj.step = dt;
  for (int k = 0; k < n; ++k) {
    detail::check_speed(X, p);
    const Vec3 raw = detail::rk4_point_step(X, p, dt);
    const CanonicalInfo info = canonicalize_info(model.chart, raw);
    p = info.p;
    const double t_next = (k + 1) * dt;
    detail::record_crossings(traj.crossings, t_next, info.wraps);
    traj.times.push_back(t_next);
    traj.points.push_back(p);
  }
  return traj;
}

inline Trajectory integrate_flow(const FlowModel& model, const Vec3& p, double T,
                                 double step) {
  return integrate_flow(model, model.X, p, T, step);
}

inline FlowJacobian linearize_flow(const FlowModel& model, const VectorField& X,
                                   Vec3 p, double T, double step) {
  if (!(step > 0.0)) throw DynamicsError("linearize_flow: step must be > 0");
  p = canonicalize(model.chart, p);
  FlowJacobian out;
  out.T = T;
  if (T == 0.0) return out;
  const int n = detail::even_step_count(T, step);
  const double dt = T / n;
  Mat3 M = Mat3::Identity();
  for (int k = 0; k < n; ++k) {
    detail::check_speed(X, p);
    auto [raw, Mnext] = detail::rk4_variational_step(X, p, M, dt);
    const CanonicalInfo info = canonicalize_info(model.chart, raw);
    p = info.p;
    M = vector_transport_matrix(model.chart, info.wraps[2]) * Mnext;
  }
  out.M = M;
  return out;
}

inline FlowJacobian linearize_flow(const FlowModel& model, const Vec3& p,
                                   double T, double step) {
  return linearize_flow(model, model.X, p, T, step);
}

// Metric-orthogonal projection onto the transverse plane eta = X^perp.
inline Vec3 project_normal(const FlowModel& model, const Vec3& p, const Vec3& v,
                           const std::function<Mat3(const Vec3&)>& metric) {
  const Mat3 G = metric(p);
  const Vec3 X = model.X.value(p);
  const double xx = X.dot(G * X);
  if (!(xx > 1e-26)) throw DynamicsError("project_normal: zero flow direction");
  return v - (v.dot(G * X) / xx) * X;
}

inline Vec3 project_normal(const FlowModel& model, const Vec3& p,
                           const Vec3& v) {
  return project_normal(model, p, v, model.chart.metric);
}

// Angle between the lines spanned by u and v in the metric G, computed via
// the orthogonal rejection so values near zero stay accurate.
inline double line_angle(const Mat3& G, const Vec3& u, const Vec3& v) {
  const double nu = std::sqrt(u.dot(G * u)), nv = std::sqrt(v.dot(G * v));
  if (!(nu > 0.0) || !(nv > 0.0))
    throw DynamicsError("line_angle: zero vector");
  const Vec3 un = u / nu;
  Vec3 vn = v / nv;
  if (un.dot(G * vn) < 0.0) vn = -vn;
  const Vec3 w = vn - un.dot(G * vn) * un;
  const double s = std::sqrt(std::max(0.0, w.dot(G * w)));
  return std::asin(std::min(1.0, s));
}

enum class LineKind { stable, unstable };

struct LineEstimateOptions {
  double angle_tol = 1e-8;
  double chunk = 0.5;           // horizon advance per power-iteration stage
  double step = 1e-3;           // integrator step inside each stage
  uint64_t seed = 12345;
  std::optional<Vec3> seed_dir; // overrides the random seed vector
};

struct LineEstimate {
  NormalLine line;
  bool converged = false;
  double horizon = 0.0;
  double last_delta = std::numeric_limits<double>::infinity();
};

// Dominated-splitting estimation. The unstable line at p is the limit of
// pushing a generic normal direction forward from ever-earlier points of the
// backward orbit through p; the stable line mirrors this with pullbacks from
// the forward orbit. Each stage extends the matrix product by one flow chunk
// (with Frobenius renormalization) so the work per stage is constant.
inline LineEstimate estimate_line(const FlowModel& model, Vec3 p, LineKind kind,
                                  double T,
                                  const LineEstimateOptions& opts = {}) {
  if (!(T > 0.0)) throw DynamicsError("estimate_line: horizon must be > 0");
  p = canonicalize(model.chart, p);
  const Mat3 Gp = model.chart.metric(p);

  Vec3 seed;
  if (opts.seed_dir) {
    seed = *opts.seed_dir;
  } else {
    std::mt19937_64 rng(opts.seed);
    seed = random_unit(rng);
    // a seed on the complementary bundle stalls; nudge it off
    while (project_normal(model, p, seed).norm() < 1e-3) seed = random_unit(rng);
  }

  LineEstimate out;
  Vec3 q = p;            // marching orbit point
  Mat3 P = Mat3::Identity();  // maps T_q -> T_p along the orbit
  Vec3 prev = Vec3::Zero();
  bool have_prev = false;
  // The angle between successive estimates must stay below tolerance over
  // several consecutive stages: a single flow chunk can have a near-identity
  // jacobian (piecewise-linear suspensions stretch only at seam crossings),
  // which would otherwise stall the iteration at the seed direction.
  int consecutive_small = 0;
  const int needed_small = 4;
  const double orbit_sign = (kind == LineKind::unstable) ? -1.0 : +1.0;

  while (out.horizon < T) {
    const double chunk = std::min(opts.chunk, T - out.horizon);
    // next orbit point, one chunk further along the seed-side orbit
    const Trajectory leg = integrate_flow(model, q, orbit_sign * chunk, opts.step);
    const Vec3 q_next = leg.points.back();
    // jacobian of the flow leg running from q_next back to q
    const FlowJacobian seg =
        linearize_flow(model, q_next, -orbit_sign * chunk, opts.step);
    P = P * seg.M;
    P /= P.norm();
    q = q_next;
    out.horizon += chunk;

    Vec3 est = project_normal(model, p, P * seed);
    const double len = std::sqrt(est.dot(Gp * est));
    if (!(len > 1e-14)) continue;  // seed annihilated; keep extending
    est = detail::canonical_sign(est / len);
    if (have_prev) {
      out.last_delta = line_angle(Gp, prev, est);
      consecutive_small = out.last_delta < opts.angle_tol ? consecutive_small + 1 : 0;
      if (consecutive_small >= needed_small) {
        out.converged = true;
        prev = est;
        break;
      }
    }
    prev = est;
    have_prev = true;
  }
  out.line.base = p;
  out.line.dir = prev;
  return out;
}

// Central difference of t -> ln ||pi(Dphi^t e)|| at t = 0, with the
// projection and norm taken in the supplied metric at the flow endpoints.
inline double growth_rate_fd(const FlowModel& model, const NormalLine& line,
                             double h,
                             const std::function<Mat3(const Vec3&)>& metric) {
  if (!(h > 0.0)) throw DynamicsError("growth_rate_fd: h must be > 0");
  const Vec3 p = canonicalize(model.chart, line.base);
  const Vec3 dir_n = project_normal(model, p, line.dir, metric);
  if (dir_n.norm() < 1e-8 * line.dir.norm())
    throw DynamicsError("growth_rate_fd: direction lies along the flow");
  const double step = std::min(h / 4.0, 1e-3);
  auto log_norm_at = [&](double t) {
    const FlowJacobian J = linearize_flow(model, p, t, step);
    const Trajectory traj = integrate_flow(model, p, t, step);
    const Vec3 q = traj.points.back();
    const Vec3 v = project_normal(model, q, J.M * dir_n, metric);
    const double n = std::sqrt(v.dot(metric(q) * v));
    if (!(n > 0.0)) throw DynamicsError("growth_rate_fd: projected image vanished");
    return std::log(n);
  };
  return (log_norm_at(+h) - log_norm_at(-h)) / (2.0 * h);
}

inline double growth_rate_fd(const FlowModel& model, const NormalLine& line,
                             double h = 1e-3) {
  return growth_rate_fd(model, line, h, model.chart.metric);
}

// Pointwise growth rate read off the frame equation L_X e = -r e + q X:
// r = -alpha_dual([X, e]) provided alpha_dual(e) = 1 and alpha_dual(X) = 0.
// The one exception is e = X itself (rate identically zero, since [X, X] = 0);
// there alpha_dual(X) = alpha_dual(e) = 1 and the transversality check is moot.
inline ScalarField growth_rate_bracket(const FlowModel& model,
                                       const VectorField& e,
                                       const OneForm& alpha_dual,
                                       double frame_tol = 1e-6) {
  const VectorField br = bracket(model.X, e);
  const VectorField X = model.X;
  auto value = [br, e, alpha_dual, X, frame_tol](const Vec3& p) {
    const Vec3 a = alpha_dual.comps(p);
    if (std::fabs(a.dot(e.value(p)) - 1.0) > frame_tol)
      throw FieldError("growth_rate_bracket: alpha_dual(e) != 1");
    if (std::fabs(a.dot(X.value(p))) > frame_tol) {
      const Vec3 ev = e.value(p), Xv = X.value(p);
      const double mism = (ev.norm() * Xv - Xv.norm() * ev).norm();
      if (mism > frame_tol * std::max(1.0, ev.norm() * Xv.norm()))
        throw FieldError("growth_rate_bracket: alpha_dual(X) != 0");
    }
    return -a.dot(br.value(p));
  };
  return make_scalar(value, detail::demote_spec(detail::merge_spec(
                                e.dspec, alpha_dual.dspec, false)));
}

struct PointDomination {
  Vec3 p = Vec3::Zero();
  double r_u = 0.0, r_s = 0.0;
  bool converged = false;
};

struct DominationReport {
  std::vector<PointDomination> points;
  double min_gap = std::numeric_limits<double>::infinity();
  double min_r_u = std::numeric_limits<double>::infinity();
  double max_r_s = -std::numeric_limits<double>::infinity();
  int n_converged = 0;
  std::string norm_id;
};

inline DominationReport domination_report(const FlowModel& model,
                                          const std::vector<Vec3>& samples,
                                          double T,
                                          const LineEstimateOptions& opts = {},
                                          double h = 1e-3) {
  DominationReport rep;
  rep.norm_id = model.chart.metric_name;
  rep.points.resize(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    PointDomination pd;
    pd.p = canonicalize(model.chart, samples[i]);
    const LineEstimate up = estimate_line(model, pd.p, LineKind::unstable, T, opts);
    const LineEstimate sp = estimate_line(model, pd.p, LineKind::stable, T, opts);
    pd.converged = up.converged && sp.converged;
    pd.r_u = growth_rate_fd(model, up.line, h);
    pd.r_s = growth_rate_fd(model, sp.line, h);
    rep.points[i] = pd;
  }
  for (const PointDomination& pd : rep.points) {
    rep.min_gap = std::min(rep.min_gap, pd.r_u - pd.r_s);
    rep.min_r_u = std::min(rep.min_r_u, pd.r_u);
    rep.max_r_s = std::max(rep.max_r_s, pd.r_s);
    if (pd.converged) ++rep.n_converged;
  }
  return rep;
}

struct OrbitData {
  Trajectory orbit;
  double period = 0.0;
  FlowJacobian monodromy;
  double lambda_u = 0.0, lambda_s = 0.0;
  double closure_gap = 0.0;
  double x_eigen_residual = 0.0;  // |M X - X| / |X|, flow-direction eigenvalue 1
};

// Integrate a declared periodic orbit over one period, verify closure, and
// restrict the monodromy to the metric-orthogonal normal plane.
inline OrbitData close_orbit(const FlowModel& model, const NamedOrbit& seed,
                             double step = 1e-3) {
  OrbitData out;
  const Vec3 p = canonicalize(model.chart, seed.start);
  out.period = seed.period;
  out.orbit = integrate_flow(model, p, seed.period, step);
  const Vec3 end = out.orbit.points.back();
  out.closure_gap = chart_distance(model.chart, end, p);
  if (out.closure_gap > 1e-9)
    throw DynamicsError("close_orbit: orbit '" + seed.label +
                        "' fails to close (gap " +
                        std::to_string(out.closure_gap) + ")");
  out.monodromy = linearize_flow(model, p, seed.period, step);

  // If rounding left the endpoint just shy of a seam, the final transport was
  // never applied; pick the t-sheet whose representative matches the start.
  if (model.chart.kind == ChartKind::mapping_torus) {
    int best_k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = -1; k <= 1; ++k) {
      const Eigen::Vector2d xy = int_pow(model.chart.monodromy, k) * end.head<2>();
      const Vec3 rep(wrap_dist(p.x(), xy.x()), wrap_dist(p.y(), xy.y()),
                     p.z() - (end.z() - k));
      if (rep.norm() < best) {
        best = rep.norm();
        best_k = k;
      }
    }
    if (best_k != 0)
      out.monodromy.M =
          vector_transport_matrix(model.chart, best_k) * out.monodromy.M;
  }

  const Mat3& M = out.monodromy.M;
  const Vec3 X = model.X.value(p);
  out.x_eigen_residual = (M * X - X).norm() / X.norm();

  // metric-orthonormal basis of the normal plane at p
  const Mat3 G = model.chart.metric(p);
  int least = 0;
  const Vec3 absX = X.cwiseAbs();
  absX.minCoeff(&least);
  Vec3 n1 = project_normal(model, p, Vec3::Unit(least));
  n1 /= std::sqrt(n1.dot(G * n1));
  Vec3 n2 = Vec3::Unit((least + 1) % 3);
  n2 = project_normal(model, p, n2);
  n2 -= n1.dot(G * n2) * n1;
  if (std::sqrt(n2.dot(G * n2)) < 1e-10) {
    n2 = project_normal(model, p, Vec3::Unit((least + 2) % 3));
    n2 -= n1.dot(G * n2) * n1;
  }
  n2 /= std::sqrt(n2.dot(G * n2));

  Mat2 N;
  const Vec3 Mn1 = project_normal(model, p, M * n1);
  const Vec3 Mn2 = project_normal(model, p, M * n2);
  N(0, 0) = n1.dot(G * Mn1);
  N(0, 1) = n1.dot(G * Mn2);
  N(1, 0) = n2.dot(G * Mn1);
  N(1, 1) = n2.dot(G * Mn2);

  const double tr = N.trace(), det = N.determinant();
  const double disc = tr * tr - 4.0 * det;
  if (disc < -1e-10 * std::max(1.0, tr * tr))
    throw DynamicsError("close_orbit: complex normal spectrum");
  const double root = std::sqrt(std::max(0.0, disc));
  const double l1 = 0.5 * (tr + root), l2 = 0.5 * (tr - root);
  if (std::fabs(l1) >= std::fabs(l2)) {
    out.lambda_u = l1;
    out.lambda_s = l2;
  } else {
    out.lambda_u = l2;
    out.lambda_s = l1;
  }
  return out;
}

// Composite Simpson integral of g along the orbit samples; equals the beta_X
// line integral of g because the trajectory is parameterized by flow time.
inline double orbit_integral(const OrbitData& orbit, const ScalarField& g) {
  const auto& ts = orbit.orbit.times;
  const auto& ps = orbit.orbit.points;
  const size_t n = ts.size() - 1;
  if (n == 0) return 0.0;
  if (n % 2 != 0)
    throw DynamicsError("orbit_integral: odd sample count");
  const double dt = orbit.orbit.step;
  double sum = g.value(ps.front()) + g.value(ps.back());
  for (size_t k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * g.value(ps[k]);
  return sum * dt / 3.0;
}

}  // namespace anoflow
