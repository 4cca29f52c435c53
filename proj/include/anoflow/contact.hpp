#pragma once

// Contact-geometric layer: sign/margin reports for contact forms, Reeb fields,
// bi-contact pairs supporting a flow, frame decompositions along a splitting,
// the induced growth rates and norm, the volume-preserving pair construction,
// and the taut-hyperbola / mixed-wedge structure checks.

#include <algorithm>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "dynamics.hpp"
#include "fields.hpp"
#include "models.hpp"

namespace anoflow {

// --- sample grid -----------------------------------------------------------

// Lattice of n^3 points at coordinates i/n (x outer, z fastest) plus a batch
// of seeded uniform samples to guard against grid-aligned coincidences.
struct GridSpec {
  int n = 32;
  int random_samples = 1000;
  std::uint64_t seed = 9001;
};

inline std::vector<Vec3> grid_points(const GridSpec& g) {
  if (g.n < 1) throw ConfigError("grid_points: need n >= 1");
  if (g.random_samples < 0) throw ConfigError("grid_points: negative sample count");
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(g.n) * g.n * g.n + g.random_samples);
  const double h = 1.0 / g.n;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      for (int k = 0; k < g.n; ++k) pts.emplace_back(i * h, j * h, k * h);
  std::mt19937_64 rng(g.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < g.random_samples; ++s) {
    const double x = u(rng), y = u(rng), z = u(rng);
    pts.emplace_back(x, y, z);
  }
  return pts;
}

namespace detail {

inline std::string format_point(const Vec3& p) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "(%.6g, %.6g, %.6g)", p.x(), p.y(), p.z());
  return buf;
}

struct ScanStats {
  double min_v = std::numeric_limits<double>::infinity();
  double max_v = -std::numeric_limits<double>::infinity();
  double min_abs = std::numeric_limits<double>::infinity();
  Vec3 argmin = Vec3::Zero(), argmax = Vec3::Zero(), argmin_abs = Vec3::Zero();
};

// Deterministic extrema scan: values land in an index-addressed buffer, the
// reduction is serial in index order regardless of worker count.
inline ScanStats scan_stats(const std::vector<Vec3>& pts, int workers,
                            const std::function<double(const Vec3&)>& f) {
  std::vector<double> vals(pts.size());
  parallel_for(pts.size(), workers,
               [&](std::size_t i) { vals[i] = f(pts[i]); });
  ScanStats s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (vals[i] < s.min_v) { s.min_v = vals[i]; s.argmin = pts[i]; }
    if (vals[i] > s.max_v) { s.max_v = vals[i]; s.argmax = pts[i]; }
    const double a = std::fabs(vals[i]);
    if (a < s.min_abs) { s.min_abs = a; s.argmin_abs = pts[i]; }
  }
  return s;
}

// 1/den, refusing points where den collapses relative to a natural scale.
inline ScalarField guarded_reciprocal(const ScalarField& den,
                                      const ScalarField& scale, double rel_tol,
                                      std::string what) {
  ScalarField r;
  r.value = [den, scale, rel_tol, what](const Vec3& p) {
    const double d = den.value(p);
    if (std::fabs(d) <= rel_tol * std::max(scale.value(p), 0.0))
      throw ContactError(what + " at " + format_point(p));
    return 1.0 / d;
  };
  if (den.exact_gradient) {
    r.exact_gradient = [den, scale, rel_tol, what](const Vec3& p) -> Vec3 {
      const double d = den.value(p);
      if (std::fabs(d) <= rel_tol * std::max(scale.value(p), 0.0))
        throw ContactError(what + " at " + format_point(p));
      return (-1.0 / (d * d)) * den.exact_gradient(p);
    };
  }
  r.dspec = den.dspec;
  return r;
}

// Pass-through that verifies the form vanishes on V wherever it is evaluated.
inline OneForm require_vanishes_on(const OneForm& a, const VectorField& V,
                                   double tol, std::string what) {
  OneForm r = a;
  r.comps = [a, V, tol, what](const Vec3& p) -> Vec3 {
    const Vec3 c = a.comps(p), v = V.value(p);
    if (std::fabs(c.dot(v)) > tol * std::max(1.0, c.norm() * v.norm()))
      throw ContactError(what + " at " + format_point(p));
    return c;
  };
  return r;
}

// Dual covector of X that annihilates the metric-orthogonal complement of X.
inline OneForm metric_dual_form(const FlowModel& model) {
  const auto G = model.chart.metric;
  const VectorField X = model.X;
  return make_one_form([G, X](const Vec3& p) -> Vec3 {
    const Vec3 x = X.value(p);
    const Vec3 gx = G(p) * x;
    const double q = x.dot(gx);
    if (!(q > 0.0))
      throw ContactError("metric degenerate along the flow at " +
                         format_point(p));
    return gx / q;
  });
}

// 1-form whose kernel is span(ker_dir, X), built by contracting the unit
// volume; caller scales it afterwards.
inline OneForm annihilator_form(const VectorField& X,
                                const VectorField& ker_dir) {
  return (-1.0) * interior(ker_dir, interior(X, constant_three_form(1.0)));
}

}  // namespace detail

// Angle in [0, pi/2] between two planes given by chart-coordinate normals.
inline double plane_angle(const Vec3& n1, const Vec3& n2) {
  const double d = n1.norm() * n2.norm();
  if (!(d > 0.0)) return 0.0;
  return std::asin(std::min(1.0, n1.cross(n2).norm() / d));
}

// --- contact sign reports --------------------------------------------------

struct ContactReport {
  int sign = 0;       // +1, -1, or 0 when indefinite on the samples
  double margin = 0;  // min |alpha^d(alpha)| / reference volume; 0 if indefinite
  Vec3 worst_point = Vec3::Zero();
  GridSpec grid;
};

inline ContactReport check_contact(const FlowModel& model, const OneForm& alpha,
                                   const GridSpec& grid = {}, int workers = 1) {
  const ThreeForm cv = contact_volume(alpha);
  const ThreeForm ref = model.reference_volume;
  const auto pts = grid_points(grid);
  const auto s = detail::scan_stats(pts, workers, [cv, ref](const Vec3& p) {
    return cv.coeff(p) / ref.coeff(p);
  });
  ContactReport rep;
  rep.grid = grid;
  rep.worst_point = s.argmin_abs;
  if (s.min_v > 0.0) {
    rep.sign = +1;
    rep.margin = s.min_v;
  } else if (s.max_v < 0.0) {
    rep.sign = -1;
    rep.margin = -s.max_v;
  }  // else: indefinite, margin stays 0
  return rep;
}

// --- Reeb field ------------------------------------------------------------

// Unique solution of d(alpha)(R, .) = 0, alpha(R) = 1.  In components the
// curl of alpha spans the kernel of d(alpha), so R is that curl rescaled.
inline VectorField reeb_field(const OneForm& alpha) {
  const TwoForm da = ext_d(alpha);
  auto value = [alpha, da](const Vec3& p) -> Vec3 {
    const Vec3 a = alpha.comps(p), b = da.comps(p);
    const double den = a.dot(b);
    if (std::fabs(den) <= 1e-12 * std::max(1.0, a.norm() * b.norm()))
      throw ContactError("reeb_field: form is not contact at " +
                         detail::format_point(p));
    return (b / den).eval();
  };
  return make_vector(value,
                     detail::demote_spec(detail::merge_spec(alpha.dspec,
                                                            da.dspec, false)));
}

// --- bi-contact pairs ------------------------------------------------------

struct BiContactPair {
  OneForm alpha_minus, alpha_plus;
  VectorField X;
  ContactReport minus_report, plus_report;
  double tangency_residual = 0.0;  // max of |alpha_-(X)|, |alpha_+(X)|
  Vec3 tangency_worst = Vec3::Zero();
  double transversality_margin = 0.0;  // min kernel-plane angle
  Vec3 transversality_worst = Vec3::Zero();
  bool valid = false;
  std::string failed_condition;  // empty when valid
  GridSpec grid;
};

inline BiContactPair verify_bicontact(const FlowModel& model,
                                      const OneForm& alpha_minus,
                                      const OneForm& alpha_plus,
                                      const VectorField& X,
                                      const GridSpec& grid = {},
                                      double tangency_tol = 1e-8,
                                      int workers = 1) {
  BiContactPair out;
  out.alpha_minus = alpha_minus;
  out.alpha_plus = alpha_plus;
  out.X = X;
  out.grid = grid;
  out.minus_report = check_contact(model, alpha_minus, grid, workers);
  out.plus_report = check_contact(model, alpha_plus, grid, workers);

  const auto pts = grid_points(grid);
  const auto tan = detail::scan_stats(
      pts, workers, [alpha_minus, alpha_plus, X](const Vec3& p) {
        const Vec3 xv = X.value(p);
        return std::max(std::fabs(alpha_minus.comps(p).dot(xv)),
                        std::fabs(alpha_plus.comps(p).dot(xv)));
      });
  out.tangency_residual = tan.max_v;
  out.tangency_worst = tan.argmax;

  const auto tv = detail::scan_stats(
      pts, workers, [alpha_minus, alpha_plus](const Vec3& p) {
        return plane_angle(alpha_minus.comps(p), alpha_plus.comps(p));
      });
  out.transversality_margin = tv.min_v;
  out.transversality_worst = tv.argmin;

  if (out.tangency_residual > tangency_tol)
    out.failed_condition = "flow not tangent to both kernels";
  else if (!(out.transversality_margin > 0.0))
    out.failed_condition = "kernels not transverse";
  else if (out.minus_report.sign != -1)
    out.failed_condition = "alpha_minus not negative contact";
  else if (out.plus_report.sign != +1)
    out.failed_condition = "alpha_plus not positive contact";
  out.valid = out.failed_condition.empty();
  return out;
}

// --- frame decomposition along a splitting ---------------------------------

enum class PairSign { positive, negative };

// alpha_s(e_s) = alpha_u(e_u) = alpha_X(X) = 1; ker alpha_u = E_s + <X>,
// ker alpha_s = E_u + <X>; alpha_X annihilates the metric complement of X.
struct FrameDecomposition {
  OneForm alpha_s, alpha_u, alpha_X;
  VectorField e_s, e_u;
};

// Split alpha = alpha_u - alpha_s (positive convention) or alpha_u + alpha_s
// (negative) against the given line fields.  All checks are pointwise and
// fire where the returned fields are evaluated.
inline FrameDecomposition decompose_along_splitting(
    const FlowModel& model, const OneForm& alpha_in, const VectorField& E_s,
    const VectorField& E_u, PairSign sign, double cond_tol = 1e-8) {
  const VectorField X = model.X;
  const OneForm alpha = detail::require_vanishes_on(
      alpha_in, X, 1e-8,
      "decompose_along_splitting: form does not annihilate the flow");

  const OneForm omega_u = detail::annihilator_form(X, E_s);
  const ScalarField den_u = pairing(omega_u, E_u);
  const ScalarField den_scale = make_scalar([omega_u, E_u](const Vec3& p) {
    return omega_u.comps(p).norm() * E_u.value(p).norm();
  });
  const ScalarField inv_den = detail::guarded_reciprocal(
      den_u, den_scale, cond_tol,
      "decompose_along_splitting: splitting directions nearly dependent");
  const ScalarField num_u = pairing(alpha, E_u);
  const OneForm alpha_u = (num_u * inv_den) * omega_u;
  const OneForm alpha_s =
      (sign == PairSign::positive) ? (alpha_u - alpha) : (alpha - alpha_u);

  const ScalarField nu_scale = make_scalar([alpha, E_u](const Vec3& p) {
    return alpha.comps(p).norm() * E_u.value(p).norm();
  });
  const VectorField e_u =
      detail::guarded_reciprocal(
          num_u, nu_scale, cond_tol,
          "decompose_along_splitting: form degenerate on the unstable direction") *
      E_u;

  const ScalarField ns = pairing(alpha_s, E_s);
  const ScalarField ns_scale = make_scalar([alpha_s, E_s](const Vec3& p) {
    return alpha_s.comps(p).norm() * E_s.value(p).norm();
  });
  const VectorField e_s =
      detail::guarded_reciprocal(
          ns, ns_scale, cond_tol,
          "decompose_along_splitting: form degenerate on the stable direction") *
      E_s;

  return {alpha_s, alpha_u, detail::metric_dual_form(model), e_s, e_u};
}

// Frame built from the splitting alone, without a reference contact form:
// the covectors are normalized against the given representatives directly,
// alpha_s(E_s) = alpha_u(E_u) = 1, and the vector legs are E_s, E_u as is.
inline FrameDecomposition dual_frame(const FlowModel& model,
                                     const VectorField& E_s,
                                     const VectorField& E_u,
                                     double cond_tol = 1e-8) {
  const VectorField X = model.X;
  const OneForm omega_u = detail::annihilator_form(X, E_s);
  const OneForm omega_s = detail::annihilator_form(X, E_u);
  const ScalarField den_u = pairing(omega_u, E_u);
  const ScalarField den_s = pairing(omega_s, E_s);
  const ScalarField scale_u = make_scalar([omega_u, E_u](const Vec3& p) {
    return omega_u.comps(p).norm() * E_u.value(p).norm();
  });
  const ScalarField scale_s = make_scalar([omega_s, E_s](const Vec3& p) {
    return omega_s.comps(p).norm() * E_s.value(p).norm();
  });
  const OneForm alpha_u =
      detail::guarded_reciprocal(
          den_u, scale_u, cond_tol,
          "dual_frame: splitting directions nearly dependent") *
      omega_u;
  const OneForm alpha_s =
      detail::guarded_reciprocal(
          den_s, scale_s, cond_tol,
          "dual_frame: splitting directions nearly dependent") *
      omega_s;
  return {alpha_s, alpha_u, detail::metric_dual_form(model), E_s, E_u};
}

// Gram field in which the frame covectors are orthonormal: the norm attached
// to the induced volume alpha_s ^ alpha_u ^ alpha_X.
inline std::function<Mat3(const Vec3&)> induced_metric(
    const FrameDecomposition& fr) {
  const OneForm as = fr.alpha_s, au = fr.alpha_u, ax = fr.alpha_X;
  return [as, au, ax](const Vec3& p) -> Mat3 {
    const Vec3 s = as.comps(p), u = au.comps(p), x = ax.comps(p);
    return (s * s.transpose() + u * u.transpose() + x * x.transpose()).eval();
  };
}

inline FlowModel with_induced_metric(FlowModel model,
                                     const FrameDecomposition& fr) {
  model.chart.metric = induced_metric(fr);
  model.chart.metric_name = "induced_frame";
  return model;
}

struct GrowthRates {
  ScalarField r_s, r_u;
};

inline GrowthRates induced_growth_rates(const FlowModel& model,
                                        const FrameDecomposition& fr) {
  return {growth_rate_bracket(model, fr.e_s, fr.alpha_s),
          growth_rate_bracket(model, fr.e_u, fr.alpha_u)};
}

// --- volume-preserving pair construction -----------------------------------

struct ReebData {
  VectorField reeb_plus;
  double inclusion_residual = 0.0;  // max |alpha_-(R)| over samples
  Vec3 inclusion_worst = Vec3::Zero();
  double pairing_min = 0.0;   // d(alpha_-)(e_u - e_s, X) extrema over samples
  double pairing_max = 0.0;
  double pairing_residual = 0.0;  // max deviation from r_s - r_u
  double rate_sum_max = 0.0;      // max |r_s + r_u|
  double min_r_u = 0.0;
  double normalization = 0.0;  // max |alpha_-(e_s + e_u)|
};

struct VolumePreservingPair {
  BiContactPair pair;
  FrameDecomposition frame;
  ReebData reeb;
};

// For a flow preserving Omega: alpha_u kills E_s + <X> with alpha_u(e_u) = 1,
// alpha_s(.) = Omega(., e_u, X), and the pair alpha_u -/+ alpha_s is a
// bi-contact pair whose positive Reeb field lies in ker(alpha_u + alpha_s).
inline VolumePreservingPair volume_preserving_pair(
    const FlowModel& model, const VectorField& E_s, const VectorField& E_u,
    const GridSpec& grid = {}, double inclusion_tol = 1e-6, int workers = 1) {
  if (!model.invariant_volume)
    throw ContactError("volume_preserving_pair: model has no invariant volume");
  const ThreeForm Omega = *model.invariant_volume;
  const VectorField X = model.X;
  const auto pts = grid_points(grid);

  const ScalarField div = divergence(X, Omega);
  const auto dstats = detail::scan_stats(
      pts, workers, [div](const Vec3& p) { return div.value(p); });
  const double div_resid = std::max(std::fabs(dstats.min_v),
                                    std::fabs(dstats.max_v));
  if (div_resid > 1e-8)
    throw ContactError("volume_preserving_pair: volume not invariant, "
                       "divergence reaches " + std::to_string(div_resid));

  const OneForm omega_u = detail::annihilator_form(X, E_s);
  const ScalarField den_u = pairing(omega_u, E_u);
  const ScalarField den_scale = make_scalar([omega_u, E_u](const Vec3& p) {
    return omega_u.comps(p).norm() * E_u.value(p).norm();
  });
  const OneForm alpha_u =
      detail::guarded_reciprocal(
          den_u, den_scale, 1e-8,
          "volume_preserving_pair: splitting directions nearly dependent") *
      omega_u;
  const VectorField e_u = E_u;  // the chosen representative, alpha_u(e_u) = 1

  const OneForm alpha_s = (-1.0) * interior(e_u, interior(X, Omega));
  const ScalarField ns = pairing(alpha_s, E_s);
  const ScalarField ns_scale = make_scalar([alpha_s, E_s](const Vec3& p) {
    return alpha_s.comps(p).norm() * E_s.value(p).norm();
  });
  const VectorField e_s =
      detail::guarded_reciprocal(
          ns, ns_scale, 1e-8,
          "volume_preserving_pair: contracted volume degenerate on the stable "
          "direction") *
      E_s;

  const OneForm alpha_plus = alpha_u - alpha_s;
  const OneForm alpha_minus = alpha_u + alpha_s;

  const ScalarField r_u = growth_rate_bracket(model, e_u, alpha_u);
  const ScalarField r_s = growth_rate_bracket(model, e_s, alpha_s);

  ReebData rd;
  const auto ru_stats = detail::scan_stats(
      pts, workers, [r_u](const Vec3& p) { return r_u.value(p); });
  rd.min_r_u = ru_stats.min_v;
  if (!(rd.min_r_u > 0.0))
    throw ContactError("volume_preserving_pair: unstable rate not positive at " +
                       detail::format_point(ru_stats.argmin));

  const auto sum_stats = detail::scan_stats(
      pts, workers,
      [r_u, r_s](const Vec3& p) { return std::fabs(r_s.value(p) + r_u.value(p)); });
  rd.rate_sum_max = sum_stats.max_v;

  rd.reeb_plus = reeb_field(alpha_plus);
  const VectorField R = rd.reeb_plus;
  const auto incl = detail::scan_stats(
      pts, workers, [alpha_minus, R](const Vec3& p) {
        return std::fabs(alpha_minus.comps(p).dot(R.value(p)));
      });
  rd.inclusion_residual = incl.max_v;
  rd.inclusion_worst = incl.argmax;
  if (rd.inclusion_residual > inclusion_tol)
    throw ContactError("volume_preserving_pair: Reeb field leaves the negative "
                       "kernel, residual " + std::to_string(rd.inclusion_residual));

  const TwoForm dm = ext_d(alpha_minus);
  const auto pv = detail::scan_stats(
      pts, workers, [dm, e_u, e_s, X](const Vec3& p) {
        const Vec3 d = e_u.value(p) - e_s.value(p);
        return dm.comps(p).dot(d.cross(X.value(p)));
      });
  rd.pairing_min = pv.min_v;
  rd.pairing_max = pv.max_v;
  const auto pres = detail::scan_stats(
      pts, workers, [dm, e_u, e_s, X, r_s, r_u](const Vec3& p) {
        const Vec3 d = e_u.value(p) - e_s.value(p);
        const double lhs = dm.comps(p).dot(d.cross(X.value(p)));
        return std::fabs(lhs - (r_s.value(p) - r_u.value(p)));
      });
  rd.pairing_residual = pres.max_v;

  const auto norm_stats = detail::scan_stats(
      pts, workers, [alpha_minus, e_s, e_u](const Vec3& p) {
        return std::fabs(alpha_minus.comps(p).dot(e_s.value(p) + e_u.value(p)));
      });
  rd.normalization = norm_stats.max_v;

  VolumePreservingPair out;
  out.pair = verify_bicontact(model, alpha_minus, alpha_plus, X, grid, 1e-8,
                              workers);
  out.frame = {alpha_s, alpha_u, detail::metric_dual_form(model), e_s, e_u};
  out.reeb = std::move(rd);
  return out;
}

// --- taut hyperbola and mixed-wedge checks ---------------------------------

struct TautHyperbolaReport {
  double residual_self = 0.0;   // max |a1^d(a1) + a2^d(a2)| / reference volume
  Vec3 worst_self = Vec3::Zero();
  double residual_cross = 0.0;  // max |a1^d(a2) + a2^d(a1)| / reference volume
  Vec3 worst_cross = Vec3::Zero();
  double transversality_margin = 0.0;  // min kernel-plane angle
  Vec3 transversality_worst = Vec3::Zero();
  bool identities_hold = false;
  bool transverse = false;
  GridSpec grid;
};

inline TautHyperbolaReport taut_hyperbola_check(const FlowModel& model,
                                                const OneForm& a1,
                                                const OneForm& a2,
                                                const GridSpec& grid = {},
                                                double tol = 1e-8,
                                                int workers = 1) {
  const TwoForm d1 = ext_d(a1), d2 = ext_d(a2);
  const ThreeForm self_sum = wedge(a1, d1) + wedge(a2, d2);
  const ThreeForm cross_sum = wedge(a1, d2) + wedge(a2, d1);
  const ThreeForm ref = model.reference_volume;
  const auto pts = grid_points(grid);

  TautHyperbolaReport rep;
  rep.grid = grid;
  const auto s1 = detail::scan_stats(
      pts, workers, [self_sum, ref](const Vec3& p) {
        return std::fabs(self_sum.coeff(p) / ref.coeff(p));
      });
  rep.residual_self = s1.max_v;
  rep.worst_self = s1.argmax;
  const auto s2 = detail::scan_stats(
      pts, workers, [cross_sum, ref](const Vec3& p) {
        return std::fabs(cross_sum.coeff(p) / ref.coeff(p));
      });
  rep.residual_cross = s2.max_v;
  rep.worst_cross = s2.argmax;
  const auto tv = detail::scan_stats(pts, workers, [a1, a2](const Vec3& p) {
    return plane_angle(a1.comps(p), a2.comps(p));
  });
  rep.transversality_margin = tv.min_v;
  rep.transversality_worst = tv.argmin;
  rep.identities_hold = rep.residual_self < tol && rep.residual_cross < tol;
  rep.transverse = rep.transversality_margin > 1e-8;
  return rep;
}

struct CartanReport {
  TautHyperbolaReport hyperbola;
  double residual_mixed_minus = 0.0;  // max |alpha_- ^ d(alpha_+)| / reference
  Vec3 worst_mixed_minus = Vec3::Zero();
  double residual_mixed_plus = 0.0;   // max |alpha_+ ^ d(alpha_-)| / reference
  Vec3 worst_mixed_plus = Vec3::Zero();
  bool cartan = false;
};

inline CartanReport cartan_check(const FlowModel& model,
                                 const OneForm& alpha_minus,
                                 const OneForm& alpha_plus,
                                 const GridSpec& grid = {}, double tol = 1e-8,
                                 int workers = 1) {
  CartanReport rep;
  rep.hyperbola =
      taut_hyperbola_check(model, alpha_minus, alpha_plus, grid, tol, workers);
  const ThreeForm mixed_minus = wedge(alpha_minus, ext_d(alpha_plus));
  const ThreeForm mixed_plus = wedge(alpha_plus, ext_d(alpha_minus));
  const ThreeForm ref = model.reference_volume;
  const auto pts = grid_points(grid);
  const auto mm = detail::scan_stats(
      pts, workers, [mixed_minus, ref](const Vec3& p) {
        return std::fabs(mixed_minus.coeff(p) / ref.coeff(p));
      });
  rep.residual_mixed_minus = mm.max_v;
  rep.worst_mixed_minus = mm.argmax;
  const auto mp = detail::scan_stats(
      pts, workers, [mixed_plus, ref](const Vec3& p) {
        return std::fabs(mixed_plus.coeff(p) / ref.coeff(p));
      });
  rep.residual_mixed_plus = mp.max_v;
  rep.worst_mixed_plus = mp.argmax;
  rep.cartan = rep.hyperbola.identities_hold &&
               rep.residual_mixed_minus < tol && rep.residual_mixed_plus < tol;
  return rep;
}

}  // namespace anoflow
