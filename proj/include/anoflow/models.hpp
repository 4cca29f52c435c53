#pragma once
// Chart models of the supported closed 3-manifolds: the 3-torus and mapping
// tori of hyperbolic 2-torus automorphisms, together with the built-in flow
// models. A chart point lives in [0,1)^3; canonicalize() reduces arbitrary
// coordinates to that box. On a mapping torus the gluing identifies
// (x, y, 1) with (A(x,y), 0), so reducing t by one applies the monodromy A
// to (x,y). Tensor fields are represented by globally defined chart
// functions; being well-defined on the quotient means equivariance under the
// identifications, which compatibility_check samples.

#include <anoflow/fields.hpp>

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace anoflow {

enum class ChartKind { torus3, mapping_torus };

// One face crossing of a trajectory. dir = +1 when the coordinate wrapped
// downward (left through the top face), -1 for the opposite direction.
struct Crossing {
  double time = 0.0;
  int axis = 2;
  int dir = +1;
};

struct ChartModel {
  ChartKind kind = ChartKind::torus3;
  Mat2 monodromy = Mat2::Identity();  // applied to (x,y) when t drops by 1
  int orientation = +1;               // sign of the reference volume dx^dy^dz
  // Gram matrix of the chart norm. Euclidean by default; a model may declare
  // an adapted metric instead (it must itself be equivariant).
  std::function<Mat3(const Vec3&)> metric = [](const Vec3&) {
    return Mat3::Identity().eval();
  };
  std::string metric_name = "euclidean";
};

inline Mat2 int_pow(const Mat2& A, int k) {
  Mat2 base = A;
  if (k < 0) {
    const double det = A.determinant();
    Mat2 inv;
    inv << A(1, 1), -A(0, 1), -A(1, 0), A(0, 0);
    base = inv / det;
    k = -k;
  }
  Mat2 out = Mat2::Identity();
  for (int i = 0; i < k; ++i) out = base * out;
  return out;
}

struct CanonicalInfo {
  Vec3 p = Vec3::Zero();
  // Downward wraps per axis: +1 each time the coordinate was reduced by 1.
  std::array<int, 3> wraps = {0, 0, 0};
};

inline CanonicalInfo canonicalize_info(const ChartModel& chart, Vec3 p) {
  CanonicalInfo out;
  if (chart.kind == ChartKind::mapping_torus) {
    const int k = static_cast<int>(std::floor(p.z()));
    if (k != 0) {
      const Mat2 Ak = int_pow(chart.monodromy, k);
      const Eigen::Vector2d xy = Ak * p.head<2>();
      p.x() = xy.x();
      p.y() = xy.y();
      p.z() -= k;
    }
    out.wraps[2] = k;
    for (int i = 0; i < 2; ++i) {
      out.wraps[i] = static_cast<int>(std::floor(p(i)));
      p(i) = mod1(p(i));
    }
    // floor can leave z == 1 for tiny negative inputs rounded up
    if (p.z() >= 1.0 || p.z() < 0.0) {
      const CanonicalInfo again = canonicalize_info(chart, p);
      for (int i = 0; i < 3; ++i) out.wraps[i] += again.wraps[i];
      p = again.p;
    }
  } else {
    for (int i = 0; i < 3; ++i) {
      out.wraps[i] = static_cast<int>(std::floor(p(i)));
      p(i) = mod1(p(i));
    }
  }
  out.p = p;
  return out;
}

inline Vec3 canonicalize(const ChartModel& chart, const Vec3& p) {
  return canonicalize_info(chart, p).p;
}

// Chart matrix pushing tangent vectors across t_wraps downward t-crossings.
inline Mat3 vector_transport_matrix(const ChartModel& chart, int t_wraps) {
  Mat3 T = Mat3::Identity();
  if (chart.kind == ChartKind::mapping_torus && t_wraps != 0)
    T.topLeftCorner<2, 2>() = int_pow(chart.monodromy, t_wraps);
  return T;
}

// Covectors move by the inverse-transpose so pairings are preserved.
inline Mat3 covector_transport_matrix(const ChartModel& chart, int t_wraps) {
  Mat3 T = Mat3::Identity();
  if (chart.kind == ChartKind::mapping_torus && t_wraps != 0) {
    const Mat2 Ak = int_pow(chart.monodromy, t_wraps);
    T.topLeftCorner<2, 2>() = Ak.inverse().transpose();
  }
  return T;
}

// 2-form components transform like vectors scaled by 1/det; det = 1 here.
inline Mat3 two_form_transport_matrix(const ChartModel& chart, int t_wraps) {
  return vector_transport_matrix(chart, t_wraps) /
         vector_transport_matrix(chart, t_wraps).determinant();
}

inline Vec3 transport_vector(const ChartModel& chart, const Crossing& c,
                             const Vec3& v) {
  if (chart.kind != ChartKind::mapping_torus || c.axis != 2) return v;
  return vector_transport_matrix(chart, c.dir) * v;
}

inline Vec3 transport_covector(const ChartModel& chart, const Crossing& c,
                               const Vec3& a) {
  if (chart.kind != ChartKind::mapping_torus || c.axis != 2) return a;
  return covector_transport_matrix(chart, c.dir) * a;
}

inline double metric_dot(const ChartModel& chart, const Vec3& p, const Vec3& u,
                         const Vec3& v) {
  return u.dot(chart.metric(p) * v);
}

inline double metric_norm(const ChartModel& chart, const Vec3& p,
                          const Vec3& v) {
  return std::sqrt(std::max(0.0, metric_dot(chart, p, v, v)));
}

// Distance between quotient points: wrap-aware in the periodic axes, and on a
// mapping torus also minimized over the neighboring t-sheets.
inline double chart_distance(const ChartModel& chart, const Vec3& a_in,
                             const Vec3& b_in) {
  const Vec3 a = canonicalize(chart, a_in);
  const Vec3 b = canonicalize(chart, b_in);
  if (chart.kind == ChartKind::torus3) {
    Vec3 d;
    for (int i = 0; i < 3; ++i) d(i) = wrap_dist(a(i), b(i));
    return d.norm();
  }
  double best = std::numeric_limits<double>::infinity();
  for (int k = -1; k <= 1; ++k) {
    const Eigen::Vector2d xy = int_pow(chart.monodromy, k) * b.head<2>();
    const Vec3 rep(xy.x(), xy.y(), b.z() - k);
    const Vec3 d(wrap_dist(a.x(), rep.x()), wrap_dist(a.y(), rep.y()),
                 a.z() - rep.z());
    best = std::min(best, d.norm());
  }
  return best;
}

// Shortest representative of (to - base) among the identified copies of
// `to`: the vector one would step along a curve through base.  Needed when
// differencing nearby quotient points whose chart reps sit across a seam.
inline Vec3 chart_displacement(const ChartModel& chart, const Vec3& base_in,
                               const Vec3& to_in) {
  const Vec3 a = canonicalize(chart, base_in);
  const Vec3 b = canonicalize(chart, to_in);
  Vec3 best = b - a;
  double best_norm = best.norm();
  const auto consider = [&](const Vec3& rep) {
    const Vec3 d = rep - a;
    if (d.norm() < best_norm) {
      best = d;
      best_norm = d.norm();
    }
  };
  if (chart.kind == ChartKind::torus3) {
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k)
          consider(b + Vec3(i, j, k));
  } else {
    // the monodromy can move an in-square point several cells away, so the
    // lattice shifts on the neighboring sheets need a wider window
    for (int k = -1; k <= 1; ++k) {
      const Eigen::Vector2d xy = int_pow(chart.monodromy, k) * b.head<2>();
      const int r = k == 0 ? 1 : 3;
      for (int i = -r; i <= r; ++i)
        for (int j = -r; j <= r; ++j)
          consider(Vec3(xy.x() + i, xy.y() + j, b.z() - k));
    }
  }
  return best;
}

struct NamedOrbit {
  std::string label;
  Vec3 start = Vec3::Zero();
  double period = 0.0;
};

struct FlowModel {
  std::string name;
  ChartModel chart;
  VectorField X;
  // Closed-form extras, present when the model ships them.
  std::optional<VectorField> e_s, e_u;                 // splitting representatives
  std::optional<OneForm> alpha_s, alpha_u, alpha_X;    // dual frame
  std::optional<OneForm> alpha_plus, alpha_minus;      // bi-contact pair
  std::optional<ThreeForm> invariant_volume;
  ThreeForm reference_volume = constant_three_form(1.0);  // dx^dy^dz
  std::vector<NamedOrbit> named_orbits;
};

// ---------------------------------------------------------------------------
// Quotient compatibility: sample identified point pairs and measure how far a
// chart-level field is from being equivariant. Mismatch is data, not an error.

struct CompatReport {
  double max_mismatch = 0.0;
  Vec3 worst_point = Vec3::Zero();
  int samples = 0;
};

namespace detail {

// Enumerate the identifications at p: pairs (q, wraps) with q a non-canonical
// representative of the same quotient point reached by one face crossing.
inline std::vector<std::pair<Vec3, std::array<int, 3>>> identified_reps(
    const ChartModel& chart, const Vec3& p) {
  std::vector<std::pair<Vec3, std::array<int, 3>>> reps;
  reps.push_back({p + Vec3(1, 0, 0), {1, 0, 0}});
  reps.push_back({p + Vec3(0, 1, 0), {0, 1, 0}});
  if (chart.kind == ChartKind::torus3) {
    reps.push_back({p + Vec3(0, 0, 1), {0, 0, 1}});
  } else {
    // (x,y,t) and (A(x,y), t-1) are the same point; the latter is the image
    // of the +t representative (x,y,t+1) under one downward wrap.
    const Eigen::Vector2d xy = chart.monodromy * p.head<2>();
    reps.push_back({Vec3(xy.x(), xy.y(), p.z() - 1.0), {0, 0, 1}});
  }
  return reps;
}

template <typename Eval, typename Transport>
CompatReport compat_scan(const ChartModel& chart, int n_samples, uint64_t seed,
                         Eval eval, Transport transport) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  CompatReport rep;
  rep.samples = n_samples;
  for (int s = 0; s < n_samples; ++s) {
    const Vec3 p(uni(rng), uni(rng), uni(rng));
    for (const auto& [q, wraps] : identified_reps(chart, p)) {
      // value the field must take at the far representative
      const double mismatch = (eval(q) - transport(wraps, eval(p))).norm();
      if (mismatch > rep.max_mismatch) {
        rep.max_mismatch = mismatch;
        rep.worst_point = p;
      }
    }
  }
  return rep;
}

}  // namespace detail

inline CompatReport compatibility_check(const FlowModel& model,
                                        const ScalarField& f,
                                        int n_samples = 64,
                                        uint64_t seed = 9001) {
  return detail::compat_scan(
      model.chart, n_samples, seed,
      [&](const Vec3& q) { return Eigen::Matrix<double, 1, 1>(f.value(q)); },
      [&](const std::array<int, 3>&, const Eigen::Matrix<double, 1, 1>& v) {
        return v;
      });
}

inline CompatReport compatibility_check(const FlowModel& model,
                                        const VectorField& X,
                                        int n_samples = 64,
                                        uint64_t seed = 9001) {
  return detail::compat_scan(
      model.chart, n_samples, seed, [&](const Vec3& q) { return X.value(q); },
      [&](const std::array<int, 3>& wraps, const Vec3& v) -> Vec3 {
        return vector_transport_matrix(model.chart, wraps[2]) * v;
      });
}

inline CompatReport compatibility_check(const FlowModel& model,
                                        const OneForm& a, int n_samples = 64,
                                        uint64_t seed = 9001) {
  return detail::compat_scan(
      model.chart, n_samples, seed, [&](const Vec3& q) { return a.comps(q); },
      [&](const std::array<int, 3>& wraps, const Vec3& v) -> Vec3 {
        return covector_transport_matrix(model.chart, wraps[2]) * v;
      });
}

inline CompatReport compatibility_check(const FlowModel& model,
                                        const TwoForm& w, int n_samples = 64,
                                        uint64_t seed = 9001) {
  return detail::compat_scan(
      model.chart, n_samples, seed, [&](const Vec3& q) { return w.comps(q); },
      [&](const std::array<int, 3>& wraps, const Vec3& v) -> Vec3 {
        return two_form_transport_matrix(model.chart, wraps[2]) * v;
      });
}

inline CompatReport compatibility_check(const FlowModel& model,
                                        const ThreeForm& w, int n_samples = 64,
                                        uint64_t seed = 9001) {
  return detail::compat_scan(
      model.chart, n_samples, seed,
      [&](const Vec3& q) { return Eigen::Matrix<double, 1, 1>(w.coeff(q)); },
      [&](const std::array<int, 3>&, const Eigen::Matrix<double, 1, 1>& v) {
        return v;
      });
}

// ---------------------------------------------------------------------------
// Built-in model: suspension of the cat map A = [[2,1],[1,1]].
//
// Eigenbasis of the symmetric A: lambda = (3+sqrt 5)/2 = phi^2 with unit
// eigenvectors vu = (phi,1)/s and vs = (1,-phi)/s, s = sqrt(1+phi^2), chosen
// so det[vs vu] = +1. The suspension flow is X = d/dt; the t-dependent
// rescaling below makes every built-in exactly equivariant:
//   e_s = e^{+t L} vs      alpha_s = e^{-t L} vs.(dx,dy)
//   e_u = e^{-t L} vu      alpha_u = e^{+t L} vu.(dx,dy)
// with L = ln lambda, so the induced growth rates are the constants
// r_u = +L, r_s = -L, and alpha_s^alpha_u^dt = dx^dy^dz exactly.
// The chart carries the frame-orthonormal metric sum alpha_i (x) alpha_i:
// the Euclidean box metric is not a metric on the quotient (the identity
// differential inside the box would report zero growth), while under the
// adapted metric the normal stretch of e_u is e^{tL} exactly.

inline double cat_log_lambda() { return std::log((3.0 + std::sqrt(5.0)) / 2.0); }

inline FlowModel cat_suspension() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double L = cat_log_lambda();
  const double s = std::sqrt(1.0 + phi * phi);
  const Eigen::Vector2d vs(1.0 / s, -phi / s);
  const Eigen::Vector2d vu(phi / s, 1.0 / s);

  FlowModel m;
  m.name = "cat_suspension";
  m.chart.kind = ChartKind::mapping_torus;
  m.chart.monodromy << 2, 1, 1, 1;
  m.chart.orientation = +1;

  m.X = constant_vector({0, 0, 1});

  auto scaled_vector = [](Eigen::Vector2d dir2, double rate) {
    const Vec3 dir(dir2.x(), dir2.y(), 0.0);
    return make_vector(
        [dir, rate](const Vec3& p) -> Vec3 {
          return std::exp(rate * p.z()) * dir;
        },
        [dir, rate](const Vec3& p) {
          Mat3 J = Mat3::Zero();
          J.col(2) = rate * std::exp(rate * p.z()) * dir;
          return J;
        });
  };
  m.e_s = scaled_vector(vs, +L);
  m.e_u = scaled_vector(vu, -L);

  auto scaled_form = [](Eigen::Vector2d dir2, double rate) {
    const Vec3 dir(dir2.x(), dir2.y(), 0.0);
    return make_one_form(
        [dir, rate](const Vec3& p) -> Vec3 {
          return std::exp(rate * p.z()) * dir;
        },
        [dir, rate](const Vec3& p) {
          Mat3 J = Mat3::Zero();
          J.col(2) = rate * std::exp(rate * p.z()) * dir;
          return J;
        });
  };
  m.alpha_s = scaled_form(vs, -L);
  m.alpha_u = scaled_form(vu, +L);
  m.alpha_X = constant_one_form({0, 0, 1});
  m.alpha_plus = *m.alpha_u - *m.alpha_s;
  m.alpha_minus = *m.alpha_u + *m.alpha_s;

  m.invariant_volume = constant_three_form(1.0);
  m.reference_volume = constant_three_form(1.0);
  m.named_orbits.push_back({"fixed_point", Vec3(0, 0, 0), 1.0});

  const OneForm as = *m.alpha_s, au = *m.alpha_u;
  m.chart.metric = [as, au](const Vec3& p) {
    const Vec3 a = as.comps(p), b = au.comps(p);
    Mat3 G = a * a.transpose() + b * b.transpose();
    G(2, 2) += 1.0;
    return G;
  };
  m.chart.metric_name = "adapted_frame";
  return m;
}

// ---------------------------------------------------------------------------
// Built-in model: projectively-Anosov-type pair on the 3-torus.
//
//   alpha_- = dz + eps  (cos(2 pi m z) dx - sin(2 pi m z) dy)   m < 0
//   alpha_+ = dz + eps2 (cos(2 pi n z) dx - sin(2 pi n z) dy)   n > 0
//
// with contact volumes 2 pi m eps^2 < 0 < 2 pi n eps2^2 (the dz term drops
// out of a^da). X spans ker alpha_- cap ker alpha_+, normalized to unit
// Euclidean length; eps != eps2 keeps the kernels transverse on the shared
// circle direction.

inline OneForm t3_wound_form(int freq, double amp) {
  const double w = two_pi() * freq;
  return make_one_form(
      [w, amp](const Vec3& p) -> Vec3 {
        return Vec3(amp * std::cos(w * p.z()), -amp * std::sin(w * p.z()), 1.0);
      },
      [w, amp](const Vec3& p) {
        Mat3 J = Mat3::Zero();
        J(0, 2) = -w * amp * std::sin(w * p.z());
        J(1, 2) = -w * amp * std::cos(w * p.z());
        return J;
      });
}

// cos(2 pi n z) dx - sin(2 pi n z) dy: the winding contact family on the
// 3-torus.  Its Reeb field equals its own coefficient vector.
inline OneForm t3_contact_form(int n) {
  const double w = two_pi() * n;
  return make_one_form(
      [w](const Vec3& p) -> Vec3 {
        return Vec3(std::cos(w * p.z()), -std::sin(w * p.z()), 0.0);
      },
      [w](const Vec3& p) {
        Mat3 J = Mat3::Zero();
        J(0, 2) = -w * std::sin(w * p.z());
        J(1, 2) = -w * std::cos(w * p.z());
        return J;
      });
}

inline FlowModel t3_pA(int m, int n, double eps, double eps2) {
  if (!(m < 0 && 0 < n))
    throw ModelError("t3_pA: need m < 0 < n, got m=" + std::to_string(m) +
                     ", n=" + std::to_string(n));
  if (!(eps > 0.0 && eps < 1.0 && eps2 > 0.0 && eps2 < 1.0))
    throw ModelError("t3_pA: eps and eps2 must lie in (0,1)");
  if (eps == eps2)
    throw ModelError("t3_pA: eps == eps2 degenerates the kernel intersection");

  FlowModel model;
  model.name = "t3_pA";
  model.chart.kind = ChartKind::torus3;
  model.alpha_minus = t3_wound_form(m, eps);
  model.alpha_plus = t3_wound_form(n, eps2);

  const OneForm am = *model.alpha_minus, ap = *model.alpha_plus;
  auto cross_val = [am, ap](const Vec3& p) -> Vec3 {
    return am.comps(p).cross(ap.comps(p));
  };
  auto cross_jac = [am, ap](const Vec3& p) {
    const Vec3 a = am.comps(p), b = ap.comps(p);
    const Mat3 Ja = am.jacobian(p), Jb = ap.jacobian(p);
    Mat3 J;
    for (int c = 0; c < 3; ++c)
      J.col(c) = Ja.col(c).cross(b) + a.cross(Jb.col(c));
    return J;
  };

  // both forms depend on z alone, but scan a full grid anyway
  for (int k = 0; k < 4096; ++k) {
    const Vec3 p(0.5, 0.5, k / 4096.0);
    if (cross_val(p).norm() < 1e-8)
      throw ModelError("t3_pA: alpha_- parallel to alpha_+ near z=" +
                       std::to_string(p.z()));
  }

  model.X = make_vector(
      [cross_val](const Vec3& p) -> Vec3 {
        const Vec3 w = cross_val(p);
        return w / w.norm();
      },
      [cross_val, cross_jac](const Vec3& p) {
        const Vec3 w = cross_val(p);
        const double nw = w.norm();
        const Vec3 x = w / nw;
        const Mat3 Jw = cross_jac(p);
        return (((Mat3::Identity() - x * x.transpose()) * Jw) / nw).eval();
      });
  return model;
}

}  // namespace anoflow
