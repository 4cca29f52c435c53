#pragma once

// Coordinate exterior calculus on 3-dimensional chart boxes.
//
// Conventions, fixed once for the whole library:
//   * 1-forms are stored by components against (dx, dy, dz).
//   * 2-forms are stored against (dy^dz, dz^dx, dx^dy), so the wedge of two
//     1-forms has exactly the components of the cross product of their
//     component vectors.
//   * 3-forms are a single coefficient against dx^dy^dz.
//   * interior(X, w) contracts X into the FIRST slot:
//     (i_X w)(v, ...) = w(X, v, ...).  In components: i_X of a 2-form B is
//     the 1-form B x X; i_X of a 3-form c is the 2-form c*X.
//
// Every field carries a derivative provider (DerivSpec): closed-form
// derivatives when the constructor received them, central differences of
// order 2 or 4 otherwise.  Algebraic combinations keep closed-form providers
// alive through product/chain rules; operations whose derivative would need
// second derivatives of the inputs (ext_d of anything, bracket) difference
// their own output instead.

#include "core.hpp"

namespace anoflow {

struct ScalarField {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> exact_gradient;  // may be empty
  DerivSpec dspec;

  double operator()(const Vec3& p) const { return value(p); }

  Vec3 gradient(const Vec3& p) const {
    if (dspec.mode == DerivMode::exact) {
      if (!exact_gradient)
        throw FieldError("scalar field: exact mode without closed-form gradient");
      return exact_gradient(p);
    }
    return detail::fd_gradient(value, p, dspec);
  }
};

struct VectorField {
  std::function<Vec3(const Vec3&)> value;
  std::function<Mat3(const Vec3&)> exact_jacobian;  // J(i,j) = d v_i / d x_j
  DerivSpec dspec;

  Vec3 operator()(const Vec3& p) const { return value(p); }

  Mat3 jacobian(const Vec3& p) const {
    if (dspec.mode == DerivMode::exact) {
      if (!exact_jacobian)
        throw FieldError("vector field: exact mode without closed-form jacobian");
      return exact_jacobian(p);
    }
    return detail::fd_jacobian(value, p, dspec);
  }
};

struct OneForm {
  std::function<Vec3(const Vec3&)> comps;  // against (dx, dy, dz)
  std::function<Mat3(const Vec3&)> exact_jacobian;
  DerivSpec dspec;

  Vec3 operator()(const Vec3& p) const { return comps(p); }

  Mat3 jacobian(const Vec3& p) const {
    if (dspec.mode == DerivMode::exact) {
      if (!exact_jacobian)
        throw FieldError("1-form: exact mode without closed-form jacobian");
      return exact_jacobian(p);
    }
    return detail::fd_jacobian(comps, p, dspec);
  }
};

struct TwoForm {
  std::function<Vec3(const Vec3&)> comps;  // against (dy^dz, dz^dx, dx^dy)
  std::function<Mat3(const Vec3&)> exact_jacobian;
  DerivSpec dspec;

  Vec3 operator()(const Vec3& p) const { return comps(p); }

  Mat3 jacobian(const Vec3& p) const {
    if (dspec.mode == DerivMode::exact) {
      if (!exact_jacobian)
        throw FieldError("2-form: exact mode without closed-form jacobian");
      return exact_jacobian(p);
    }
    return detail::fd_jacobian(comps, p, dspec);
  }
};

struct ThreeForm {
  std::function<double(const Vec3&)> coeff;  // against dx^dy^dz
  std::function<Vec3(const Vec3&)> exact_gradient;
  DerivSpec dspec;

  double operator()(const Vec3& p) const { return coeff(p); }

  Vec3 gradient(const Vec3& p) const {
    if (dspec.mode == DerivMode::exact) {
      if (!exact_gradient)
        throw FieldError("3-form: exact mode without closed-form gradient");
      return exact_gradient(p);
    }
    return detail::fd_gradient(coeff, p, dspec);
  }
};

// --- factories ------------------------------------------------------------

inline ScalarField make_scalar(std::function<double(const Vec3&)> v,
                               DerivSpec d = {}) {
  return {std::move(v), nullptr, d};
}
inline ScalarField make_scalar(std::function<double(const Vec3&)> v,
                               std::function<Vec3(const Vec3&)> grad) {
  return {std::move(v), std::move(grad), {DerivMode::exact, 1e-4}};
}
inline ScalarField constant_scalar(double c) {
  return {[c](const Vec3&) { return c; },
          [](const Vec3&) { return Vec3::Zero().eval(); },
          {DerivMode::exact, 1e-4}};
}

inline VectorField make_vector(std::function<Vec3(const Vec3&)> v,
                               DerivSpec d = {}) {
  return {std::move(v), nullptr, d};
}
inline VectorField make_vector(std::function<Vec3(const Vec3&)> v,
                               std::function<Mat3(const Vec3&)> jac) {
  return {std::move(v), std::move(jac), {DerivMode::exact, 1e-4}};
}
inline VectorField constant_vector(const Vec3& v) {
  return {[v](const Vec3&) { return v; },
          [](const Vec3&) { return Mat3::Zero().eval(); },
          {DerivMode::exact, 1e-4}};
}

inline OneForm make_one_form(std::function<Vec3(const Vec3&)> c,
                             DerivSpec d = {}) {
  return {std::move(c), nullptr, d};
}
inline OneForm make_one_form(std::function<Vec3(const Vec3&)> c,
                             std::function<Mat3(const Vec3&)> jac) {
  return {std::move(c), std::move(jac), {DerivMode::exact, 1e-4}};
}
inline OneForm constant_one_form(const Vec3& c) {
  return {[c](const Vec3&) { return c; },
          [](const Vec3&) { return Mat3::Zero().eval(); },
          {DerivMode::exact, 1e-4}};
}

inline TwoForm make_two_form(std::function<Vec3(const Vec3&)> c,
                             DerivSpec d = {}) {
  return {std::move(c), nullptr, d};
}
inline TwoForm make_two_form(std::function<Vec3(const Vec3&)> c,
                             std::function<Mat3(const Vec3&)> jac) {
  return {std::move(c), std::move(jac), {DerivMode::exact, 1e-4}};
}

inline ThreeForm make_three_form(std::function<double(const Vec3&)> c,
                                 DerivSpec d = {}) {
  return {std::move(c), nullptr, d};
}
inline ThreeForm make_three_form(std::function<double(const Vec3&)> c,
                                 std::function<Vec3(const Vec3&)> grad) {
  return {std::move(c), std::move(grad), {DerivMode::exact, 1e-4}};
}
inline ThreeForm constant_three_form(double c) {
  return {[c](const Vec3&) { return c; },
          [](const Vec3&) { return Vec3::Zero().eval(); },
          {DerivMode::exact, 1e-4}};
}

// Force a derivative mode (tests compare exact against FD on the same field).
template <class Field>
Field with_spec(Field f, DerivSpec d) {
  f.dspec = d;
  return f;
}

// --- scalar algebra -------------------------------------------------------

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  ScalarField r;
  r.value = [a, b](const Vec3& p) { return a.value(p) + b.value(p); };
  const bool ex = a.exact_gradient && b.exact_gradient;
  if (ex)
    r.exact_gradient = [a, b](const Vec3& p) -> Vec3 {
      return a.exact_gradient(p) + b.exact_gradient(p);
    };
  r.dspec = detail::merge_spec(a.dspec, b.dspec, ex);
  return r;
}

inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  ScalarField r;
  r.value = [a, b](const Vec3& p) { return a.value(p) - b.value(p); };
  const bool ex = a.exact_gradient && b.exact_gradient;
  if (ex)
    r.exact_gradient = [a, b](const Vec3& p) -> Vec3 {
      return a.exact_gradient(p) - b.exact_gradient(p);
    };
  r.dspec = detail::merge_spec(a.dspec, b.dspec, ex);
  return r;
}

inline ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  ScalarField r;
  r.value = [a, b](const Vec3& p) { return a.value(p) * b.value(p); };
  const bool ex = a.exact_gradient && b.exact_gradient;
  if (ex)
    r.exact_gradient = [a, b](const Vec3& p) -> Vec3 {
      return a.exact_gradient(p) * b.value(p) + b.exact_gradient(p) * a.value(p);
    };
  r.dspec = detail::merge_spec(a.dspec, b.dspec, ex);
  return r;
}

inline ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  ScalarField r;
  r.value = [a, b](const Vec3& p) { return a.value(p) / b.value(p); };
  const bool ex = a.exact_gradient && b.exact_gradient;
  if (ex)
    r.exact_gradient = [a, b](const Vec3& p) -> Vec3 {
      const double bv = b.value(p);
      return (a.exact_gradient(p) * bv - b.exact_gradient(p) * a.value(p)) /
             (bv * bv);
    };
  r.dspec = detail::merge_spec(a.dspec, b.dspec, ex);
  return r;
}

inline ScalarField operator*(double c, const ScalarField& a) {
  return constant_scalar(c) * a;
}

inline ScalarField sqrt_field(const ScalarField& a) {
  ScalarField r;
  r.value = [a](const Vec3& p) {
    const double v = a.value(p);
    if (v <= 0.0) throw FieldError("sqrt_field: non-positive argument");
    return std::sqrt(v);
  };
  if (a.exact_gradient)
    r.exact_gradient = [a](const Vec3& p) -> Vec3 {
      return a.exact_gradient(p) / (2.0 * std::sqrt(a.value(p)));
    };
  r.dspec = a.dspec;
  return r;
}

inline ScalarField log_field(const ScalarField& a) {
  ScalarField r;
  r.value = [a](const Vec3& p) {
    const double v = a.value(p);
    if (v <= 0.0) throw FieldError("log_field: non-positive argument");
    return std::log(v);
  };
  if (a.exact_gradient)
    r.exact_gradient = [a](const Vec3& p) -> Vec3 {
      return a.exact_gradient(p) / a.value(p);
    };
  r.dspec = a.dspec;
  return r;
}

// --- linear combinations of vectors and forms -----------------------------

inline VectorField operator+(const VectorField& a, const VectorField& b) {
  VectorField r;
  r.value = [a, b](const Vec3& p) -> Vec3 { return a.value(p) + b.value(p); };
  const bool ex = a.exact_jacobian && b.exact_jacobian;
  if (ex)
    r.exact_jacobian = [a, b](const Vec3& p) -> Mat3 {
      return a.exact_jacobian(p) + b.exact_jacobian(p);
    };
  r.dspec = detail::merge_spec(a.dspec, b.dspec, ex);
  return r;
}

inline VectorField operator-(const VectorField& a, const VectorField& b) {
  VectorField r;
  r.value = [a, b](const Vec3& p) -> Vec3 { return a.value(p) - b.value(p); };
  const bool ex = a.exact_jacobian && b.exact_jacobian;
  if (ex)
    r.exact_jacobian = [a, b](const Vec3& p) -> Mat3 {
      return a.exact_jacobian(p) - b.exact_jacobian(p);
    };
  r.dspec = detail::merge_spec(a.dspec, b.dspec, ex);
  return r;
}

// f*V with the product-rule jacobian J = f J_V + V grad(f)^T.
inline VectorField operator*(const ScalarField& f, const VectorField& v) {
  VectorField r;
  r.value = [f, v](const Vec3& p) -> Vec3 { return f.value(p) * v.value(p); };
  const bool ex = f.exact_gradient && v.exact_jacobian;
  if (ex)
    r.exact_jacobian = [f, v](const Vec3& p) -> Mat3 {
      return f.value(p) * v.exact_jacobian(p) +
             v.value(p) * f.exact_gradient(p).transpose();
    };
  r.dspec = detail::merge_spec(f.dspec, v.dspec, ex);
  return r;
}

inline VectorField operator*(double c, const VectorField& v) {
  return constant_scalar(c) * v;
}

inline OneForm operator+(const OneForm& a, const OneForm& b) {
  OneForm r;
  r.comps = [a, b](const Vec3& p) -> Vec3 { return a.comps(p) + b.comps(p); };
  const bool ex = a.exact_jacobian && b.exact_jacobian;
  if (ex)
    r.exact_jacobian = [a, b](const Vec3& p) -> Mat3 {
      return a.exact_jacobian(p) + b.exact_jacobian(p);
    };
  r.dspec = detail::merge_spec(a.dspec, b.dspec, ex);
  return r;
}

inline OneForm operator-(const OneForm& a, const OneForm& b) {
  OneForm r;
  r.comps = [a, b](const Vec3& p) -> Vec3 { return a.comps(p) - b.comps(p); };
  const bool ex = a.exact_jacobian && b.exact_jacobian;
  if (ex)
    r.exact_jacobian = [a, b](const Vec3& p) -> Mat3 {
      return a.exact_jacobian(p) - b.exact_jacobian(p);
    };
  r.dspec = detail::merge_spec(a.dspec, b.dspec, ex);
  return r;
}

inline OneForm operator*(const ScalarField& f, const OneForm& a) {
  OneForm r;
  r.comps = [f, a](const Vec3& p) -> Vec3 { return f.value(p) * a.comps(p); };
  const bool ex = f.exact_gradient && a.exact_jacobian;
  if (ex)
    r.exact_jacobian = [f, a](const Vec3& p) -> Mat3 {
      return f.value(p) * a.exact_jacobian(p) +
             a.comps(p) * f.exact_gradient(p).transpose();
    };
  r.dspec = detail::merge_spec(f.dspec, a.dspec, ex);
  return r;
}

inline OneForm operator*(double c, const OneForm& a) {
  return constant_scalar(c) * a;
}

inline TwoForm operator+(const TwoForm& a, const TwoForm& b) {
  TwoForm r;
  r.comps = [a, b](const Vec3& p) -> Vec3 { return a.comps(p) + b.comps(p); };
  const bool ex = a.exact_jacobian && b.exact_jacobian;
  if (ex)
    r.exact_jacobian = [a, b](const Vec3& p) -> Mat3 {
      return a.exact_jacobian(p) + b.exact_jacobian(p);
    };
  r.dspec = detail::merge_spec(a.dspec, b.dspec, ex);
  return r;
}

inline TwoForm operator-(const TwoForm& a, const TwoForm& b) {
  TwoForm r;
  r.comps = [a, b](const Vec3& p) -> Vec3 { return a.comps(p) - b.comps(p); };
  const bool ex = a.exact_jacobian && b.exact_jacobian;
  if (ex)
    r.exact_jacobian = [a, b](const Vec3& p) -> Mat3 {
      return a.exact_jacobian(p) - b.exact_jacobian(p);
    };
  r.dspec = detail::merge_spec(a.dspec, b.dspec, ex);
  return r;
}

inline ThreeForm operator+(const ThreeForm& a, const ThreeForm& b) {
  ThreeForm r;
  r.coeff = [a, b](const Vec3& p) { return a.coeff(p) + b.coeff(p); };
  const bool ex = a.exact_gradient && b.exact_gradient;
  if (ex)
    r.exact_gradient = [a, b](const Vec3& p) -> Vec3 {
      return a.exact_gradient(p) + b.exact_gradient(p);
    };
  r.dspec = detail::merge_spec(a.dspec, b.dspec, ex);
  return r;
}

inline ThreeForm operator-(const ThreeForm& a, const ThreeForm& b) {
  ThreeForm r;
  r.coeff = [a, b](const Vec3& p) { return a.coeff(p) - b.coeff(p); };
  const bool ex = a.exact_gradient && b.exact_gradient;
  if (ex)
    r.exact_gradient = [a, b](const Vec3& p) -> Vec3 {
      return a.exact_gradient(p) - b.exact_gradient(p);
    };
  r.dspec = detail::merge_spec(a.dspec, b.dspec, ex);
  return r;
}

inline ThreeForm operator*(const ScalarField& f, const ThreeForm& w) {
  ThreeForm r;
  r.coeff = [f, w](const Vec3& p) { return f.value(p) * w.coeff(p); };
  const bool ex = f.exact_gradient && w.exact_gradient;
  if (ex)
    r.exact_gradient = [f, w](const Vec3& p) -> Vec3 {
      return f.exact_gradient(p) * w.coeff(p) + w.exact_gradient(p) * f.value(p);
    };
  r.dspec = detail::merge_spec(f.dspec, w.dspec, ex);
  return r;
}

// --- wedge ----------------------------------------------------------------

// 1^1 -> 2: components are the cross product of the component vectors.
inline TwoForm wedge(const OneForm& a, const OneForm& b) {
  TwoForm r;
  r.comps = [a, b](const Vec3& p) -> Vec3 { return a.comps(p).cross(b.comps(p)); };
  const bool ex = a.exact_jacobian && b.exact_jacobian;
  if (ex)
    r.exact_jacobian = [a, b](const Vec3& p) -> Mat3 {
      const Vec3 av = a.comps(p), bv = b.comps(p);
      const Mat3 Ja = a.exact_jacobian(p), Jb = b.exact_jacobian(p);
      Mat3 J;
      for (int c = 0; c < 3; ++c)
        J.col(c) = Ja.col(c).cross(bv) + av.cross(Jb.col(c));
      return J;
    };
  r.dspec = detail::merge_spec(a.dspec, b.dspec, ex);
  return r;
}

// 1^2 -> 3: coefficient is the dot product of the component vectors.
inline ThreeForm wedge(const OneForm& a, const TwoForm& B) {
  ThreeForm r;
  r.coeff = [a, B](const Vec3& p) { return a.comps(p).dot(B.comps(p)); };
  const bool ex = a.exact_jacobian && B.exact_jacobian;
  if (ex)
    r.exact_gradient = [a, B](const Vec3& p) -> Vec3 {
      return a.exact_jacobian(p).transpose() * B.comps(p) +
             B.exact_jacobian(p).transpose() * a.comps(p);
    };
  r.dspec = detail::merge_spec(a.dspec, B.dspec, ex);
  return r;
}

// 2^1 -> 3: even-degree shuffle, equal to 1^2.
inline ThreeForm wedge(const TwoForm& B, const OneForm& a) { return wedge(a, B); }

inline ThreeForm wedge(const OneForm& a, const OneForm& b, const OneForm& c) {
  return wedge(a, wedge(b, c));
}

// --- exterior derivative --------------------------------------------------

inline OneForm ext_d(const ScalarField& f) {
  OneForm r;
  r.comps = [f](const Vec3& p) -> Vec3 { return f.gradient(p); };
  r.dspec = detail::demote_spec(f.dspec);
  return r;
}

// Curl of the component vector, written against (dy^dz, dz^dx, dx^dy).
inline TwoForm ext_d(const OneForm& a) {
  TwoForm r;
  r.comps = [a](const Vec3& p) -> Vec3 {
    const Mat3 J = a.jacobian(p);
    return Vec3(J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1));
  };
  r.dspec = detail::demote_spec(a.dspec);
  return r;
}

// Divergence of the component vector.
inline ThreeForm ext_d(const TwoForm& B) {
  ThreeForm r;
  r.coeff = [B](const Vec3& p) { return B.jacobian(p).trace(); };
  r.dspec = detail::demote_spec(B.dspec);
  return r;
}

// --- interior product (first-slot contraction) ----------------------------

inline ScalarField interior(const VectorField& X, const OneForm& a) {
  ScalarField r;
  r.value = [X, a](const Vec3& p) { return a.comps(p).dot(X.value(p)); };
  const bool ex = X.exact_jacobian && a.exact_jacobian;
  if (ex)
    r.exact_gradient = [X, a](const Vec3& p) -> Vec3 {
      return a.exact_jacobian(p).transpose() * X.value(p) +
             X.exact_jacobian(p).transpose() * a.comps(p);
    };
  r.dspec = detail::merge_spec(X.dspec, a.dspec, ex);
  return r;
}

// i_X B = B x X in components.
inline OneForm interior(const VectorField& X, const TwoForm& B) {
  OneForm r;
  r.comps = [X, B](const Vec3& p) -> Vec3 { return B.comps(p).cross(X.value(p)); };
  const bool ex = X.exact_jacobian && B.exact_jacobian;
  if (ex)
    r.exact_jacobian = [X, B](const Vec3& p) -> Mat3 {
      const Vec3 Bv = B.comps(p), Xv = X.value(p);
      const Mat3 JB = B.exact_jacobian(p), JX = X.exact_jacobian(p);
      Mat3 J;
      for (int c = 0; c < 3; ++c)
        J.col(c) = JB.col(c).cross(Xv) + Bv.cross(JX.col(c));
      return J;
    };
  r.dspec = detail::merge_spec(X.dspec, B.dspec, ex);
  return r;
}

// i_X (c dx^dy^dz) = c * (X1 dy^dz + X2 dz^dx + X3 dx^dy).
inline TwoForm interior(const VectorField& X, const ThreeForm& w) {
  TwoForm r;
  r.comps = [X, w](const Vec3& p) -> Vec3 { return w.coeff(p) * X.value(p); };
  const bool ex = X.exact_jacobian && w.exact_gradient;
  if (ex)
    r.exact_jacobian = [X, w](const Vec3& p) -> Mat3 {
      return w.coeff(p) * X.exact_jacobian(p) +
             X.value(p) * w.exact_gradient(p).transpose();
    };
  r.dspec = detail::merge_spec(X.dspec, w.dspec, ex);
  return r;
}

// Pointwise pairing alpha(X); same as interior(X, alpha).
inline ScalarField pairing(const OneForm& a, const VectorField& X) {
  return interior(X, a);
}

// --- Lie derivative (Cartan formula), divergence, bracket -----------------

inline ScalarField lie_derivative(const VectorField& X, const ScalarField& f) {
  ScalarField r;
  r.value = [X, f](const Vec3& p) { return f.gradient(p).dot(X.value(p)); };
  r.dspec = detail::demote_spec(detail::merge_spec(X.dspec, f.dspec, false));
  return r;
}

inline OneForm lie_derivative(const VectorField& X, const OneForm& a) {
  return interior(X, ext_d(a)) + ext_d(interior(X, a));
}

inline TwoForm lie_derivative(const VectorField& X, const TwoForm& B) {
  return interior(X, ext_d(B)) + ext_d(interior(X, B));
}

// dw = 0 in top degree, so only the d i_X term survives.
inline ThreeForm lie_derivative(const VectorField& X, const ThreeForm& w) {
  return ext_d(interior(X, w));
}

inline ScalarField divergence(const VectorField& X, const ThreeForm& vol) {
  const ThreeForm lie = lie_derivative(X, vol);
  ScalarField r;
  r.value = [lie, vol](const Vec3& p) {
    const double c = vol.coeff(p);
    if (std::fabs(c) < 1e-100)
      throw FieldError("divergence: volume form vanishes at sample point");
    return lie.coeff(p) / c;
  };
  r.dspec = detail::demote_spec(detail::merge_spec(lie.dspec, vol.dspec, false));
  return r;
}

// [X, Y] = (DY)X - (DX)Y.
inline VectorField bracket(const VectorField& X, const VectorField& Y) {
  VectorField r;
  r.value = [X, Y](const Vec3& p) -> Vec3 {
    return Y.jacobian(p) * X.value(p) - X.jacobian(p) * Y.value(p);
  };
  r.dspec = detail::demote_spec(detail::merge_spec(X.dspec, Y.dspec, false));
  return r;
}

inline ThreeForm contact_volume(const OneForm& a) { return wedge(a, ext_d(a)); }

}  // namespace anoflow
