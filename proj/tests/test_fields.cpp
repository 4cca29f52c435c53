#include <anoflow/fields.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace anoflow;
using Catch::Approx;


namespace {

const std::vector<Vec3> k_sample_points = {
    {0.13, 0.27, 0.71}, {0.52, 0.08, 0.33}, {0.91, 0.44, 0.06},
    {0.05, 0.62, 0.58}, {0.37, 0.81, 0.24}, {0.68, 0.19, 0.95},
    {0.24, 0.73, 0.49}, {0.79, 0.56, 0.12},
};

double max_comp_diff(const std::function<Vec3(const Vec3&)>& f,
                     const std::function<Vec3(const Vec3&)>& g) {
  double worst = 0.0;
  for (const Vec3& p : k_sample_points)
    worst = std::max(worst, (f(p) - g(p)).cwiseAbs().maxCoeff());
  return worst;
}

double max_abs(const std::function<double(const Vec3&)>& f) {
  double worst = 0.0;
  for (const Vec3& p : k_sample_points)
    worst = std::max(worst, std::fabs(f(p)));
  return worst;
}

// dz - y dx, the standard positive contact form, with closed-form jacobian.
OneForm standard_contact() {
  return make_one_form(
      [](const Vec3& p) { return Vec3(-p.y(), 0.0, 1.0); },
      [](const Vec3&) {
        Mat3 J = Mat3::Zero();
        J(0, 1) = -1.0;
        return J;
      });
}

// cos(2 pi n z) dx - sin(2 pi n z) dy.
OneForm xi_family(int n) {
  const double w = oracles::two_pi * n;
  return make_one_form(
      [w](const Vec3& p) {
        return Vec3(std::cos(w * p.z()), -std::sin(w * p.z()), 0.0);
      },
      [w](const Vec3& p) {
        Mat3 J = Mat3::Zero();
        J(0, 2) = -w * std::sin(w * p.z());
        J(1, 2) = -w * std::cos(w * p.z());
        return J;
      });
}

}  // namespace

TEST_CASE("wedge of basis 1-forms", "[fields][wedge]") {
  const OneForm dx = constant_one_form({1, 0, 0});
  const OneForm dy = constant_one_form({0, 1, 0});
  const TwoForm w = wedge(dx, dy);
  for (const Vec3& p : k_sample_points) {
    CHECK(w.comps(p).x() == 0.0);
    CHECK(w.comps(p).y() == 0.0);
    CHECK(w.comps(p).z() == 1.0);  // the dx^dy slot
  }
}

TEST_CASE("wedge reproduces the standard contact volume", "[fields][wedge]") {
  const OneForm alpha = standard_contact();
  const TwoForm dxdy = make_two_form(
      [](const Vec3&) { return Vec3(0, 0, 1); },
      [](const Vec3&) { return Mat3::Zero().eval(); });
  const ThreeForm vol = wedge(alpha, dxdy);
  for (const Vec3& p : k_sample_points) CHECK(vol.coeff(p) == Approx(1.0));
}

TEST_CASE("wedge antisymmetry and graded commutativity", "[fields][wedge]") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 4; ++trial) {
    const OneForm a = oracles::random_one_form(rng);
    const OneForm b = oracles::random_one_form(rng);
    const TwoForm B = oracles::random_two_form(rng);

    const TwoForm aa = wedge(a, a);
    CHECK(max_comp_diff(aa.comps, [](const Vec3&) { return Vec3::Zero().eval(); }) <
          1e-14);

    const TwoForm ab = wedge(a, b);
    const TwoForm ba = wedge(b, a);
    CHECK(max_comp_diff(ab.comps, [&](const Vec3& p) -> Vec3 {
            return -ba.comps(p);
          }) < 1e-14);

    // deg 1 * deg 2: even sign, forms commute.
    const ThreeForm aB = wedge(a, B);
    const ThreeForm Ba = wedge(B, a);
    CHECK(max_abs([&](const Vec3& p) { return aB.coeff(p) - Ba.coeff(p); }) <
          1e-14);
  }
}

TEST_CASE("exterior derivative against symbolic oracles", "[fields][ext_d]") {
  SECTION("d(dz - y dx) = dx^dy") {
    const TwoForm d = ext_d(standard_contact());
    CHECK(max_comp_diff(d.comps, [](const Vec3&) { return Vec3(0, 0, 1); }) <
          1e-9);
  }
  SECTION("d(alpha_n) matches the hand derivative") {
    for (int n : {1, 2, -1}) {
      const TwoForm d = ext_d(xi_family(n));
      const double w = oracles::two_pi * n;
      // -2 pi n sin dz^dx - 2 pi n cos dz^dy, rewritten in the
      // (dy^dz, dz^dx, dx^dy) basis.
      auto expect = [w](const Vec3& p) {
        return Vec3(w * std::cos(w * p.z()), -w * std::sin(w * p.z()), 0.0);
      };
      CHECK(max_comp_diff(d.comps, expect) < 1e-8);
    }
  }
  SECTION("d of a constant scalar vanishes") {
    const OneForm d = ext_d(constant_scalar(3.5));
    CHECK(max_comp_diff(d.comps, [](const Vec3&) { return Vec3::Zero().eval(); }) ==
          0.0);
  }
}

TEST_CASE("d compose d vanishes to stencil tolerance", "[fields][ext_d]") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const ScalarField f = oracles::random_scalar(rng);
    const TwoForm ddf = ext_d(ext_d(f));
    CHECK(max_comp_diff(ddf.comps, [](const Vec3&) { return Vec3::Zero().eval(); }) <
          1e-8);

    const OneForm a = oracles::random_one_form(rng);
    const ThreeForm dda = ext_d(ext_d(a));
    CHECK(max_abs(dda.coeff) < 1e-8);
  }
}

TEST_CASE("graded Leibniz rule for d over wedge", "[fields][ext_d]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 4; ++trial) {
    const OneForm a = oracles::random_one_form(rng);
    const OneForm b = oracles::random_one_form(rng);
    const ThreeForm lhs = ext_d(wedge(a, b));
    const ThreeForm rhs = wedge(ext_d(a), b) - wedge(a, ext_d(b));
    CHECK(max_abs([&](const Vec3& p) { return lhs.coeff(p) - rhs.coeff(p); }) <
          1e-9);
  }
}

TEST_CASE("interior product slot convention", "[fields][interior]") {
  SECTION("i_dz(dx^dy^dz) = +dx^dy") {
    const TwoForm w = interior(constant_vector({0, 0, 1}), constant_three_form(1.0));
    CHECK(max_comp_diff(w.comps, [](const Vec3&) { return Vec3(0, 0, 1); }) == 0.0);
  }
  SECTION("pairing with the Reeb normalization is 1") {
    const ScalarField s =
        interior(constant_vector({0, 0, 1}), standard_contact());
    for (const Vec3& p : k_sample_points) CHECK(s.value(p) == Approx(1.0));
  }
  SECTION("kernel vector contracts to zero") {
    // ker(dx) contains dy-direction vectors.
    const ScalarField s =
        interior(constant_vector({0, 1, 0}), constant_one_form({1, 0, 0}));
    CHECK(max_abs(s.value) == 0.0);
  }
  SECTION("i_X i_X = 0") {
    std::mt19937_64 rng(13);
    const VectorField X = oracles::random_vector(rng);
    const ThreeForm w = oracles::random_three_form(rng);
    const OneForm twice = interior(X, interior(X, w));
    CHECK(max_comp_diff(twice.comps,
                        [](const Vec3&) { return Vec3::Zero().eval(); }) < 1e-13);
    const TwoForm B = oracles::random_two_form(rng);
    const ScalarField s = interior(X, interior(X, B));
    CHECK(max_abs(s.value) < 1e-13);
  }
}

TEST_CASE("Lie derivative basics", "[fields][lie]") {
  SECTION("translation invariance of the coordinate volume") {
    const ThreeForm L =
        lie_derivative(constant_vector({1, 0, 0}), constant_three_form(1.0));
    CHECK(max_abs(L.coeff) < 1e-12);
  }
  SECTION("matches the flow-pullback oracle on a 1-form") {
    std::mt19937_64 rng(17);
    const VectorField X = oracles::random_vector(rng);
    const OneForm a = oracles::random_one_form(rng);
    const OneForm L = lie_derivative(X, a);
    for (const Vec3& p : k_sample_points) {
      const Vec3 fd = oracles::pullback_lie(X, a, p, 2e-5);
      CHECK((L.comps(p) - fd).norm() < 1e-5);
    }
  }
}

TEST_CASE("Lie derivative converges to the pullback oracle at order 2",
          "[fields][lie][convergence]") {
  std::mt19937_64 rng(19);
  const VectorField X = oracles::random_vector(rng);
  const double h = 0.04;
  int checked = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const OneForm a = oracles::random_one_form(rng);
    const OneForm L = lie_derivative(X, a);
    double err_h = 0.0, err_half = 0.0;
    for (const Vec3& p : k_sample_points) {
      err_h = std::max(err_h,
                       (L.comps(p) - oracles::pullback_lie(X, a, p, h)).norm());
      err_half = std::max(
          err_half, (L.comps(p) - oracles::pullback_lie(X, a, p, h / 2)).norm());
    }
    REQUIRE(err_half > 0.0);
    CHECK(err_h / err_half >= 3.5);
    ++checked;
  }
  CHECK(checked == 5);
}

TEST_CASE("divergence", "[fields][divergence]") {
  SECTION("translation field has zero divergence") {
    const ScalarField d =
        divergence(constant_vector({1, 0, 0}), constant_three_form(1.0));
    CHECK(max_abs(d.value) < 1e-12);
  }
  SECTION("x d/dx has divergence 1") {
    const VectorField X = make_vector(
        [](const Vec3& p) { return Vec3(p.x(), 0, 0); },
        [](const Vec3&) {
          Mat3 J = Mat3::Zero();
          J(0, 0) = 1.0;
          return J;
        });
    const ScalarField d = divergence(X, constant_three_form(1.0));
    for (const Vec3& p : k_sample_points) CHECK(d.value(p) == Approx(1.0));
  }
  SECTION("volume form with an isolated zero is rejected at that point") {
    const ThreeForm bad = make_three_form(
        [](const Vec3& p) { return p.x(); },
        [](const Vec3&) { return Vec3(1, 0, 0); });
    const ScalarField d = divergence(constant_vector({1, 0, 0}), bad);
    CHECK_THROWS_AS(d.value(Vec3(0, 0.5, 0.5)), FieldError);
    CHECK_NOTHROW(d.value(Vec3(0.5, 0.5, 0.5)));
  }
}

TEST_CASE("Lie bracket", "[fields][bracket]") {
  SECTION("coordinate fields commute") {
    const VectorField b =
        bracket(constant_vector({1, 0, 0}), constant_vector({0, 1, 0}));
    CHECK(max_comp_diff(b.value, [](const Vec3&) { return Vec3::Zero().eval(); }) ==
          0.0);
  }
  SECTION("[x dy, dx] = -dy") {
    const VectorField X = make_vector(
        [](const Vec3& p) { return Vec3(0, p.x(), 0); },
        [](const Vec3&) {
          Mat3 J = Mat3::Zero();
          J(1, 0) = 1.0;
          return J;
        });
    const VectorField b = bracket(X, constant_vector({1, 0, 0}));
    CHECK(max_comp_diff(b.value, [](const Vec3&) { return Vec3(0, -1, 0); }) <
          1e-12);
  }
  SECTION("antisymmetry on random fields") {
    std::mt19937_64 rng(23);
    const VectorField X = oracles::random_vector(rng);
    const VectorField Y = oracles::random_vector(rng);
    const VectorField lhs = bracket(X, Y);
    const VectorField rhs = bracket(Y, X);
    CHECK(max_comp_diff(lhs.value, [&](const Vec3& p) -> Vec3 {
            return -rhs.value(p);
          }) < 1e-12);
  }
  SECTION("Jacobi identity residual below stencil tolerance") {
    std::mt19937_64 rng(29);
    const VectorField X = oracles::random_vector(rng);
    const VectorField Y = oracles::random_vector(rng);
    const VectorField Z = oracles::random_vector(rng);
    const VectorField j = bracket(X, bracket(Y, Z)) + bracket(Y, bracket(Z, X)) +
                          bracket(Z, bracket(X, Y));
    CHECK(max_comp_diff(j.value, [](const Vec3&) { return Vec3::Zero().eval(); }) <
          1e-8);
  }
}

TEST_CASE("contact volume of reference forms", "[fields][contact_volume]") {
  SECTION("standard form is positive contact") {
    const ThreeForm v = contact_volume(standard_contact());
    for (const Vec3& p : k_sample_points) CHECK(v.coeff(p) == Approx(1.0));
  }
  SECTION("trig family has constant coefficient 2 pi n") {
    for (int n : {1, 2, -1}) {
      const ThreeForm v = contact_volume(xi_family(n));
      for (const Vec3& p : k_sample_points)
        CHECK(v.coeff(p) == Approx(oracles::two_pi * n).margin(1e-9));
    }
  }
  SECTION("closed form dz is not contact") {
    const ThreeForm v = contact_volume(constant_one_form({0, 0, 1}));
    CHECK(max_abs(v.coeff) < 1e-12);
  }
}

TEST_CASE("derivative providers: exact vs finite differences",
          "[fields][dspec]") {
  std::mt19937_64 rng(31);
  const ScalarField f = oracles::random_scalar(rng);

  SECTION("order-4 differences agree with the closed form to O(h^4)") {
    const ScalarField fd = with_spec(f, {DerivMode::fd4, 1e-3});
    double worst = 0.0;
    for (const Vec3& p : k_sample_points)
      worst = std::max(worst, (f.gradient(p) - fd.gradient(p)).norm());
    CHECK(worst < 1e-5);
  }
  SECTION("observed convergence orders match the stencils") {
    auto err_at = [&](DerivMode mode, double h) {
      const ScalarField fd = with_spec(f, {mode, h});
      double worst = 0.0;
      for (const Vec3& p : k_sample_points)
        worst = std::max(worst, (f.gradient(p) - fd.gradient(p)).norm());
      return worst;
    };
    const double e2 = err_at(DerivMode::fd2, 2e-3);
    const double e2h = err_at(DerivMode::fd2, 1e-3);
    CHECK(e2 / e2h >= 3.5);   // order 2
    const double e4 = err_at(DerivMode::fd4, 4e-3);
    const double e4h = err_at(DerivMode::fd4, 2e-3);
    CHECK(e4 / e4h >= 12.0);  // order 4
  }
  SECTION("exact mode without a provider is rejected") {
    const ScalarField bare =
        make_scalar([](const Vec3& p) { return p.x(); }, DerivSpec{DerivMode::exact, 1e-4});
    CHECK_THROWS_AS(bare.gradient(Vec3::Zero()), FieldError);
  }
}
