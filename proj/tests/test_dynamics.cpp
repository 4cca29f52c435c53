#include <anoflow/dynamics.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace anoflow;
using Catch::Approx;

TEST_CASE("flow integration on the cat suspension", "[dynamics][integrate]") {
  const FlowModel cat = cat_suspension();
  SECTION("one period maps the section by the cat map") {
    const Trajectory traj = integrate_flow(cat, Vec3(0.1, 0.2, 0.0), 1.0, 1e-3);
    const Vec3 end = traj.points.back();
    CHECK(end.x() == Approx(0.4).margin(1e-12));
    CHECK(end.y() == Approx(0.3).margin(1e-12));
    CHECK(std::min(end.z(), 1.0 - end.z()) == Approx(0.0).margin(1e-12));
  }
  SECTION("zero time returns the single starting sample") {
    const Trajectory traj = integrate_flow(cat, Vec3(0.3, 0.1, 0.6), 0.0, 1e-2);
    REQUIRE(traj.points.size() == 1);
    CHECK((traj.points[0] - Vec3(0.3, 0.1, 0.6)).norm() == 0.0);
  }
  SECTION("monodromy crossings are recorded with orientation") {
    const Trajectory fwd = integrate_flow(cat, Vec3(0.1, 0.2, 0.5), 2.0, 1e-2);
    int up = 0;
    for (const Crossing& c : fwd.crossings)
      if (c.axis == 2) {
        CHECK(c.dir == +1);
        ++up;
      }
    CHECK(up == 2);
    const Trajectory back = integrate_flow(cat, Vec3(0.1, 0.2, 0.5), -1.0, 1e-2);
    int down = 0;
    for (const Crossing& c : back.crossings)
      if (c.axis == 2) {
        CHECK(c.dir == -1);
        ++down;
      }
    CHECK(down == 1);
  }
  SECTION("rejects zero step and vanishing fields") {
    CHECK_THROWS_AS(integrate_flow(cat, Vec3(0.1, 0.1, 0.1), 1.0, 0.0),
                    DynamicsError);
    FlowModel dead = cat;
    dead.X = constant_vector({0, 0, 0});
    CHECK_THROWS_AS(integrate_flow(dead, Vec3(0.1, 0.1, 0.1), 1.0, 1e-2),
                    DynamicsError);
  }
}

TEST_CASE("integrator accuracy on the torus pair model", "[dynamics][integrate]") {
  const FlowModel t3 = t3_pA(-1, 1, 0.3, 0.6);
  const Vec3 p(0.23, 0.57, 0.81);

  SECTION("forward then backward returns within 10 step^4") {
    for (double step : {4e-3, 1e-3}) {
      const Trajectory fwd = integrate_flow(t3, p, 0.8, step);
      const Trajectory back = integrate_flow(t3, fwd.points.back(), -0.8, step);
      CHECK(chart_distance(t3.chart, back.points.back(), p) <
            10.0 * std::pow(step, 4));
    }
  }
  SECTION("halving the step cuts the endpoint error by at least 12x") {
    const Vec3 ref = integrate_flow(t3, p, 0.7, 6.25e-5).points.back();
    const double e1 =
        chart_distance(t3.chart, integrate_flow(t3, p, 0.7, 4e-3).points.back(), ref);
    const double e2 =
        chart_distance(t3.chart, integrate_flow(t3, p, 0.7, 2e-3).points.back(), ref);
    REQUIRE(e2 > 0.0);
    CHECK(e1 / e2 >= 12.0);
  }
  SECTION("consecutive samples satisfy the one-step relation") {
    const Trajectory traj = integrate_flow(t3, p, 0.5, 1e-2);
    for (size_t k = 0; k + 1 < traj.points.size(); ++k) {
      const Vec3 redo = canonicalize(
          t3.chart, detail::rk4_point_step(t3.X, traj.points[k], traj.step));
      CHECK(chart_distance(t3.chart, redo, traj.points[k + 1]) < 1e-14);
    }
  }
  SECTION("integrating past a gluing commutes with identification") {
    const FlowModel cat = cat_suspension();
    const Vec3 a(0.4, 0.9, 0.97);
    // same quotient point, one sheet down
    const Eigen::Vector2d xy = cat.chart.monodromy * a.head<2>();
    const Vec3 b(xy.x(), xy.y(), a.z() - 1.0);
    const Vec3 end_a = integrate_flow(cat, a, 0.2, 1e-3).points.back();
    const Vec3 end_b = integrate_flow(cat, b, 0.2, 1e-3).points.back();
    CHECK(chart_distance(cat.chart, end_a, end_b) < 1e-12);
  }
}

TEST_CASE("variational flow", "[dynamics][linearize]") {
  const FlowModel cat = cat_suspension();
  SECTION("cat monodromy over one period is the block cat map") {
    const FlowJacobian J = linearize_flow(cat, Vec3(0.15, 0.85, 0.3), 1.0, 1e-3);
    Mat3 expect = Mat3::Identity();
    expect(0, 0) = 2;
    expect(0, 1) = 1;
    expect(1, 0) = 1;
    expect(1, 1) = 1;
    CHECK((J.M - expect).norm() < 1e-12);
  }
  SECTION("zero time gives the identity") {
    CHECK((linearize_flow(cat, Vec3(0.2, 0.2, 0.2), 0.0, 1e-3).M -
           Mat3::Identity())
              .norm() == 0.0);
  }
  SECTION("the suspension flow is volume preserving") {
    for (double T : {0.7, 2.3, 5.0}) {
      const FlowJacobian J = linearize_flow(cat, Vec3(0.6, 0.1, 0.4), T, 1e-3);
      CHECK(J.M.determinant() == Approx(1.0).margin(1e-9));
    }
  }
  SECTION("agrees with an independent joint integrator on the torus model") {
    const FlowModel t3 = t3_pA(-1, 1, 0.3, 0.6);
    const Vec3 p(0.31, 0.44, 0.12);
    const FlowJacobian J = linearize_flow(t3, p, 0.5, 1e-3);
    const oracles::FlowStep ref = oracles::flow_with_jacobian(t3.X, p, 0.5, 256);
    CHECK((J.M - ref.M).norm() < 1e-9);
    CHECK(J.M.determinant() > 0.0);
  }
}

TEST_CASE("normal projection", "[dynamics][normal]") {
  FlowModel flat;
  flat.name = "flat";
  flat.X = constant_vector({0, 0, 1});
  const Vec3 p(0.5, 0.5, 0.5);
  CHECK((project_normal(flat, p, Vec3(1, 2, 3)) - Vec3(1, 2, 0)).norm() < 1e-14);
  CHECK(project_normal(flat, p, Vec3(0, 0, 2.5)).norm() < 1e-14);
  CHECK((project_normal(flat, p, Vec3(4, -1, 0)) - Vec3(4, -1, 0)).norm() <
        1e-14);
}

TEST_CASE("dominated-splitting estimation on the cat model",
          "[dynamics][lines]") {
  const FlowModel cat = cat_suspension();
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double s = std::sqrt(1.0 + phi * phi);
  const Vec3 vu(phi / s, 1.0 / s, 0.0);
  const Vec3 vs(1.0 / s, -phi / s, 0.0);

  SECTION("recovers both eigendirections") {
    for (const Vec3& p : {Vec3(0.2, 0.7, 0.4), Vec3(0.9, 0.1, 0.05)}) {
      const Mat3 G = cat.chart.metric(p);
      const LineEstimate eu = estimate_line(cat, p, LineKind::unstable, 20.0);
      REQUIRE(eu.converged);
      CHECK(line_angle(G, eu.line.dir, vu) < 1e-6);
      const LineEstimate es = estimate_line(cat, p, LineKind::stable, 20.0);
      REQUIRE(es.converged);
      CHECK(line_angle(G, es.line.dir, vs) < 1e-6);
    }
  }
  SECTION("an exact seed is a fixed point of the iteration") {
    LineEstimateOptions opts;
    opts.seed_dir = vu;
    const Vec3 p(0.35, 0.6, 0.8);
    const LineEstimate eu = estimate_line(cat, p, LineKind::unstable, 20.0, opts);
    REQUIRE(eu.converged);
    CHECK(line_angle(cat.chart.metric(p), eu.line.dir, vu) < 1e-10);
  }
  SECTION("estimated line is invariant under the flow differential") {
    const FlowModel t3 = t3_pA(-1, 1, 0.3, 0.6);
    const Vec3 p(0.23, 0.57, 0.81);
    const LineEstimate eu = estimate_line(t3, p, LineKind::unstable, 40.0);
    REQUIRE(eu.converged);
    const double h = 0.5;
    const FlowJacobian J = linearize_flow(t3, p, h, 1e-3);
    const Vec3 q = integrate_flow(t3, p, h, 1e-3).points.back();
    const Vec3 pushed = project_normal(t3, q, J.M * eu.line.dir);
    const LineEstimate fresh = estimate_line(t3, q, LineKind::unstable, 40.0);
    REQUIRE(fresh.converged);
    CHECK(line_angle(t3.chart.metric(q), pushed, fresh.line.dir) < 1e-7);
  }
}

TEST_CASE("growth rates", "[dynamics][rates]") {
  const FlowModel cat = cat_suspension();
  const double L = cat_log_lambda();
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double s = std::sqrt(1.0 + phi * phi);
  const Vec3 p(0.3, 0.4, 0.25);

  SECTION("finite-difference rates on the exact eigenlines") {
    const NormalLine lu{p, Vec3(phi / s, 1.0 / s, 0.0)};
    const NormalLine ls{p, Vec3(1.0 / s, -phi / s, 0.0)};
    CHECK(growth_rate_fd(cat, lu, 1e-3) == Approx(L).margin(1e-6));
    CHECK(growth_rate_fd(cat, ls, 1e-3) == Approx(-L).margin(1e-6));
  }
  SECTION("direction along the flow is rejected") {
    const NormalLine bad{p, Vec3(0, 0, 1)};
    CHECK_THROWS_AS(growth_rate_fd(cat, bad, 1e-3), DynamicsError);
  }
  SECTION("bracket rates match the model constants") {
    const ScalarField ru = growth_rate_bracket(cat, *cat.e_u, *cat.alpha_u);
    const ScalarField rs = growth_rate_bracket(cat, *cat.e_s, *cat.alpha_s);
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const Vec3 q(uni(rng), uni(rng), uni(rng));
      CHECK(ru.value(q) == Approx(L).margin(1e-10));
      CHECK(rs.value(q) == Approx(-L).margin(1e-10));
    }
  }
  SECTION("bracket and finite differences agree") {
    const ScalarField ru = growth_rate_bracket(cat, *cat.e_u, *cat.alpha_u);
    std::mt19937_64 rng(73);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      const Vec3 q(uni(rng), uni(rng), uni(rng));
      const NormalLine line{q, cat.e_u->value(q)};
      CHECK(growth_rate_fd(cat, line, 1e-3) ==
            Approx(ru.value(q)).margin(1e-5));
    }
  }
  SECTION("the flow direction itself has zero rate") {
    const ScalarField r0 = growth_rate_bracket(cat, cat.X, *cat.alpha_X);
    CHECK(r0.value(p) == Approx(0.0).margin(1e-12));
  }
  SECTION("violated frame normalization is rejected") {
    const ScalarField bad = growth_rate_bracket(cat, *cat.e_u, 2.0 * *cat.alpha_u);
    CHECK_THROWS_AS(bad.value(p), FieldError);
  }
}

TEST_CASE("domination report", "[dynamics][domination]") {
  const double L = cat_log_lambda();
  SECTION("cat model: constant rates, Anosov under the adapted norm") {
    const FlowModel cat = cat_suspension();
    const std::vector<Vec3> pts = {Vec3(0.1, 0.2, 0.3), Vec3(0.8, 0.5, 0.05),
                                   Vec3(0.45, 0.9, 0.7)};
    const DominationReport rep = domination_report(cat, pts, 20.0);
    CHECK(rep.n_converged == 3);
    CHECK(rep.min_gap == Approx(2.0 * L).margin(1e-4));
    CHECK(rep.min_r_u > 0.0);
    CHECK(rep.max_r_s < 0.0);
    CHECK(rep.norm_id == "adapted_frame");
  }
  SECTION("torus pair model: dominated but not Anosov at the invariant torus") {
    const FlowModel t3 = t3_pA(-1, 1, 0.3, 0.6);
    const std::vector<Vec3> pts = {Vec3(0.23, 0.57, 0.81), Vec3(0.5, 0.5, 0.0),
                                   Vec3(0.77, 0.12, 0.64)};
    const DominationReport rep = domination_report(t3, pts, 40.0);
    CHECK(rep.n_converged == 3);
    CHECK(rep.min_gap > 2.0);  // projective hyperbolicity with a wide margin
    // archived regression values, chart (Euclidean) norm
    CHECK(rep.points[0].r_u == Approx(2.360191).margin(1e-4));
    CHECK(rep.points[0].r_s == Approx(-0.043634).margin(1e-4));
    // z = 0 is an invariant torus: no normal expansion there
    CHECK(rep.points[1].r_u == Approx(0.0).margin(1e-8));
    CHECK(rep.norm_id == "euclidean");
  }
}

TEST_CASE("periodic orbit spectra and integrals", "[dynamics][orbit]") {
  const FlowModel cat = cat_suspension();
  const double L = cat_log_lambda();
  const OrbitData od = close_orbit(cat, cat.named_orbits.at(0), 1e-3);

  SECTION("return-map eigenvalues are the cat-map spectrum") {
    CHECK(od.lambda_u == Approx((3.0 + std::sqrt(5.0)) / 2.0).margin(1e-6));
    CHECK(od.lambda_s == Approx((3.0 - std::sqrt(5.0)) / 2.0).margin(1e-6));
    CHECK(od.lambda_u * od.lambda_s == Approx(1.0).margin(1e-8));
    CHECK(od.x_eigen_residual < 1e-8);
    CHECK(od.closure_gap < 1e-9);
  }
  SECTION("orbit integrals by Simpson quadrature") {
    CHECK(orbit_integral(od, constant_scalar(1.0)) == Approx(od.period));
    const ScalarField ru = growth_rate_bracket(cat, *cat.e_u, *cat.alpha_u);
    const ScalarField rs = growth_rate_bracket(cat, *cat.e_s, *cat.alpha_s);
    const double int_ru = orbit_integral(od, ru);
    CHECK(int_ru == Approx(L).margin(1e-8));
    CHECK(std::exp(int_ru) == Approx(od.lambda_u).margin(1e-6));
    CHECK(orbit_integral(od, ru + rs) == Approx(0.0).margin(1e-8));
  }
  SECTION("a seed that does not close is rejected") {
    CHECK_THROWS_AS(close_orbit(cat, NamedOrbit{"wrong", Vec3(0.3, 0.3, 0.0), 1.0}),
                    DynamicsError);
  }
}
