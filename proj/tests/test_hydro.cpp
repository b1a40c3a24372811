#include <cmath>
#include <complex>

#include "doctest.h"
#include "wecfarm/climate.hpp"
#include "wecfarm/hydro.hpp"

using namespace wecfarm;
using namespace wecfarm::hydro;

namespace {

// bracketing search for the first positive zero of J0
double first_j0_zero() {
  double lo = 2.0, hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::cyl_bessel_j(0, mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("geometry bounds and draft identity") {
  WecGeometry g{2.0, 4.0};
  CHECK(g.draft() == doctest::Approx(0.5));
  CHECK(g.draft() * g.slenderness == doctest::Approx(g.radius));
  CHECK(geometry_in_bounds(g));
  CHECK_FALSE(geometry_in_bounds(WecGeometry{0.1, 1.0}));
  CHECK_THROWS(check_geometry(WecGeometry{12.0, 1.0}));
}

TEST_CASE("standard frequency grid") {
  const auto grid = FrequencyGrid::standard();
  REQUIRE(grid.size() == 100);
  CHECK(grid.values.front() == doctest::Approx(0.3));
  CHECK(grid.values.back() == doctest::Approx(2.0));
  CHECK(grid.h == doctest::Approx(50.0));
  CHECK(grid.rho == doctest::Approx(1025.0));
}

TEST_CASE("toy backend closed forms") {
  const auto grid = FrequencyGrid::standard(10);
  const WecGeometry geom{1.5, 2.5};
  const auto out = single_body(geom, grid, Backend::toy);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid.values[i] * std::sqrt(geom.radius / grid.g);
    CHECK(out.a_tilde[i] ==
          doctest::Approx((0.4 + 0.3 / (1 + s * s)) * (1 + 0.2 / geom.slenderness)));
    CHECK(out.b_tilde[i] >= 0.0);
    CHECK(out.fe_re[i] == doctest::Approx(std::exp(-s * s) / geom.draft()));
  }
}

TEST_CASE("reference backend damping positivity across geometries") {
  const auto grid = FrequencyGrid::standard(25);
  for (const auto& geom : {WecGeometry{0.5, 1.0}, WecGeometry{2.0, 1.0}, WecGeometry{2.0, 4.0},
                           WecGeometry{6.0, 0.5}, WecGeometry{10.0, 10.0}}) {
    const auto out = single_body(geom, grid, Backend::reference);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(std::isfinite(out.a_tilde[i]));
      CHECK(out.b_tilde[i] >= -1e-12);
    }
  }
}

TEST_CASE("reference backend long-wave excitation limit") {
  // |Fe| -> rho g pi R^2 as omega -> 0 (hydrostatic limit)
  FrequencyGrid grid;
  grid.values = {0.05};
  const WecGeometry geom{1.0, 2.0};
  const auto out = single_body(geom, grid, Backend::reference);
  const double fe_scale = grid.rho * grid.g * M_PI * geom.radius * geom.radius * geom.draft();
  const double fe_mag = std::hypot(out.fe_re[0], out.fe_im[0]) * fe_scale;
  CHECK(fe_mag == doctest::Approx(grid.rho * grid.g * M_PI * geom.radius * geom.radius)
                      .epsilon(0.10));
}

TEST_CASE("reference backend truncation convergence and energy identity") {
  FrequencyGrid grid;
  const WecGeometry geom{3.0, 1.5};
  for (double w : {0.8, 2.0}) {
    const auto coarse =
        solve_cylinder(geom.radius, geom.draft(), w, grid.h, grid.g, grid.rho, 40);
    const auto fine =
        solve_cylinder(geom.radius, geom.draft(), w, grid.h, grid.g, grid.rho, 160);
    CHECK(coarse.added_mass == doctest::Approx(fine.added_mass).epsilon(2e-2));
    CHECK(coarse.damping == doctest::Approx(fine.damping).epsilon(2e-2));
    CHECK(std::abs(coarse.excitation - fine.excitation) <= 2e-2 * std::abs(fine.excitation));
    // far-field radiated flux equals the base-pressure damping
    CHECK(coarse.damping == doctest::Approx(coarse.damping_pressure).epsilon(1e-8));
    CHECK(coarse.damping >= 0.0);
  }
}

TEST_CASE("pair radiation is independent of angle") {
  const auto grid = FrequencyGrid::standard(12);
  const WecGeometry geom{2.0, 1.0};
  for (Backend b : {Backend::toy, Backend::reference}) {
    const auto p1 = pair_body(geom, 30.0, 0.3, grid, b);
    const auto p2 = pair_body(geom, 30.0, M_PI - 0.3, grid, b);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(p1.a12[i] == p2.a12[i]);
      CHECK(p1.b12[i] == p2.b12[i]);
      CHECK(p1.a11[i] == p2.a11[i]);
    }
    // excitation differs with angle (shadowing phase)
    bool any_diff = false;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (p1.fe1_re[i] != p2.fe1_re[i]) any_diff = true;
    CHECK(any_diff);
  }
}

TEST_CASE("pair cross damping vanishes at the first J0 zero") {
  const double j0z = first_j0_zero();
  CHECK(j0z == doctest::Approx(2.4048255577).epsilon(1e-9));
  FrequencyGrid grid;
  grid.values = {1.1};
  const double k = climate::dispersion(1.1, grid.h, grid.g);
  const double l = j0z / k;
  const WecGeometry geom{0.5, 1.0};
  const auto p = pair_body(geom, l, 0.7, grid, Backend::toy);
  CHECK(p.b12[0] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("pair interaction decays with distance") {
  const auto grid = FrequencyGrid::standard(20);
  const WecGeometry geom{2.0, 1.0};
  for (Backend b : {Backend::toy, Backend::reference}) {
    const auto near = pair_body(geom, 4.0 * geom.radius, 0.4, grid, b);
    const auto far = pair_body(geom, 1000.0, 0.4, grid, b);
    const auto iso = single_body(geom, grid, b);
    const auto ev = eval_single(geom, grid, b);
    double near_a = 0, far_a = 0, near_b = 0, far_b = 0, near_f = 0, far_f = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double k = climate::dispersion(grid.values[i], grid.h, grid.g);
      const double envelope = std::sqrt(2.0 / (M_PI * k * 1000.0));
      // hard 1/sqrt(kl) envelope at the far distance, per frequency
      CHECK(std::abs(far.b12[i]) <= far.b11[i] * envelope + 1e-12);
      CHECK(std::abs(far.a12[i]) <= far.b11[i] * envelope + 1e-12);
      CHECK(std::hypot(far.fe1_re[i] - iso.fe_re[i], far.fe1_im[i] - iso.fe_im[i]) <=
            ev.sigma[i] * envelope + 1e-12);
      near_a += near.a12[i] * near.a12[i];
      far_a += far.a12[i] * far.a12[i];
      near_b += near.b12[i] * near.b12[i];
      far_b += far.b12[i] * far.b12[i];
      near_f += std::pow(near.fe1_re[i] - iso.fe_re[i], 2) +
                std::pow(near.fe1_im[i] - iso.fe_im[i], 2);
      far_f += std::pow(far.fe1_re[i] - iso.fe_re[i], 2) +
               std::pow(far.fe1_im[i] - iso.fe_im[i], 2);
    }
    // rms decay across the grid, sqrt(4R/1000) ~ 0.09 with margin
    CHECK(std::sqrt(far_a) <= 0.15 * std::sqrt(near_a));
    CHECK(std::sqrt(far_b) <= 0.15 * std::sqrt(near_b));
    CHECK(std::sqrt(far_f) <= 0.15 * std::sqrt(near_f));
  }
}

TEST_CASE("pair damping eigenvalues stay nonnegative") {
  const auto grid = FrequencyGrid::standard(30);
  const WecGeometry geom{2.0, 1.0};
  for (double l : {14.0, 40.0, 120.0}) {
    const auto p = pair_body(geom, l, 1.0, grid, Backend::reference);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      // eigenvalues of [[b11, b12], [b12, b11]] are b11 +- b12
      CHECK(p.b11[i] + p.b12[i] >= -1e-12);
      CHECK(p.b11[i] - p.b12[i] >= -1e-12);
    }
  }
}

TEST_CASE("farm_direct single body equals isolated scalars") {
  const auto grid = FrequencyGrid::standard(8);
  const WecGeometry geom{2.0, 1.0};
  const auto iso = single_body(geom, grid, Backend::toy);
  const auto table = farm_direct(geom, FarmLayout::single(), grid, Backend::toy);
  const double r3 = grid.rho * M_PI * std::pow(geom.radius, 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(table.added_mass[i](0, 0) == doctest::Approx(iso.a_tilde[i] * r3));
    CHECK(table.damping[i](0, 0) ==
          doctest::Approx(iso.b_tilde[i] * grid.values[i] * r3));
  }
}

TEST_CASE("farm_direct two bodies matches pair outputs") {
  const auto grid = FrequencyGrid::standard(8);
  const WecGeometry geom{2.0, 1.0};
  FarmLayout layout;
  layout.x = {0.0, 25.0};
  layout.y = {0.0, 10.0};
  const double l = std::hypot(25.0, 10.0);
  const double theta = std::atan2(10.0, 25.0);
  const auto pair = pair_body(geom, l, theta, grid, Backend::toy);
  const auto table = farm_direct(geom, layout, grid, Backend::toy);
  const double r3 = grid.rho * M_PI * std::pow(geom.radius, 3);
  const double fe_scale = grid.rho * grid.g * M_PI * geom.radius * geom.radius * geom.draft();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(table.added_mass[i](0, 1) == doctest::Approx(pair.a12[i] * r3).epsilon(1e-12));
    CHECK(table.damping[i](0, 1) ==
          doctest::Approx(pair.b12[i] * grid.values[i] * r3).epsilon(1e-12));
    // body 1 sits at the origin: no global phase on its excitation
    CHECK(table.excitation[i](0).real() ==
          doctest::Approx(pair.fe1_re[i] * fe_scale).epsilon(1e-12));
    CHECK(table.excitation[i](0).imag() ==
          doctest::Approx(pair.fe1_im[i] * fe_scale).epsilon(1e-12));
  }
}

TEST_CASE("farm_direct equilateral triangle symmetry") {
  const auto grid = FrequencyGrid::standard(6);
  const WecGeometry geom{1.5, 1.0};
  const double side = 30.0;
  FarmLayout layout;
  layout.x = {0.0, side, side / 2.0};
  layout.y = {0.0, 0.0, side * std::sqrt(3.0) / 2.0};
  const auto table = farm_direct(geom, layout, grid, Backend::reference);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& A = table.added_mass[i];
    const auto& B = table.damping[i];
    CHECK((A - A.transpose()).norm() == doctest::Approx(0.0));
    CHECK((B - B.transpose()).norm() == doctest::Approx(0.0));
    // equal diagonals and equal off-diagonals at equal distances
    CHECK(A(0, 0) == doctest::Approx(A(1, 1)));
    CHECK(A(1, 1) == doctest::Approx(A(2, 2)));
    CHECK(A(0, 1) == doctest::Approx(A(0, 2)).epsilon(1e-12));
    CHECK(B(0, 1) == doctest::Approx(B(1, 2)).epsilon(1e-12));
  }
  CHECK_THROWS(farm_direct(geom, FarmLayout{{0.0, 0.0}, {0.0, 0.0}}, grid, Backend::toy));
}

TEST_CASE("farm translation shifts only excitation phase") {
  const auto grid = FrequencyGrid::standard(7);
  const WecGeometry geom{2.0, 1.0};
  FarmLayout layout;
  layout.x = {0.0, 30.0, 12.0};
  layout.y = {0.0, 5.0, -22.0};
  const double shift = 40.0;
  FarmLayout moved = layout;
  for (auto& x : moved.x) x += shift;
  const auto base = farm_direct(geom, layout, grid, Backend::toy);
  const auto trans = farm_direct(geom, moved, grid, Backend::toy);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK((base.added_mass[i] - trans.added_mass[i]).norm() == doctest::Approx(0.0));
    CHECK((base.damping[i] - trans.damping[i]).norm() == doctest::Approx(0.0));
    const double k = climate::dispersion(grid.values[i], grid.h, grid.g);
    const std::complex<double> phase = std::exp(std::complex<double>(0.0, -k * shift));
    for (Eigen::Index p = 0; p < 3; ++p) {
      const auto expected = base.excitation[i](p) * phase;
      CHECK(std::abs(trans.excitation[i](p) - expected) <=
            1e-10 * std::abs(expected));
    }
  }
}
