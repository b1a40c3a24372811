#include <cmath>

#include "doctest.h"
#include "wecfarm/mbe.hpp"
#include "wecfarm/util.hpp"

using namespace wecfarm;
using namespace wecfarm::mbe;

TEST_CASE("normalization round trip and arithmetic") {
  const WecGeometry geom{2.0, 1.0};
  const double rho = 1025.0, g = 9.81;
  // A = 0.5 rho pi R^3 for a_tilde = 0.5
  CHECK(denormalize_added_mass(0.5, geom, rho) == doctest::Approx(0.5 * rho * M_PI * 8.0));
  for (double v : {-3.0, 0.0, 1.7, 250.0}) {
    CHECK(denormalize_added_mass(normalize_added_mass(v, geom, rho), geom, rho) ==
          doctest::Approx(v).epsilon(1e-12));
    CHECK(denormalize_damping(normalize_damping(v, geom, 0.9, rho), geom, 0.9, rho) ==
          doctest::Approx(v).epsilon(1e-12));
  }
  const std::complex<double> fe{123.0, -7.0};
  const auto rt = denormalize_excitation(normalize_excitation(fe, geom, rho, g), geom, rho, g);
  CHECK(std::abs(rt - fe) <= 1e-12 * std::abs(fe));
  CHECK(std::abs(normalize_excitation({0.0, 0.0}, geom, rho, g)) == 0.0);
  CHECK_THROWS(normalize_damping(1.0, geom, 0.0, rho));
}

TEST_CASE("pair features") {
  auto f = pair_features(0.0, 0.0, 10.0, 0.0);
  CHECK(f.l == doctest::Approx(10.0));
  CHECK(f.theta == doctest::Approx(0.0));
  f = pair_features(0.0, 0.0, 0.0, 10.0);
  CHECK(f.l == doctest::Approx(10.0));
  CHECK(f.theta == doctest::Approx(M_PI / 2));
  // mirror symmetry across the x axis
  const auto below = pair_features(0.0, 0.0, 6.0, -8.0);
  const auto above = pair_features(0.0, 0.0, 6.0, 8.0);
  CHECK(below.l == doctest::Approx(above.l));
  CHECK(below.theta == doctest::Approx(above.theta));
  CHECK_THROWS(pair_features(1.0, 2.0, 1.0, 2.0));
}

TEST_CASE("additive terms degenerate and backend cases") {
  const auto grid = hydro::FrequencyGrid::standard(10);
  const WecGeometry geom{2.0, 1.0};
  const auto iso = hydro::single_body(geom, grid, hydro::Backend::toy);

  // pair outputs equal to isolated outputs -> all deltas vanish
  hydro::PairOutputs same;
  same.a11 = iso.a_tilde;
  same.b11 = iso.b_tilde;
  same.a12.assign(grid.size(), 0.0);
  same.b12.assign(grid.size(), 0.0);
  same.fe1_re = iso.fe_re;
  same.fe1_im = iso.fe_im;
  const auto d0 = additive_terms(iso, same);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(d0.da11[i] == doctest::Approx(0.0));
    CHECK(d0.db11[i] == doctest::Approx(0.0));
    CHECK(std::abs(d0.dfe1[i]) == doctest::Approx(0.0));
  }

  // built-in backends carry no diagonal interaction correction
  const auto pair = hydro::pair_body(geom, 25.0, 0.8, grid, hydro::Backend::toy);
  const auto d = additive_terms(iso, pair);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(d.da11[i] == doctest::Approx(0.0));
    CHECK(d.db11[i] == doctest::Approx(0.0));
    CHECK(d.da12[i] == doctest::Approx(pair.a12[i]));
    CHECK(d.db12[i] == doctest::Approx(pair.b12[i]));
  }

  hydro::PairOutputs short_pair = pair;
  short_pair.a11.pop_back();
  CHECK_THROWS(additive_terms(iso, short_pair));
}

TEST_CASE("swapped body order reproduces the reverse effect") {
  const auto grid = hydro::FrequencyGrid::standard(10);
  const WecGeometry geom{2.0, 1.0};
  const double px = 0, py = 0, qx = 20, qy = 15;
  const auto fw = pair_features(px, py, qx, qy);
  const auto bw = pair_features(qx, qy, px, py);
  const auto on_p = hydro::pair_body(geom, fw.l, fw.theta, grid, hydro::Backend::toy);
  const auto on_q = hydro::pair_body(geom, bw.l, bw.theta, grid, hydro::Backend::toy);
  // radiation blocks agree (distance only); excitation differs by the
  // upstream/downstream phase
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(on_p.a12[i] == doctest::Approx(on_q.a12[i]));
    CHECK(on_p.b12[i] == doctest::Approx(on_q.b12[i]));
  }
}

namespace {

double table_rel_diff(const HydroTable& a, const HydroTable& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.n_freq(); ++i) {
    const double sa = std::max({a.added_mass[i].cwiseAbs().maxCoeff(), 1e-300});
    const double sb = std::max({a.damping[i].cwiseAbs().maxCoeff(), 1e-300});
    worst = std::max(worst,
                     (a.added_mass[i] - b.added_mass[i]).cwiseAbs().maxCoeff() / sa);
    worst = std::max(worst, (a.damping[i] - b.damping[i]).cwiseAbs().maxCoeff() / sb);
    const double se = std::max(a.excitation[i].cwiseAbs().maxCoeff(), 1e-300);
    worst = std::max(worst, (a.excitation[i] - b.excitation[i]).cwiseAbs().maxCoeff() / se);
  }
  return worst;
}

}  // namespace

TEST_CASE("compose_farm single body equals denormalized one-body outputs") {
  const auto grid = hydro::FrequencyGrid::standard(12);
  const WecGeometry geom{2.5, 2.0};
  auto source = make_oracle_source(grid, hydro::Backend::toy);
  const auto table = compose_farm(geom, FarmLayout::single(), *source);
  const auto iso = hydro::single_body(geom, grid, hydro::Backend::toy);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(table.added_mass[i](0, 0) ==
          doctest::Approx(denormalize_added_mass(iso.a_tilde[i], geom, grid.rho)));
    CHECK(table.damping[i](0, 0) ==
          doctest::Approx(denormalize_damping(iso.b_tilde[i], geom, grid.values[i], grid.rho)));
  }
}

TEST_CASE("compose_farm equals farm_direct exactly for two bodies") {
  const auto grid = hydro::FrequencyGrid::standard(20);
  const WecGeometry geom{2.0, 1.0};
  FarmLayout layout;
  layout.x = {0.0, 18.0};
  layout.y = {0.0, -12.0};
  for (auto backend : {hydro::Backend::toy, hydro::Backend::reference}) {
    auto source = make_oracle_source(grid, backend);
    const auto composed = compose_farm(geom, layout, *source);
    const auto direct = hydro::farm_direct(geom, layout, grid, backend);
    CHECK(table_rel_diff(composed, direct) <= 1e-12);
  }
}

TEST_CASE("compose_farm equals farm_direct for a random 5-WEC farm") {
  const auto grid = hydro::FrequencyGrid::standard(15);
  const WecGeometry geom{2.0, 1.0};
  Rng rng(404);
  FarmLayout layout;
  layout.x = {0.0};
  layout.y = {0.0};
  while (layout.size() < 5) {
    const double x = rng.uniform(0.0, 150.0), y = rng.uniform(-150.0, 150.0);
    bool ok = true;
    for (std::size_t p = 0; p < layout.size(); ++p)
      if (std::hypot(x - layout.x[p], y - layout.y[p]) < 14.0) ok = false;
    if (ok) {
      layout.x.push_back(x);
      layout.y.push_back(y);
    }
  }
  auto source = make_oracle_source(grid, hydro::Backend::toy);
  const auto composed = compose_farm(geom, layout, *source);
  const auto direct = hydro::farm_direct(geom, layout, grid, hydro::Backend::toy);
  CHECK(table_rel_diff(composed, direct) <= 1e-12);
}

TEST_CASE("compose_farm reflection invariance") {
  const auto grid = hydro::FrequencyGrid::standard(9);
  const WecGeometry geom{2.0, 1.0};
  FarmLayout layout;
  layout.x = {0.0, 25.0, 40.0};
  layout.y = {0.0, 16.0, -30.0};
  FarmLayout mirrored = layout;
  for (auto& y : mirrored.y) y = -y;
  auto source = make_oracle_source(grid, hydro::Backend::toy);
  const auto a = compose_farm(geom, layout, *source);
  const auto b = compose_farm(geom, mirrored, *source);
  CHECK(table_rel_diff(a, b) <= 1e-14);
}
