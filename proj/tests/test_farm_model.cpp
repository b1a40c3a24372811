#include <cmath>
#include <complex>

#include "doctest.h"
#include "wecfarm/farm_model.hpp"
#include "wecfarm/mbe.hpp"
#include "wecfarm/util.hpp"

using namespace wecfarm;
using namespace wecfarm::farm;
using cd = std::complex<double>;

namespace {

constexpr double kRho = 1025.0, kG = 9.81;

HydroTable zero_table(const std::vector<double>& omegas, std::size_t n) {
  HydroTable t;
  t.omegas = omegas;
  t.added_mass.assign(omegas.size(), Eigen::MatrixXd::Zero(n, n));
  t.damping.assign(omegas.size(), Eigen::MatrixXd::Zero(n, n));
  t.excitation.assign(omegas.size(), Eigen::VectorXcd::Ones(n));
  return t;
}

climate::ClimateModel tiny_climate(std::size_t n_gq = 8) {
  climate::SyntheticSite site;
  const auto samples = climate::synth_climate(site, 1, 60, 12);
  return climate::fit_climate(samples, n_gq);
}

// independent closed-form inverse of a 2x2 complex matrix
Eigen::Matrix2cd inverse2_oracle(const Eigen::Matrix2cd& m) {
  const cd det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Eigen::Matrix2cd inv;
  inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return inv / det;
}

}  // namespace

TEST_CASE("assemble_system resonance fixture") {
  // N=1, A=B=0, omega^2 M = G + k_pto -> |H| = 1/(omega b)
  const WecGeometry geom{2.0, 1.0};
  const double mass = kRho * M_PI * geom.radius * geom.radius * geom.draft();
  const double hydrostatic = kRho * kG * M_PI * geom.radius * geom.radius;
  const double omega = 1.1;
  const double k_pto = omega * omega * mass - hydrostatic;
  const double b_pto = 4.2e4;
  const auto control = ControlParams::farm_level(k_pto, b_pto, 1);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
  const Eigen::MatrixXcd s = system_matrix(zero, zero, geom, control, omega, kRho, kG);
  CHECK(std::abs(s(0, 0)) == doctest::Approx(omega * b_pto).epsilon(1e-12));
  const auto xi = solve_response(s, Eigen::VectorXcd::Ones(1));
  REQUIRE(xi.has_value());
  CHECK(std::abs((*xi)(0)) == doctest::Approx(1.0 / (omega * b_pto)).epsilon(1e-12));
}

TEST_CASE("assemble_system 2x2 against closed-form inverse") {
  const WecGeometry geom{2.0, 1.0};
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 3.0e4, 0.7e4, 0.7e4, 3.1e4;
  b << 2.0e4, -0.4e4, -0.4e4, 2.2e4;
  const auto control = ControlParams::farm_level(-2e3, 1.5e5, 2);
  const double omega = 0.9;
  const Eigen::MatrixXcd s = system_matrix(a, b, geom, control, omega, kRho, kG);
  Eigen::VectorXcd fe(2);
  fe << cd(1.0e5, 3.0e4), cd(-2.0e4, 8.0e4);
  const auto xi = solve_response(s, fe);
  REQUIRE(xi.has_value());
  const Eigen::Vector2cd oracle = inverse2_oracle(s) * fe;
  CHECK((*xi - oracle).norm() <= 1e-12 * oracle.norm());
  // H = S^{-1} symmetric when S is
  const Eigen::Matrix2cd h = inverse2_oracle(s);
  CHECK(std::abs(h(0, 1) - h(1, 0)) <= 1e-14 * std::abs(h(0, 1)));
}

TEST_CASE("singular frequency is flagged and skipped") {
  const WecGeometry geom{2.0, 1.0};
  const double mass = kRho * M_PI * geom.radius * geom.radius * geom.draft();
  const double hydrostatic = kRho * kG * M_PI * geom.radius * geom.radius;
  const double omega = 1.0;
  // undamped resonance: zero matrix at the grid frequency
  const double k_pto = omega * omega * mass - hydrostatic;
  const auto control = ControlParams::farm_level(k_pto, 0.0, 1);
  auto table = zero_table({omega}, 1);
  const PowerCurve curve = power_curve(geom, control, table, kRho, kG);
  CHECK(curve.skipped_frequencies == 1);
  CHECK(curve.p_m[0] == 0.0);
}

TEST_CASE("power curve zero damping gives zero power") {
  const WecGeometry geom{2.0, 1.0};
  auto table = zero_table(linspace(0.3, 2.0, 9), 1);
  const auto control = ControlParams::farm_level(1e4, 0.0, 1);
  const PowerCurve curve = power_curve(geom, control, table, kRho, kG);
  for (double p : curve.p_m) CHECK(p == 0.0);
}

TEST_CASE("sea state power: hand quadrature and saturation clamp") {
  const auto model = tiny_climate();
  hydro::FrequencyGrid grid = hydro::FrequencyGrid::standard(12);
  const SpectrumTable spec = build_spectrum_table(model, grid);
  PowerCurve curve;
  curve.p_m.assign(grid.size(), 0.0);
  curve.p_m[5] = 3.3e4;  // single-frequency fixture
  PowerConfig config;
  const double expected = spec.weight(10, 5) * 3.3e4;
  CHECK(sea_state_power(curve, spec, 10, config) == doctest::Approx(expected).epsilon(1e-12));
  // the stated weighting convention: 2 S_JS(hs, tp, omega) d_omega
  const double dw = (grid.values.back() - grid.values.front()) / 11.0;
  CHECK(spec.weight(10, 5) ==
        doctest::Approx(2.0 * climate::jonswap(spec.hs[10], spec.tp[10], grid.values[5]) * dw));
  // saturation: 120 kW clamped at 100 kW, and clamping never increases power
  PowerConfig limited;
  limited.p_lim = 100e3;
  curve.p_m[5] = 120e3 / spec.weight(10, 5);
  CHECK(sea_state_power(curve, spec, 10, limited) == doctest::Approx(100e3));
  for (std::size_t node = 0; node < spec.n_nodes; ++node)
    CHECK(sea_state_power(curve, spec, node, limited) <=
          sea_state_power(curve, spec, node, config));
}

TEST_CASE("lifetime power efficiency factors and mass invariance") {
  const auto model = tiny_climate();
  const auto grid = hydro::FrequencyGrid::standard(20);
  const WecGeometry geom{2.0, 1.0};
  auto source = mbe::make_oracle_source(grid, hydro::Backend::toy);
  const auto control = ControlParams::farm_level(-5e3, 5e5, 1);
  PowerConfig defaults;
  PowerConfig unity;
  unity.eta_pcc = unity.eta_oa = unity.eta_t = 1.0;
  const auto with = lifetime_power(geom, control, FarmLayout::single(), model, defaults, *source);
  const auto without = lifetime_power(geom, control, FarmLayout::single(), model, unity, *source);
  CHECK(with.p_a / without.p_a == doctest::Approx(0.8 * 0.95 * 0.98).epsilon(1e-12));
  CHECK(0.8 * 0.95 * 0.98 == doctest::Approx(0.7448));
  CHECK(with.p_a >= 0.0);
  for (double p : with.node_power) CHECK(p >= 0.0);

  // doubling every mass then renormalizing leaves p_a unchanged
  auto scaled = model;
  for (auto& year : scaled.prob) {
    for (double& m : year) m *= 2.0;
    double sum = 0.0;
    for (double m : year) sum += m;
    for (double& m : year) m /= sum;
  }
  const auto rescaled =
      lifetime_power(geom, control, FarmLayout::single(), scaled, defaults, *source);
  CHECK(rescaled.p_a == doctest::Approx(with.p_a).epsilon(1e-12));
}

TEST_CASE("single-year single-node climate reduces to one sea state") {
  climate::ClimateModel model;
  model.years = {1};
  model.hs_nodes = {2.0};
  model.tp_nodes = {8.0};
  model.hs_weights = {1.0};
  model.tp_weights = {1.0};
  model.pdf = {{1.0}};
  model.prob = {{1.0}};
  const auto grid = hydro::FrequencyGrid::standard(30);
  const WecGeometry geom{2.0, 1.0};
  auto source = mbe::make_oracle_source(grid, hydro::Backend::toy);
  const auto control = ControlParams::farm_level(-5e3, 5e5, 1);
  PowerConfig config;
  const auto ev = lifetime_power(geom, control, FarmLayout::single(), model, config, *source);
  const SpectrumTable spec = build_spectrum_table(model, grid);
  const HydroTable table = mbe::compose_farm(geom, FarmLayout::single(), *source);
  const PowerCurve curve = power_curve(geom, control, table, kRho, kG);
  CHECK(ev.p_a == doctest::Approx(0.7448 * sea_state_power(curve, spec, 0, config)).epsilon(1e-9));
}

TEST_CASE("objective pv arithmetic") {
  // R=2, D=1 -> RD=2; p_a = 4 pi -> p_v = 1
  const WecGeometry geom{2.0, 2.0};
  CHECK(objective_pv(4.0 * M_PI, geom) == doctest::Approx(1.0));
  CHECK(objective_pv(0.0, geom) == 0.0);
  CHECK(objective_pv(7.0 * 4.0 * M_PI, geom) == doctest::Approx(7.0));
}

TEST_CASE("q factor definition and decay to unity") {
  CHECK(q_factor(5.0, 5.0, 1) == doctest::Approx(1.0));
  CHECK_THROWS(q_factor(5.0, 0.0, 3));

  const auto model = tiny_climate();
  const auto grid = hydro::FrequencyGrid::standard(40);
  const WecGeometry geom{2.0, 1.0};
  auto source = mbe::make_oracle_source(grid, hydro::Backend::reference);
  const auto control1 = ControlParams::farm_level(-5e3, 5e5, 1);
  const auto control3 = ControlParams::farm_level(-5e3, 5e5, 3);
  PowerConfig config;
  const auto iso = lifetime_power(geom, control1, FarmLayout::single(), model, config, *source);

  FarmLayout wide;
  wide.x = {0.0, 6000.0, 12000.0};
  wide.y = {0.0, 0.0, 0.0};
  const auto farm = lifetime_power(geom, control3, wide, model, config, *source);
  CHECK(q_factor(farm.p_a, iso.p_a, 3) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("farm evaluation is deterministic") {
  const auto model = tiny_climate();
  const auto grid = hydro::FrequencyGrid::standard(25);
  const WecGeometry geom{2.0, 1.0};
  auto source = mbe::make_oracle_source(grid, hydro::Backend::toy);
  FarmLayout layout;
  layout.x = {0.0, 30.0};
  layout.y = {0.0, -15.0};
  const auto control = ControlParams::farm_level(-5e3, 4e5, 2);
  PowerConfig config;
  const auto a = lifetime_power(geom, control, layout, model, config, *source);
  const auto b = lifetime_power(geom, control, layout, model, config, *source);
  CHECK(a.p_v == b.p_v);  // bitwise
  CHECK(a.p_a == b.p_a);
}

TEST_CASE("p_v invariant under rigid translation") {
  const auto model = tiny_climate();
  const auto grid = hydro::FrequencyGrid::standard(25);
  const WecGeometry geom{2.0, 1.0};
  auto source = mbe::make_oracle_source(grid, hydro::Backend::toy);
  FarmLayout layout;
  layout.x = {0.0, 25.0, 10.0};
  layout.y = {0.0, 5.0, -30.0};
  FarmLayout moved = layout;
  for (auto& x : moved.x) x += 65.0;
  for (auto& y : moved.y) y += -12.0;
  const auto control = ControlParams::farm_level(-5e3, 4e5, 3);
  PowerConfig config;
  const auto a = lifetime_power(geom, control, layout, model, config, *source);
  const auto b = lifetime_power(geom, control, moved, model, config, *source);
  CHECK(b.p_v == doctest::Approx(a.p_v).epsilon(1e-10));
}

TEST_CASE("device-level control with equal values matches farm-level bitwise") {
  const auto model = tiny_climate();
  const auto grid = hydro::FrequencyGrid::standard(25);
  const WecGeometry geom{2.0, 1.0};
  auto source = mbe::make_oracle_source(grid, hydro::Backend::toy);
  FarmLayout layout;
  layout.x = {0.0, 30.0, 12.0};
  layout.y = {0.0, 0.0, 40.0};
  const auto farm_ctl = ControlParams::farm_level(-3e3, 2e5, 3);
  const auto dev_ctl = ControlParams::device_level({-3e3, -3e3, -3e3}, {2e5, 2e5, 2e5});
  PowerConfig config;
  const auto a = lifetime_power(geom, farm_ctl, layout, model, config, *source);
  const auto b = lifetime_power(geom, dev_ctl, layout, model, config, *source);
  CHECK(a.p_v == b.p_v);  // bitwise
  CHECK(a.p_a == b.p_a);
}

TEST_CASE("natural frequency fixed point") {
  const WecGeometry geom{2.0, 1.0};
  const double mass = kRho * M_PI * geom.radius * geom.radius * geom.draft();
  const double hydrostatic = kRho * kG * M_PI * geom.radius * geom.radius;

  // A == 0 -> closed form in one step
  auto table = zero_table(linspace(0.3, 2.0, 10), 1);
  const double k_pto = 2e4;
  const auto wn = natural_frequency(geom, k_pto, table, 0, kRho, kG);
  REQUIRE(wn.has_value());
  CHECK(*wn == doctest::Approx(std::sqrt((k_pto + hydrostatic) / mass)).epsilon(1e-10));

  // fixed point satisfies the defining equation with interpolated added mass
  const auto grid = hydro::FrequencyGrid::standard(40);
  const auto real_table =
      hydro::farm_direct(geom, FarmLayout::single(), grid, hydro::Backend::reference);
  const auto wn2 = natural_frequency(geom, -1e4, real_table, 0, kRho, kG);
  REQUIRE(wn2.has_value());
  // confirm the fixed point closes with the interpolated added mass
  double a_at = 0.0;
  {
    std::size_t i = 1;
    while (i < grid.size() - 1 && grid.values[i] < *wn2) ++i;
    const double t = (*wn2 - grid.values[i - 1]) / (grid.values[i] - grid.values[i - 1]);
    a_at = (1 - t) * real_table.added_mass[i - 1](0, 0) + t * real_table.added_mass[i](0, 0);
  }
  CHECK(*wn2 == doctest::Approx(std::sqrt((-1e4 + hydrostatic) / (mass + a_at))).epsilon(1e-6));

  // no real solution when k_pto + G <= 0
  CHECK_FALSE(natural_frequency(geom, -2.0 * hydrostatic, table, 0, kRho, kG).has_value());

  // monotone in k_pto for frozen added mass
  const auto lo = natural_frequency(geom, 1e4, real_table, 0, kRho, kG);
  const auto hi = natural_frequency(geom, 9e4, real_table, 0, kRho, kG);
  REQUIRE(lo.has_value());
  REQUIRE(hi.has_value());
  CHECK(*hi > *lo);
}
