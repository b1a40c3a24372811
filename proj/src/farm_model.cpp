#include "wecfarm/farm_model.hpp"

#include <cmath>
#include <fstream>

#include "wecfarm/util.hpp"

namespace wecfarm::farm {

using cd = std::complex<double>;

ControlParams ControlParams::farm_level(double k, double b, std::size_t n) {
  require(b >= 0, "ControlParams: b_pto must be nonnegative");
  ControlParams c;
  c.mode = ControlMode::farm_level;
  c.k_pto.assign(n, k);
  c.b_pto.assign(n, b);
  return c;
}

ControlParams ControlParams::device_level(std::vector<double> k, std::vector<double> b) {
  require(k.size() == b.size() && !k.empty(), "ControlParams: k/b size mismatch");
  for (double bi : b) require(bi >= 0, "ControlParams: b_pto must be nonnegative");
  ControlParams c;
  c.mode = ControlMode::device_level;
  c.k_pto = std::move(k);
  c.b_pto = std::move(b);
  return c;
}

Eigen::MatrixXcd system_matrix(const Eigen::MatrixXd& added_mass, const Eigen::MatrixXd& damping,
                               const WecGeometry& geom, const ControlParams& control,
                               double omega, double rho, double g) {
  const auto n = added_mass.rows();
  require(control.size() == static_cast<std::size_t>(n), "system_matrix: control size mismatch");
  const double mass = rho * M_PI * geom.radius * geom.radius * geom.draft();
  const double hydrostatic = rho * g * M_PI * geom.radius * geom.radius;
  Eigen::MatrixXcd s =
      (-omega * omega * added_mass + cd(0.0, omega) * damping).cast<cd>().eval();
  for (Eigen::Index i = 0; i < n; ++i)
    s(i, i) += -omega * omega * mass + hydrostatic +
               control.k_pto[static_cast<std::size_t>(i)] +
               cd(0.0, omega) * control.b_pto[static_cast<std::size_t>(i)];
  return s;
}

std::optional<Eigen::VectorXcd> solve_response(const Eigen::MatrixXcd& system,
                                               const Eigen::VectorXcd& excitation) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(system);
  Eigen::VectorXcd xi = lu.solve(excitation);
  if (!xi.allFinite()) return std::nullopt;
  const double resid = (system * xi - excitation).norm();
  const double scale = system.norm() * xi.norm() + excitation.norm();
  if (scale > 0 && resid > 1e-8 * scale) return std::nullopt;
  return xi;
}

PowerCurve power_curve(const WecGeometry& geom, const ControlParams& control,
                       const HydroTable& table, double rho, double g) {
  PowerCurve curve;
  curve.p_m.assign(table.n_freq(), 0.0);
  for (std::size_t i = 0; i < table.n_freq(); ++i) {
    const double w = table.omegas[i];
    const Eigen::MatrixXcd s =
        system_matrix(table.added_mass[i], table.damping[i], geom, control, w, rho, g);
    const auto xi = solve_response(s, table.excitation[i]);
    if (!xi) {
      ++curve.skipped_frequencies;
      continue;
    }
    double p = 0.0;
    for (Eigen::Index j = 0; j < xi->size(); ++j)
      p += control.b_pto[static_cast<std::size_t>(j)] * std::norm((*xi)(j));
    curve.p_m[i] = 0.5 * w * w * p;
  }
  return curve;
}

SpectrumTable build_spectrum_table(const ClimateModel& climate, const FrequencyGrid& grid) {
  SpectrumTable t;
  const std::size_t n_gq = climate.n_gq();
  t.n_nodes = n_gq * n_gq;
  t.n_freq = grid.size();
  t.weights.resize(t.n_nodes * t.n_freq);
  t.hs.resize(t.n_nodes);
  t.tp.resize(t.n_nodes);
  require(grid.size() >= 2, "build_spectrum_table: need at least 2 frequencies");
  const double dw = (grid.values.back() - grid.values.front()) / static_cast<double>(grid.size() - 1);
  for (std::size_t i = 0; i < n_gq; ++i)
    for (std::size_t j = 0; j < n_gq; ++j) {
      const std::size_t node = i * n_gq + j;
      t.hs[node] = climate.hs_nodes[i];
      t.tp[node] = climate.tp_nodes[j];
      for (std::size_t k = 0; k < t.n_freq; ++k)
        // unit-amplitude power curve, energy-equivalent amplitude weighting
        t.weights[node * t.n_freq + k] =
            2.0 * climate::jonswap(t.hs[node], t.tp[node], grid.values[k]) * dw;
    }
  return t;
}

double sea_state_power(const PowerCurve& curve, const SpectrumTable& spec, std::size_t node,
                       const PowerConfig& config) {
  double p = 0.0;
  for (std::size_t k = 0; k < spec.n_freq; ++k) p += spec.weight(node, k) * curve.p_m[k];
  if (config.p_lim && p > *config.p_lim) p = *config.p_lim;
  return p;
}

FarmEvaluation evaluate_farm(const WecGeometry& geom, const ControlParams& control,
                             const HydroTable& table, const ClimateModel& climate,
                             const SpectrumTable& spec, const PowerConfig& config, double rho,
                             double g) {
  FarmEvaluation ev;
  const PowerCurve curve = power_curve(geom, control, table, rho, g);
  ev.skipped_frequencies = curve.skipped_frequencies;
  ev.node_power.resize(spec.n_nodes);
  for (std::size_t node = 0; node < spec.n_nodes; ++node) {
    double p = 0.0;
    for (std::size_t k = 0; k < spec.n_freq; ++k) p += spec.weight(node, k) * curve.p_m[k];
    if (config.p_lim && p > *config.p_lim) {
      p = *config.p_lim;
      ++ev.saturated_nodes;
    }
    ev.node_power[node] = p;
  }
  double acc = 0.0;
  for (std::size_t y = 0; y < climate.n_years(); ++y)
    for (std::size_t node = 0; node < spec.n_nodes; ++node)
      acc += ev.node_power[node] * climate.prob[y][node];
  ev.p_a = config.efficiency() * acc;
  ev.p_v = objective_pv(ev.p_a, geom);
  return ev;
}

FarmEvaluation lifetime_power(const WecGeometry& geom, const ControlParams& control,
                              const FarmLayout& layout, const ClimateModel& climate,
                              const PowerConfig& config, mbe::PairSource& source) {
  const HydroTable table = mbe::compose_farm(geom, layout, source);
  const SpectrumTable spec = build_spectrum_table(climate, source.grid());
  return evaluate_farm(geom, control, table, climate, spec, config, source.grid().rho,
                       source.grid().g);
}

double objective_pv(double p_a, const WecGeometry& geom) {
  return p_a / (M_PI * geom.radius * geom.radius * geom.draft());
}

double q_factor(double farm_pa, double isolated_pa, std::size_t n_wec) {
  require(isolated_pa != 0.0, "q_factor: isolated power is zero");
  return farm_pa / (static_cast<double>(n_wec) * isolated_pa);
}

namespace {

double interp_diag_added_mass(const HydroTable& table, std::size_t body, double omega) {
  const auto& w = table.omegas;
  const Eigen::Index b = static_cast<Eigen::Index>(body);
  if (omega <= w.front()) return table.added_mass.front()(b, b);
  if (omega >= w.back()) return table.added_mass.back()(b, b);
  std::size_t i = 1;
  while (w[i] < omega) ++i;
  const double t = (omega - w[i - 1]) / (w[i] - w[i - 1]);
  return (1.0 - t) * table.added_mass[i - 1](b, b) + t * table.added_mass[i](b, b);
}

}  // namespace

std::optional<double> natural_frequency(const WecGeometry& geom, double k_pto,
                                        const HydroTable& table, std::size_t body, double rho,
                                        double g, double tol) {
  const double mass = rho * M_PI * geom.radius * geom.radius * geom.draft();
  const double hydrostatic = rho * g * M_PI * geom.radius * geom.radius;
  const double num = k_pto + hydrostatic;
  if (num <= 0.0) return std::nullopt;
  double omega = std::sqrt(num / mass);
  for (int it = 0; it < 500; ++it) {
    const double a = interp_diag_added_mass(table, body, omega);
    const double denom = mass + a;
    if (denom <= 0.0) return std::nullopt;
    const double next = std::sqrt(num / denom);
    const double updated = omega + 0.5 * (next - omega);  // damped iteration
    if (std::abs(updated - omega) <= tol * std::max(1.0, std::abs(updated))) {
      omega = updated;
      return omega;
    }
    omega = updated;
  }
  return std::nullopt;
}

void write_node_power_csv(const std::string& path, const ClimateModel& climate,
                          const SpectrumTable& spec, const std::vector<double>& node_power,
                          std::optional<double> p_lim) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "hs,tp,year,p_i_watts,saturated\n";
  f.precision(12);
  for (std::size_t y = 0; y < climate.n_years(); ++y)
    for (std::size_t node = 0; node < spec.n_nodes; ++node) {
      const bool sat = p_lim && node_power[node] >= *p_lim;
      f << spec.hs[node] << ',' << spec.tp[node] << ',' << climate.years[y] << ','
        << node_power[node] << ',' << (sat ? "true" : "false") << '\n';
    }
}

}  // namespace wecfarm::farm
