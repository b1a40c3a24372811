#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "wecfarm/climate.hpp"
#include "wecfarm/farm_types.hpp"
#include "wecfarm/hydro.hpp"
#include "wecfarm/mbe.hpp"

namespace wecfarm::farm {

using climate::ClimateModel;
using hydro::FrequencyGrid;
using hydro::WecGeometry;

enum class ControlMode { farm_level, device_level };

// Linear PTO spring-damper per device. Farm-level control broadcasts one
// (k, b) pair so that both modes share the evaluation path bit for bit.
struct ControlParams {
  ControlMode mode = ControlMode::farm_level;
  std::vector<double> k_pto;  // [N/m]
  std::vector<double> b_pto;  // [N s/m]

  static ControlParams farm_level(double k, double b, std::size_t n);
  static ControlParams device_level(std::vector<double> k, std::vector<double> b);
  std::size_t size() const { return k_pto.size(); }
};

struct PowerConfig {
  double eta_pcc = 0.8;
  double eta_oa = 0.95;
  double eta_t = 0.98;
  std::optional<double> p_lim;  // per-sea-state saturation [W]

  double efficiency() const { return eta_pcc * eta_oa * eta_t; }
};

// Forward system matrix S(omega) = -omega^2 (M+A) + G + K + i omega (B+B_pto);
// the response is xi = S^{-1} Fe, obtained by LU solve.
Eigen::MatrixXcd system_matrix(const Eigen::MatrixXd& added_mass, const Eigen::MatrixXd& damping,
                               const WecGeometry& geom, const ControlParams& control,
                               double omega, double rho, double g);

// Returns nullopt when the system is numerically singular at this frequency.
std::optional<Eigen::VectorXcd> solve_response(const Eigen::MatrixXcd& system,
                                               const Eigen::VectorXcd& excitation);

// Unit-amplitude mechanical power for every grid frequency:
// p_m(omega) = 1/2 omega^2 sum_i b_pto_i |xi_i|^2. Singular frequencies are
// skipped and counted.
struct PowerCurve {
  std::vector<double> p_m;  // [W] per unit amplitude squared
  std::size_t skipped_frequencies = 0;
};
PowerCurve power_curve(const WecGeometry& geom, const ControlParams& control,
                       const HydroTable& table, double rho, double g);

// Precomputed spectral weights 2 S_JS(node, omega_k) dOmega per climate node,
// so that p_i(node) = sum_k weight(node, k) p_m(k).
struct SpectrumTable {
  std::size_t n_nodes = 0, n_freq = 0;
  std::vector<double> weights;  // row-major node x frequency
  std::vector<double> hs, tp;   // node coordinates

  double weight(std::size_t node, std::size_t k) const { return weights[node * n_freq + k]; }
};
SpectrumTable build_spectrum_table(const ClimateModel& climate, const FrequencyGrid& grid);

// Per-sea-state absorbed power with optional saturation.
double sea_state_power(const PowerCurve& curve, const SpectrumTable& spec, std::size_t node,
                       const PowerConfig& config);

struct FarmEvaluation {
  double p_a = 0.0;                // lifetime average power [W]
  double p_v = 0.0;                // objective [W/m^3]
  std::vector<double> node_power;  // saturated p_i per climate node [W]
  std::size_t saturated_nodes = 0;
  std::size_t skipped_frequencies = 0;
};

FarmEvaluation evaluate_farm(const WecGeometry& geom, const ControlParams& control,
                             const HydroTable& table, const ClimateModel& climate,
                             const SpectrumTable& spec, const PowerConfig& config,
                             double rho = 1025.0, double g = 9.81);

// Composes the farm table from the given source and runs the power pipeline.
FarmEvaluation lifetime_power(const WecGeometry& geom, const ControlParams& control,
                              const FarmLayout& layout, const ClimateModel& climate,
                              const PowerConfig& config, mbe::PairSource& source);

double objective_pv(double p_a, const WecGeometry& geom);

double q_factor(double farm_pa, double isolated_pa, std::size_t n_wec);

// Fixed point of omega = sqrt((k_pto + G)/(M + A_ii(omega))); nullopt when
// k_pto + G <= 0.
std::optional<double> natural_frequency(const WecGeometry& geom, double k_pto,
                                        const HydroTable& table, std::size_t body, double rho,
                                        double g, double tol = 1e-8);

void write_node_power_csv(const std::string& path, const ClimateModel& climate,
                          const SpectrumTable& spec, const std::vector<double>& node_power,
                          std::optional<double> p_lim);

}  // namespace wecfarm::farm
