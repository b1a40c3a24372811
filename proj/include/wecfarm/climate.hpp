#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wecfarm::climate {

// One observed sea state.
struct SeaSample {
  int year = 0;
  double hs = 0.0;  // significant wave height [m]
  double tp = 0.0;  // peak period [s]
};

// Quadrature box over which sea-state densities are integrated.
struct ClimateBox {
  double hs_lo = 0.25, hs_hi = 10.0;  // [m]
  double tp_lo = 3.0, tp_hi = 17.0;   // [s]
};

// Per-year joint probability of (Hs, Tp) on a Gauss-Legendre tensor grid.
// prob[y] is row-major n_gq x n_gq, row = Hs node, column = Tp node.
// Masses are renormalized to sum to 1 per year.
struct ClimateModel {
  std::vector<int> years;
  std::vector<double> hs_nodes, tp_nodes;
  std::vector<double> hs_weights, tp_weights;
  std::vector<std::vector<double>> pdf;   // density values at node pairs
  std::vector<std::vector<double>> prob;  // probability masses
  ClimateBox box;

  std::size_t n_gq() const { return hs_nodes.size(); }
  std::size_t n_years() const { return years.size(); }
  double mass(std::size_t y, std::size_t i, std::size_t j) const {
    return prob[y][i * n_gq() + j];
  }
};

// JONSWAP shape parameters for one sea state.
struct SpectrumParams {
  double gamma = 1.0;
  double alpha_s = 0.0;
  double beta_s = 0.0;   // [1/(rad/s)^-4]
  double omega_p = 0.0;  // [rad/s]
};

// Gauss-Legendre nodes/weights on [a, b]; nodes strictly increasing,
// weights sum to b - a.
struct Quadrature {
  std::vector<double> nodes, weights;
};
Quadrature gauss_legendre(std::size_t n, double a, double b);

SpectrumParams jonswap_params(double hs, double tp);
// Spectral density [m^2 s/rad].
double jonswap(double hs, double tp, double omega);

// Wavenumber from omega^2 = g k tanh(k h); residual <= 1e-10 * omega^2.
double dispersion(double omega, double h, double g = 9.81);

// Gaussian-kernel density estimate per year, evaluated on the tensor grid.
// Bandwidths default to Silverman's per-dimension rule on each year's samples.
ClimateModel fit_climate(const std::vector<SeaSample>& samples, std::size_t n_gq,
                         std::optional<std::pair<double, double>> bandwidth = std::nullopt,
                         const ClimateBox& box = {});

// Superposed regular-wave components for one sea state.
struct WaveComponents {
  std::vector<double> omegas;      // [rad/s]
  std::vector<double> wavenumbers; // [1/m]
  std::vector<double> amplitudes;  // H_i [m] (crest-to-trough)
  std::vector<double> phases;      // [rad]
};

WaveComponents wave_components(double hs, double tp, std::size_t n_r, std::uint64_t seed,
                               double h = 50.0, double g = 9.81);
double elevation_at(const WaveComponents& wc, double x, double t);
// Irregular wave elevation [m] at (x, t); deterministic per seed.
double synth_elevation(double hs, double tp, std::size_t n_r, std::uint64_t seed, double x,
                       double t, double h = 50.0, double g = 9.81);

// Correlated bivariate-lognormal stand-in for measured (Hs, Tp) records.
struct SyntheticSite {
  double median_hs = 2.0;    // [m]
  double median_tp = 8.0;    // [s]
  double sigma_log_hs = 0.35;
  double sigma_log_tp = 0.20;
  double rho = 0.5;          // log-space correlation
  ClimateBox clip;           // samples clipped to this box
};

std::vector<SeaSample> synth_climate(const SyntheticSite& site, int years, std::size_t n_per_year,
                                     std::uint64_t seed);

// CSV with header `year,hs_m,tp_s`.
std::vector<SeaSample> read_samples_csv(const std::string& path);
void write_samples_csv(const std::string& path, const std::vector<SeaSample>& samples);

std::string climate_to_json(const ClimateModel& m);
ClimateModel climate_from_json(const std::string& text);

}  // namespace wecfarm::climate
