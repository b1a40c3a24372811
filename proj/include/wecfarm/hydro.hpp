#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "wecfarm/farm_types.hpp"

namespace wecfarm::hydro {

// Uniform heaving cylinder. slenderness = radius / draft.
struct WecGeometry {
  double radius = 2.0;       // [m]
  double slenderness = 1.0;  // radius over draft

  double draft() const { return radius / slenderness; }
};

// Bounds shared by the sampling pools and the optimizer.
struct GeometryBounds {
  double r_lo = 0.5, r_hi = 10.0;
  double rd_lo = 0.2, rd_hi = 10.0;
  double d_lo = 0.5, d_hi = 20.0;
};

bool geometry_in_bounds(const WecGeometry& g, const GeometryBounds& b = {});
void check_geometry(const WecGeometry& g, const GeometryBounds& b = {});

struct FrequencyGrid {
  std::vector<double> values;  // strictly increasing [rad/s]
  double h = 50.0;             // water depth [m]
  double g = 9.81;             // gravity [m/s^2]
  double rho = 1025.0;         // water density [kg/m^3]

  std::size_t size() const { return values.size(); }
  // 100 evenly spaced frequencies on [0.3, 2.0]
  static FrequencyGrid standard(std::size_t n = 100, double lo = 0.3, double hi = 2.0);
};

enum class Backend { reference, toy };
Backend backend_from_string(const std::string& name);
std::string to_string(Backend b);

// Per-frequency isolated-body coefficients, normalized:
// a = A/(rho pi R^3), b = B/(omega rho pi R^3), fe = Fe/(rho g pi R^2 D).
struct OneBodyOutputs {
  std::vector<double> a_tilde;
  std::vector<double> b_tilde;
  std::vector<double> fe_re;
  std::vector<double> fe_im;
};

// Two-body configuration: body 1 at the origin, body 2 at distance l and
// angle theta from the +x axis. Indices 11/12 follow the farm matrices.
struct PairOutputs {
  std::vector<double> a11, a12, b11, b12;
  std::vector<double> fe1_re, fe1_im;
};

// Eigenfunction-matching solution for one heaving truncated vertical
// cylinder in finite depth (azimuthal mode 0). Raw (unnormalized) outputs.
// damping comes from the far-field radiated flux (nonnegative by
// construction); damping_pressure is the base-pressure value kept as a
// consistency check on the matching solve.
struct CylinderSolution {
  double added_mass = 0.0;                 // [kg]
  double damping = 0.0;                    // [kg/s]
  double damping_pressure = 0.0;           // [kg/s]
  std::complex<double> excitation{0.0};    // [N/m]
  double scatter_strength = 0.0;           // far-field diffracted amplitude, dimensionless
};
CylinderSolution solve_cylinder(double radius, double draft, double omega, double h, double g,
                                double rho, int modes);

// Isolated-body solve plus the far-field scattering strength needed by the
// pair model. single_body() is the spec surface; eval_single() feeds the
// internal composition paths.
struct SingleBodyEval {
  OneBodyOutputs iso;
  std::vector<double> sigma;  // far-field scattering strength per frequency
};

SingleBodyEval eval_single(const WecGeometry& geom, const FrequencyGrid& grid, Backend backend,
                           int modes = 40);
OneBodyOutputs single_body(const WecGeometry& geom, const FrequencyGrid& grid, Backend backend,
                           int modes = 40);
PairOutputs pair_from_single(const SingleBodyEval& ev, const FrequencyGrid& grid, double l,
                             double theta);
PairOutputs pair_body(const WecGeometry& geom, double l, double theta, const FrequencyGrid& grid,
                      Backend backend, int modes = 40);

// Memoized eval_single keyed on (backend, modes, geometry, grid).
std::shared_ptr<const SingleBodyEval> cached_single(const WecGeometry& geom,
                                                    const FrequencyGrid& grid, Backend backend,
                                                    int modes = 40);

// Full-farm table assembled directly from single- and pair-body solves with
// the order-2 cluster composition and per-body phase factors.
HydroTable farm_direct(const WecGeometry& geom, const FarmLayout& layout,
                       const FrequencyGrid& grid, Backend backend, int modes = 40);

void write_one_body_csv(const std::string& path, const FrequencyGrid& grid,
                        const OneBodyOutputs& out);
void write_pair_csv(const std::string& path, const FrequencyGrid& grid, const PairOutputs& out);
void write_hydro_table_csv(const std::string& path, const HydroTable& table);

}  // namespace wecfarm::hydro
