#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "wecfarm/farm_types.hpp"
#include "wecfarm/hydro.hpp"

namespace wecfarm::mbe {

using hydro::FrequencyGrid;
using hydro::OneBodyOutputs;
using hydro::PairOutputs;
using hydro::WecGeometry;

// Fe  -> Fe/(rho g pi R^2 D); A -> A/(rho pi R^3); B -> B/(omega rho pi R^3)
double normalize_added_mass(double a, const WecGeometry& geom, double rho);
double denormalize_added_mass(double a_tilde, const WecGeometry& geom, double rho);
double normalize_damping(double b, const WecGeometry& geom, double omega, double rho);
double denormalize_damping(double b_tilde, const WecGeometry& geom, double omega, double rho);
std::complex<double> normalize_excitation(std::complex<double> fe, const WecGeometry& geom,
                                          double rho, double g);
std::complex<double> denormalize_excitation(std::complex<double> fe_tilde,
                                            const WecGeometry& geom, double rho, double g);

struct PairFeatures {
  double l = 0.0;      // [m]
  double theta = 0.0;  // [rad], folded into [0, pi]
};
// Relative distance and angle of q as seen from p; the sign of the angle is
// dropped by x-axis symmetry.
PairFeatures pair_features(double px, double py, double qx, double qy);

// Additive two-body cluster terms relative to the isolated body.
struct AdditiveTerms {
  std::vector<double> da11, da12, db11, db12;
  std::vector<std::complex<double>> dfe1;
};
AdditiveTerms additive_terms(const OneBodyOutputs& iso, const PairOutputs& pair);

// Normalized one- and two-body model outputs on a fixed frequency grid;
// implemented by the hydro oracle and by trained committees.
class PairSource {
 public:
  virtual ~PairSource() = default;
  virtual const FrequencyGrid& grid() const = 0;
  virtual OneBodyOutputs one_body(const WecGeometry& geom) = 0;
  virtual PairOutputs two_body(const WecGeometry& geom, double l, double theta) = 0;
  virtual std::vector<PairOutputs> two_body_batch(const WecGeometry& geom,
                                                  const std::vector<PairFeatures>& feats);
  // number of queries outside the training box (always 0 for oracles)
  virtual std::size_t extrapolation_count() const { return 0; }
};

std::unique_ptr<PairSource> make_oracle_source(const FrequencyGrid& grid, hydro::Backend backend,
                                               int modes = 40);

// Order-2 cluster composition of the farm table from one- and two-body
// model outputs; matrices are symmetrized after assembly.
HydroTable compose_farm(const WecGeometry& geom, const FarmLayout& layout, PairSource& source);

}  // namespace wecfarm::mbe
