#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace wecfarm {

// Cartesian WEC centers [m]. Optimization decodes pin the first WEC to the
// origin; the composition routines accept arbitrary centers.
struct FarmLayout {
  std::vector<double> x, y;

  std::size_t size() const { return x.size(); }
  static FarmLayout single() { return {{0.0}, {0.0}}; }
};

// Frequency-indexed farm hydrodynamics: added mass [kg], radiation damping
// [kg/s], excitation per unit wave amplitude [N/m].
struct HydroTable {
  std::vector<double> omegas;
  std::vector<Eigen::MatrixXd> added_mass;
  std::vector<Eigen::MatrixXd> damping;
  std::vector<Eigen::VectorXcd> excitation;

  std::size_t n_freq() const { return omegas.size(); }
  std::size_t n_bodies() const { return added_mass.empty() ? 0 : added_mass[0].rows(); }
};

}  // namespace wecfarm
