#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wecfarm/climate.hpp"
#include "wecfarm/hydro.hpp"
#include "wecfarm/optimizer.hpp"
#include "wecfarm/surrogate.hpp"

namespace wecfarm::cli {

// Full command-line entry point. Exit codes: 0 success, 1 validation
// failure, 2 usage error.
int run(int argc, const char* const* argv);

// ---- pieces shared with the test suites ----

struct SmValidationRow {
  std::string qoi;
  double mean_mse = 0.0;
  double max_mse = 0.0;
  std::size_t n_points = 0;
};

// Per-QoI mean/max per-point MSE of the bundle against the oracle on a
// seeded held-out grid.
std::vector<SmValidationRow> validate_bundle(const surrogate::Bundle& bundle,
                                             const hydro::FrequencyGrid& grid,
                                             hydro::Backend backend, int modes,
                                             std::size_t n_points, std::uint64_t seed);

struct ObjectiveValidation {
  std::vector<double> oracle_pv, surrogate_pv;  // paired, [W/m^3]
  double p99_abs_error = 0.0;
  double oracle_interdecile = 0.0;  // 90th - 10th percentile of oracle p_v
};

// Paired surrogate/oracle objective evaluation over random feasible full
// designs (plant + farm-level control + layout).
ObjectiveValidation objective_validation(const surrogate::Bundle& bundle,
                                         const hydro::FrequencyGrid& grid,
                                         hydro::Backend backend, int modes,
                                         const climate::ClimateModel& climate, std::size_t n,
                                         std::uint64_t seed);

void write_objective_validation(const std::string& dir, const ObjectiveValidation& v,
                                const std::string& stamp);

}  // namespace wecfarm::cli
