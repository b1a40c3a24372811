#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wecfarm/climate.hpp"
#include "wecfarm/farm_model.hpp"
#include "wecfarm/hydro.hpp"
#include "wecfarm/mbe.hpp"
#include "wecfarm/util.hpp"

namespace wecfarm::opt {

using climate::ClimateModel;
using farm::ControlMode;
using farm::ControlParams;
using farm::PowerConfig;
using hydro::FrequencyGrid;
using hydro::GeometryBounds;
using hydro::WecGeometry;

// 0.5 sqrt(2 N 1e4), the farm box half-width [m]
double farm_box_half_width(std::size_t n_wec);

struct ControlBounds {
  double k_lo = -5e5, k_hi = 5e5;  // [N/m]
  double b_lo = 0.0, b_hi = 5e5;   // [N s/m]
};

struct ProblemSpec {
  std::size_t n_wec = 5;
  ControlMode control_mode = ControlMode::farm_level;
  bool optimize_plant = true;
  bool optimize_control = true;
  bool optimize_layout = true;

  WecGeometry frozen_geom{2.0, 1.0};
  double frozen_k_pto = -5e3;   // [N/m]
  double frozen_b_pto = 5e5;    // [N s/m]
  FarmLayout frozen_layout;     // used when optimize_layout is false

  GeometryBounds geom_bounds;
  ControlBounds control_bounds;
  double safety_distance = 10.0;  // [m]
  PowerConfig power;

  std::size_t n_vars() const;
  void bounds(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const;
  double box_half_width() const { return farm_box_half_width(n_wec); }
};

struct Candidate {
  WecGeometry geom;
  ControlParams control;
  FarmLayout layout;
};
Candidate decode(const ProblemSpec& spec, const Eigen::VectorXd& x);

// Pairwise spacing residuals 2R + s_d - l_pq (feasible iff <= 0), followed by
// farm-box and draft residuals.
std::vector<double> constraints(const FarmLayout& layout, double radius, const ProblemSpec& spec);
double violation(const std::vector<double>& residuals);

struct EvalOutcome {
  double p_v = 0.0;
  std::vector<double> residuals;
  bool feasible = false;
};

// Binds a problem to a model source and climate so candidates can be scored.
class Evaluator {
 public:
  Evaluator(ProblemSpec spec, mbe::PairSource& source, const ClimateModel& climate);

  EvalOutcome evaluate(const Eigen::VectorXd& x) const;
  const ProblemSpec& spec() const { return spec_; }
  std::size_t eval_count() const { return evals_; }

 private:
  ProblemSpec spec_;
  mbe::PairSource& source_;
  const ClimateModel& climate_;
  farm::SpectrumTable spectrum_;
  mutable std::atomic<std::size_t> evals_{0};
};

struct OptResult {
  Eigen::VectorXd best;
  double p_v = 0.0;
  std::vector<double> residuals;
  bool feasible = false;
  std::size_t evaluations = 0;
  std::uint64_t seed = 0;
  std::vector<double> history;  // per-generation / per-iterate best objective
  bool stationary = false;      // refiner could not improve the start point
};

struct GaOptions {
  std::size_t population = 0;   // 0 -> 20 n_vars capped at 400
  std::size_t generations = 100;
  double crossover_rate = 0.9;
  double blend_alpha = 0.5;
  double mutation_sigma = 0.1;  // fraction of the variable range
  std::uint64_t seed = 0;
};

// Real-coded GA: tournament selection under the feasibility-dominance rule,
// blend crossover, Gaussian mutation, elitist replacement.
OptResult ga_search(const Evaluator& evaluator, const GaOptions& opts);

struct RefineOptions {
  std::size_t max_iterations = 200;
  std::size_t eval_cap = 100000;
  double rel_step = 1e-6;       // finite-difference step
  double step_tol = 1e-8;
  double objective_tol = 1e-10;
};

// Monotone projected-gradient ascent with central finite differences and
// active-set handling of the spacing constraints.
OptResult gradient_refine(const Eigen::VectorXd& x0, const Evaluator& evaluator,
                          const RefineOptions& opts = {});

struct HybridResult {
  OptResult global_stage;   // GA on the surrogate evaluator
  OptResult refined_stage;  // gradient refinement on the oracle evaluator
  double start_pv_oracle = 0.0;  // GA best re-scored by the oracle
};

HybridResult hybrid(const Evaluator& surrogate_eval, const Evaluator& oracle_eval,
                    const GaOptions& ga_opts, const RefineOptions& refine_opts = {});

// random feasible design for baselines and validation studies
Eigen::VectorXd random_feasible(const ProblemSpec& spec, Rng& rng, std::size_t max_tries = 2000);

struct PerturbRow {
  double dx = 0.0, dy = 0.0;
  double p_v = 0.0;
  bool feasible = false;
};
std::vector<PerturbRow> perturb_sensitivity(const Eigen::VectorXd& x, std::size_t wec_index,
                                            double radius, std::size_t n, std::uint64_t seed,
                                            const Evaluator& evaluator);

// ---- case studies ----

enum class CaseId { I, II, III, IV, V, VI };
CaseId case_from_string(const std::string& s);
std::string to_string(CaseId id);

struct CaseStudyConfig {
  hydro::Backend backend = hydro::Backend::reference;
  int modes = 40;
  FrequencyGrid grid = FrequencyGrid::standard();
  ClimateModel climate;
  std::optional<double> p_lim;           // [W]
  std::size_t n_wec = 5;                 // Studies I..V override as needed
  std::uint64_t seed = 0;
  GaOptions ga;
  RefineOptions refine;
  // GA stage runs on this source when set, on the oracle otherwise
  mbe::PairSource* surrogate_source = nullptr;
};

struct CaseStudyEntry {
  std::string label;
  std::optional<double> p_lim;
  Eigen::VectorXd best;
  WecGeometry geom;
  double p_v = 0.0;
  double p_a = 0.0;
  std::optional<double> q = std::nullopt;
  std::size_t evaluations = 0;
  std::vector<double> layout_x, layout_y;
};

struct CaseStudyResult {
  CaseId id;
  std::vector<CaseStudyEntry> entries;
};

CaseStudyResult case_study(CaseId id, const CaseStudyConfig& config);

}  // namespace wecfarm::opt
