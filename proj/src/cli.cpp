#include "wecfarm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wecfarm/farm_model.hpp"
#include "wecfarm/mbe.hpp"
#include "wecfarm/util.hpp"
#include "wecfarm/version.hpp"

namespace wecfarm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- config schema ----

struct Node {
  std::map<std::string, Node> children;
  bool leaf = false;
};

Node leaf() { return Node{{}, true}; }

const Node& config_schema() {
  static const Node schema = [] {
    Node root;
    root.children["seed"] = leaf();
    root.children["output_dir"] = leaf();
    Node hydro;
    hydro.children["backend"] = leaf();
    hydro.children["modes"] = leaf();
    root.children["hydro"] = hydro;
    Node grid;
    grid.children["n"] = leaf();
    grid.children["lo"] = leaf();
    grid.children["hi"] = leaf();
    root.children["grid"] = grid;
    Node synth;
    for (const char* k : {"median_hs", "median_tp", "sigma_log_hs", "sigma_log_tp", "rho",
                          "years", "samples_per_year", "seed"})
      synth.children[k] = leaf();
    Node climate;
    climate.children["path"] = leaf();
    climate.children["synthetic"] = synth;
    climate.children["n_gq"] = leaf();
    climate.children["bandwidth_hs"] = leaf();
    climate.children["bandwidth_tp"] = leaf();
    root.children["climate"] = climate;
    Node problem;
    for (const char* k : {"case", "n_wec", "control_mode", "p_lim_w"})
      problem.children[k] = leaf();
    root.children["problem"] = problem;
    Node ga;
    for (const char* k : {"population", "generations", "seed"}) ga.children[k] = leaf();
    root.children["ga"] = ga;
    Node refine;
    for (const char* k : {"max_iterations", "eval_cap"}) refine.children[k] = leaf();
    root.children["refine"] = refine;
    Node surrogate_node;
    surrogate_node.children["bundle"] = leaf();
    root.children["surrogate"] = surrogate_node;
    Node train;
    for (const char* k : {"one_body_pool", "two_body_pool", "k_max", "epochs"})
      train.children[k] = leaf();
    root.children["train"] = train;
    Node validate;
    for (const char* k : {"n_points", "objective_designs", "mean_tol", "max_tol", "seed"})
      validate.children[k] = leaf();
    root.children["validate"] = validate;
    Node geom;
    geom.children["radius"] = leaf();
    geom.children["slenderness"] = leaf();
    Node control;
    for (const char* k : {"mode", "k_pto", "b_pto"}) control.children[k] = leaf();
    Node simulate;
    simulate.children["geom"] = geom;
    simulate.children["control"] = control;
    simulate.children["layout"] = leaf();
    simulate.children["source"] = leaf();
    root.children["simulate"] = simulate;
    Node perturb;
    for (const char* k : {"result", "wec", "radius", "n", "seed"}) perturb.children[k] = leaf();
    root.children["perturb"] = perturb;
    return root;
  }();
  return schema;
}

void check_keys(const json& j, const Node& node, const std::string& path) {
  if (node.leaf || !j.is_object()) return;
  for (const auto& [key, value] : j.items()) {
    const auto it = node.children.find(key);
    if (it == node.children.end())
      throw UsageError("unknown config key: " + (path.empty() ? key : path + "." + key));
    check_keys(value, it->second, path.empty() ? key : path + "." + key);
  }
}

struct Context {
  json config;
  std::string config_hash;
  fs::path out_dir;
  std::uint64_t seed = 0;
  hydro::Backend backend = hydro::Backend::reference;
  int modes = 40;
  hydro::FrequencyGrid grid = hydro::FrequencyGrid::standard();
  bool verbose = false;

  std::string stamp() const {
    return "config_hash=" + config_hash + " seed=" + std::to_string(seed) +
           " backend=" + hydro::to_string(backend) + " version=" + kVersion;
  }
  json meta() const {
    return json{{"config_hash", config_hash},
                {"seed", seed},
                {"backend", hydro::to_string(backend)},
                {"version", kVersion}};
  }
  void log(const std::string& s) const {
    if (verbose) std::cerr << "[wecfarm] " << s << "\n";
  }
};

Context make_context(const std::string& config_path, const std::string& out_override,
                     std::optional<std::uint64_t> seed_override, bool verbose) {
  Context ctx;
  std::ifstream f(config_path);
  if (!f) throw UsageError("cannot read config file: " + config_path);
  try {
    f >> ctx.config;
  } catch (const std::exception& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(ctx.config, config_schema(), "");
  ctx.config_hash = hex64(fnv1a64(ctx.config.dump()));
  ctx.seed = seed_override.value_or(ctx.config.value("seed", 0));
  if (ctx.config.contains("hydro")) {
    const auto& h = ctx.config["hydro"];
    ctx.backend = hydro::backend_from_string(h.value("backend", "reference"));
    ctx.modes = h.value("modes", 40);
  }
  if (ctx.config.contains("grid")) {
    const auto& g = ctx.config["grid"];
    ctx.grid = hydro::FrequencyGrid::standard(g.value("n", 100), g.value("lo", 0.3),
                                              g.value("hi", 2.0));
  }
  ctx.out_dir = out_override.empty() ? ctx.config.value("output_dir", "out") : out_override;
  fs::create_directories(ctx.out_dir);
  ctx.verbose = verbose;
  return ctx;
}

void write_json_artifact(const Context& ctx, const std::string& name, json payload) {
  payload["meta"] = ctx.meta();
  std::ofstream f(ctx.out_dir / name);
  if (!f) throw std::runtime_error("cannot write artifact: " + name);
  f << payload.dump(2) << "\n";
}

std::ofstream open_csv(const Context& ctx, const std::string& name) {
  std::ofstream f(ctx.out_dir / name);
  if (!f) throw std::runtime_error("cannot write artifact: " + name);
  f << "# " << ctx.stamp() << "\n";
  f.precision(12);
  return f;
}

climate::ClimateModel resolve_climate(const Context& ctx) {
  if (!ctx.config.contains("climate"))
    throw UsageError("config requires a climate block (path or synthetic)");
  const auto& c = ctx.config["climate"];
  const std::size_t n_gq = c.value("n_gq", 40);
  std::optional<std::pair<double, double>> bw;
  if (c.contains("bandwidth_hs") || c.contains("bandwidth_tp"))
    bw = std::make_pair(c.value("bandwidth_hs", 0.3), c.value("bandwidth_tp", 0.5));
  std::vector<climate::SeaSample> samples;
  if (c.contains("path")) {
    samples = climate::read_samples_csv(c["path"].get<std::string>());
  } else {
    climate::SyntheticSite site;
    json s = c.value("synthetic", json::object());
    site.median_hs = s.value("median_hs", site.median_hs);
    site.median_tp = s.value("median_tp", site.median_tp);
    site.sigma_log_hs = s.value("sigma_log_hs", site.sigma_log_hs);
    site.sigma_log_tp = s.value("sigma_log_tp", site.sigma_log_tp);
    site.rho = s.value("rho", site.rho);
    const int years = s.value("years", 5);
    const std::size_t per_year = s.value("samples_per_year", 500);
    const std::uint64_t seed = s.value("seed", ctx.seed + 17);
    samples = climate::synth_climate(site, years, per_year, seed);
  }
  return climate::fit_climate(samples, n_gq, bw);
}

opt::ProblemSpec problem_from_config(const Context& ctx) {
  opt::ProblemSpec spec;
  if (ctx.config.contains("problem")) {
    const auto& p = ctx.config["problem"];
    spec.n_wec = p.value("n_wec", 5);
    const std::string mode = p.value("control_mode", "farm");
    if (mode == "farm")
      spec.control_mode = farm::ControlMode::farm_level;
    else if (mode == "device")
      spec.control_mode = farm::ControlMode::device_level;
    else
      throw UsageError("problem.control_mode must be farm or device");
    if (p.contains("p_lim_w") && !p["p_lim_w"].is_null())
      spec.power.p_lim = p["p_lim_w"].get<double>();
  }
  return spec;
}

opt::GaOptions ga_from_config(const Context& ctx) {
  opt::GaOptions ga;
  ga.seed = ctx.seed;
  if (ctx.config.contains("ga")) {
    const auto& g = ctx.config["ga"];
    ga.population = g.value("population", 0);
    ga.generations = g.value("generations", 100);
    ga.seed = g.value("seed", ctx.seed);
  }
  return ga;
}

opt::RefineOptions refine_from_config(const Context& ctx) {
  opt::RefineOptions r;
  if (ctx.config.contains("refine")) {
    const auto& j = ctx.config["refine"];
    r.max_iterations = j.value("max_iterations", r.max_iterations);
    r.eval_cap = j.value("eval_cap", r.eval_cap);
  }
  return r;
}

std::optional<surrogate::Bundle> maybe_bundle(const Context& ctx) {
  if (ctx.config.contains("surrogate") && ctx.config["surrogate"].contains("bundle"))
    return surrogate::load_bundle(ctx.config["surrogate"]["bundle"].get<std::string>());
  return std::nullopt;
}

json problem_to_json(const opt::ProblemSpec& spec) {
  return json{{"n_wec", spec.n_wec},
              {"control_mode",
               spec.control_mode == farm::ControlMode::farm_level ? "farm" : "device"},
              {"optimize_plant", spec.optimize_plant},
              {"optimize_control", spec.optimize_control},
              {"optimize_layout", spec.optimize_layout},
              {"frozen_radius", spec.frozen_geom.radius},
              {"frozen_slenderness", spec.frozen_geom.slenderness},
              {"frozen_k_pto", spec.frozen_k_pto},
              {"frozen_b_pto", spec.frozen_b_pto},
              {"p_lim_w", spec.power.p_lim ? json(*spec.power.p_lim) : json(nullptr)},
              {"safety_distance", spec.safety_distance}};
}

opt::ProblemSpec problem_from_json(const json& j) {
  opt::ProblemSpec spec;
  spec.n_wec = j.at("n_wec").get<std::size_t>();
  spec.control_mode = j.at("control_mode").get<std::string>() == "farm"
                          ? farm::ControlMode::farm_level
                          : farm::ControlMode::device_level;
  spec.optimize_plant = j.at("optimize_plant").get<bool>();
  spec.optimize_control = j.at("optimize_control").get<bool>();
  spec.optimize_layout = j.at("optimize_layout").get<bool>();
  spec.frozen_geom = {j.at("frozen_radius").get<double>(),
                      j.at("frozen_slenderness").get<double>()};
  spec.frozen_k_pto = j.at("frozen_k_pto").get<double>();
  spec.frozen_b_pto = j.at("frozen_b_pto").get<double>();
  if (!j.at("p_lim_w").is_null()) spec.power.p_lim = j.at("p_lim_w").get<double>();
  spec.safety_distance = j.at("safety_distance").get<double>();
  return spec;
}

// ---- commands ----

int cmd_climate_fit(const Context& ctx) {
  const auto model = resolve_climate(ctx);
  std::ofstream f(ctx.out_dir / "climate_model.json");
  json j = json::parse(climate::climate_to_json(model));
  j["meta"] = ctx.meta();
  f << j.dump(2) << "\n";
  ctx.log("wrote climate_model.json");
  return 0;
}

int cmd_synth_climate(const Context& ctx) {
  climate::SyntheticSite site;
  json s = ctx.config.contains("climate") ? ctx.config["climate"].value("synthetic", json::object())
                                          : json::object();
  site.median_hs = s.value("median_hs", site.median_hs);
  site.median_tp = s.value("median_tp", site.median_tp);
  site.sigma_log_hs = s.value("sigma_log_hs", site.sigma_log_hs);
  site.sigma_log_tp = s.value("sigma_log_tp", site.sigma_log_tp);
  site.rho = s.value("rho", site.rho);
  const int years = s.value("years", 5);
  const std::size_t per_year = s.value("samples_per_year", 500);
  const std::uint64_t seed = s.value("seed", ctx.seed + 17);
  const auto samples = climate::synth_climate(site, years, per_year, seed);
  climate::write_samples_csv((ctx.out_dir / "climate_samples.csv").string(), samples);
  ctx.log("wrote climate_samples.csv");
  return 0;
}

int cmd_train(const Context& ctx) {
  surrogate::TrainAllConfig cfg;
  cfg.seed = ctx.seed;
  cfg.modes = ctx.modes;
  if (ctx.config.contains("train")) {
    const auto& t = ctx.config["train"];
    cfg.one_body_pool = t.value("one_body_pool", cfg.one_body_pool);
    cfg.two_body_pool = t.value("two_body_pool", cfg.two_body_pool);
    cfg.k_max = t.value("k_max", cfg.k_max);
    cfg.epochs = t.value("epochs", cfg.epochs);
  }
  const auto bundle = surrogate::train_all(ctx.grid, ctx.backend, cfg,
                                           [&](const std::string& s) { ctx.log(s); });
  surrogate::save_bundle((ctx.out_dir / "bundle.json").string(), bundle);
  for (const auto& committee : bundle.committees) {
    auto f = open_csv(ctx, "train_log_" + committee.qoi + ".csv");
    f << "round,pool_var,max_mse,n_samples\n";
    for (const auto& row : committee.history)
      f << row.round << ',' << row.pool_var_mean << ',' << row.max_mse << ',' << row.n_samples
        << '\n';
  }
  ctx.log("wrote bundle.json");
  return 0;
}

int cmd_validate_sm(const Context& ctx) {
  const auto bundle = maybe_bundle(ctx);
  if (!bundle) throw UsageError("validate-sm requires surrogate.bundle in the config");
  std::size_t n_points = 500;
  double mean_tol = 1e-2, max_tol = 1e-1;
  std::uint64_t vseed = ctx.seed + 101;
  std::size_t objective_designs = 0;
  if (ctx.config.contains("validate")) {
    const auto& v = ctx.config["validate"];
    n_points = v.value("n_points", n_points);
    mean_tol = v.value("mean_tol", mean_tol);
    max_tol = v.value("max_tol", max_tol);
    vseed = v.value("seed", vseed);
    objective_designs = v.value("objective_designs", objective_designs);
  }
  const auto rows = validate_bundle(*bundle, ctx.grid, ctx.backend, ctx.modes, n_points, vseed);
  bool pass = true;
  json jrows = json::array();
  {
    auto f = open_csv(ctx, "validate_sm.csv");
    f << "qoi,mean_mse,max_mse,n_points\n";
    for (const auto& r : rows) {
      f << r.qoi << ',' << r.mean_mse << ',' << r.max_mse << ',' << r.n_points << '\n';
      jrows.push_back({{"qoi", r.qoi},
                       {"mean_mse", r.mean_mse},
                       {"max_mse", r.max_mse},
                       {"n_points", r.n_points}});
      if (r.mean_mse > mean_tol || r.max_mse > max_tol) pass = false;
    }
  }
  json summary{{"rows", jrows}, {"mean_tol", mean_tol}, {"max_tol", max_tol}, {"pass", pass}};
  if (objective_designs > 0) {
    const auto model = resolve_climate(ctx);
    const auto v = objective_validation(*bundle, ctx.grid, ctx.backend, ctx.modes, model,
                                        objective_designs, vseed + 1);
    write_objective_validation(ctx.out_dir.string(), v, ctx.stamp());
    summary["objective_p99_abs_error"] = v.p99_abs_error;
    summary["oracle_interdecile"] = v.oracle_interdecile;
  }
  write_json_artifact(ctx, "validate_sm.json", summary);
  if (!pass) {
    std::cerr << "validate-sm: bundle exceeds tolerance (mean > " << mean_tol << " or max > "
              << max_tol << ")\n";
    return 1;
  }
  return 0;
}

int cmd_simulate(const Context& ctx) {
  if (!ctx.config.contains("simulate")) throw UsageError("simulate requires a simulate block");
  const auto& s = ctx.config["simulate"];
  hydro::WecGeometry geom{s["geom"].value("radius", 2.0), s["geom"].value("slenderness", 1.0)};
  FarmLayout layout;
  for (const auto& row : s.at("layout")) {
    layout.x.push_back(row.at(0).get<double>());
    layout.y.push_back(row.at(1).get<double>());
  }
  const std::size_t n = layout.size();
  farm::ControlParams control;
  {
    const auto& c = s.at("control");
    const std::string mode = c.value("mode", "farm");
    if (mode == "farm") {
      control = farm::ControlParams::farm_level(c.value("k_pto", -5e3), c.value("b_pto", 5e5), n);
    } else {
      control = farm::ControlParams::device_level(c.at("k_pto").get<std::vector<double>>(),
                                                  c.at("b_pto").get<std::vector<double>>());
    }
  }
  const auto model = resolve_climate(ctx);
  const std::string source_name = s.value("source", "oracle");
  std::unique_ptr<mbe::PairSource> source;
  std::optional<surrogate::SurrogatePairSource> sm_source;
  if (source_name == "surrogate") {
    const auto bundle = maybe_bundle(ctx);
    if (!bundle) throw UsageError("simulate.source=surrogate requires surrogate.bundle");
    sm_source.emplace(*bundle, ctx.grid);
  } else if (source_name != "oracle") {
    throw UsageError("simulate.source must be oracle or surrogate");
  }
  if (!sm_source) source = mbe::make_oracle_source(ctx.grid, ctx.backend, ctx.modes);
  mbe::PairSource& src = sm_source ? static_cast<mbe::PairSource&>(*sm_source) : *source;

  farm::PowerConfig power;
  if (ctx.config.contains("problem") && ctx.config["problem"].contains("p_lim_w") &&
      !ctx.config["problem"]["p_lim_w"].is_null())
    power.p_lim = ctx.config["problem"]["p_lim_w"].get<double>();

  const HydroTable table = mbe::compose_farm(geom, layout, src);
  const farm::SpectrumTable spectrum = farm::build_spectrum_table(model, ctx.grid);
  const farm::FarmEvaluation ev =
      farm::evaluate_farm(geom, control, table, model, spectrum, power);

  // isolated-device run for the q factor
  double q = 1.0;
  if (n > 1) {
    auto iso_source = mbe::make_oracle_source(ctx.grid, ctx.backend, ctx.modes);
    mbe::PairSource& iso_src = sm_source ? static_cast<mbe::PairSource&>(*sm_source) : *iso_source;
    const HydroTable iso_table = mbe::compose_farm(geom, FarmLayout::single(), iso_src);
    const farm::FarmEvaluation iso_ev = farm::evaluate_farm(
        geom, farm::ControlParams::farm_level(control.k_pto[0], control.b_pto[0], 1), iso_table,
        model, spectrum, power);
    if (iso_ev.p_a != 0.0) q = farm::q_factor(ev.p_a, iso_ev.p_a, n);
  }

  {
    auto f = open_csv(ctx, "node_power.csv");
    f << "hs,tp,year,p_i_watts,saturated\n";
    for (std::size_t y = 0; y < model.n_years(); ++y)
      for (std::size_t node = 0; node < spectrum.n_nodes; ++node) {
        const bool sat = power.p_lim && ev.node_power[node] >= *power.p_lim;
        f << spectrum.hs[node] << ',' << spectrum.tp[node] << ',' << model.years[y] << ','
          << ev.node_power[node] << ',' << (sat ? "true" : "false") << '\n';
      }
  }
  hydro::write_hydro_table_csv((ctx.out_dir / "hydro_table.csv").string(), table);
  write_json_artifact(ctx, "simulate_result.json",
                      json{{"p_a_watts", ev.p_a},
                           {"p_v_watts_per_m3", ev.p_v},
                           {"q_factor", q},
                           {"n_wec", n},
                           {"saturated_nodes", ev.saturated_nodes},
                           {"skipped_frequencies", ev.skipped_frequencies},
                           {"extrapolation_warnings", src.extrapolation_count()},
                           {"source", source_name}});
  return 0;
}

opt::ProblemSpec case_or_config_problem(const Context& ctx, const std::string& case_flag) {
  std::string case_id = case_flag;
  if (case_id.empty() && ctx.config.contains("problem"))
    case_id = ctx.config["problem"].value("case", "");
  opt::ProblemSpec spec = problem_from_config(ctx);
  if (!case_id.empty()) {
    opt::CaseStudyConfig cc;
    cc.n_wec = spec.n_wec;
    cc.p_lim = spec.power.p_lim;
    // reuse the case presets for variable selection
    const opt::CaseId id = opt::case_from_string(case_id);
    opt::ProblemSpec preset;
    switch (id) {
      case opt::CaseId::I:
        preset.n_wec = 1;
        preset.optimize_plant = true;
        preset.optimize_control = false;
        preset.optimize_layout = false;
        preset.frozen_k_pto = -0.5e3;
        preset.frozen_b_pto = 500e3;
        preset.frozen_layout = FarmLayout::single();
        break;
      case opt::CaseId::II:
        preset.n_wec = spec.n_wec;
        preset.optimize_plant = false;
        preset.optimize_control = false;
        preset.optimize_layout = true;
        preset.frozen_geom = {2.0, 1.0};
        preset.frozen_k_pto = -5e3;
        preset.frozen_b_pto = 500e3;
        break;
      case opt::CaseId::III:
        preset.n_wec = spec.n_wec;
        preset.optimize_plant = true;
        preset.optimize_control = false;
        preset.optimize_layout = true;
        preset.frozen_k_pto = -5e3;
        preset.frozen_b_pto = 500e3;
        break;
      case opt::CaseId::IV:
        preset.n_wec = spec.n_wec;
        break;
      case opt::CaseId::V:
        preset.n_wec = spec.n_wec;
        preset.control_mode = farm::ControlMode::device_level;
        break;
      case opt::CaseId::VI:
        preset.n_wec = 25;
        break;
    }
    preset.power = spec.power;
    preset.control_mode =
        id == opt::CaseId::V ? farm::ControlMode::device_level : preset.control_mode;
    spec = preset;
  }
  return spec;
}

int cmd_optimize(const Context& ctx, const std::string& case_flag) {
  const opt::ProblemSpec spec = case_or_config_problem(ctx, case_flag);
  const auto model = resolve_climate(ctx);
  auto oracle = mbe::make_oracle_source(ctx.grid, ctx.backend, ctx.modes);
  opt::Evaluator oracle_eval(spec, *oracle, model);
  const opt::GaOptions ga = ga_from_config(ctx);
  const opt::RefineOptions refine = refine_from_config(ctx);

  opt::OptResult final_result;
  json stages;
  const auto bundle = maybe_bundle(ctx);
  if (bundle) {
    surrogate::SurrogatePairSource sm_source(*bundle, ctx.grid);
    opt::Evaluator sm_eval(spec, sm_source, model);
    const opt::HybridResult h = opt::hybrid(sm_eval, oracle_eval, ga, refine);
    final_result = h.refined_stage;
    stages = json{{"ga_surrogate_pv", h.global_stage.p_v},
                  {"ga_oracle_pv", h.start_pv_oracle},
                  {"ga_evaluations", h.global_stage.evaluations},
                  {"refine_evaluations", h.refined_stage.evaluations}};
  } else {
    const opt::OptResult g = opt::ga_search(oracle_eval, ga);
    final_result = opt::gradient_refine(g.best, oracle_eval, refine);
    stages = json{{"ga_oracle_pv", g.p_v},
                  {"ga_evaluations", g.evaluations},
                  {"refine_evaluations", final_result.evaluations}};
  }

  const opt::Candidate c = opt::decode(spec, final_result.best);
  {
    auto f = open_csv(ctx, "layout.csv");
    f << "wec,x_m,y_m\n";
    for (std::size_t p = 0; p < c.layout.size(); ++p)
      f << p + 1 << ',' << c.layout.x[p] << ',' << c.layout.y[p] << '\n';
  }
  write_json_artifact(
      ctx, "optimize_result.json",
      json{{"problem", problem_to_json(spec)},
           {"design", std::vector<double>(final_result.best.data(),
                                          final_result.best.data() + final_result.best.size())},
           {"p_v_watts_per_m3", final_result.p_v},
           {"feasible", final_result.feasible},
           {"max_violation", opt::violation(final_result.residuals)},
           {"radius", c.geom.radius},
           {"slenderness", c.geom.slenderness},
           {"k_pto", c.control.k_pto},
           {"b_pto", c.control.b_pto},
           {"stages", stages},
           {"history", final_result.history}});
  return 0;
}

int cmd_case_study(const Context& ctx, const std::string& case_flag) {
  std::string case_id = case_flag;
  if (case_id.empty() && ctx.config.contains("problem"))
    case_id = ctx.config["problem"].value("case", "");
  if (case_id.empty()) throw UsageError("case-study requires --case or problem.case");
  opt::CaseStudyConfig cfg;
  cfg.backend = ctx.backend;
  cfg.modes = ctx.modes;
  cfg.grid = ctx.grid;
  cfg.climate = resolve_climate(ctx);
  cfg.seed = ctx.seed;
  cfg.ga = ga_from_config(ctx);
  cfg.refine = refine_from_config(ctx);
  if (ctx.config.contains("problem")) {
    const auto& p = ctx.config["problem"];
    cfg.n_wec = p.value("n_wec", 5);
    if (p.contains("p_lim_w") && !p["p_lim_w"].is_null())
      cfg.p_lim = p["p_lim_w"].get<double>();
  }
  const auto bundle = maybe_bundle(ctx);
  std::optional<surrogate::SurrogatePairSource> sm_source;
  if (bundle) {
    sm_source.emplace(*bundle, ctx.grid);
    cfg.surrogate_source = &*sm_source;
  }
  const opt::CaseId id = opt::case_from_string(case_id);
  const opt::CaseStudyResult result = opt::case_study(id, cfg);

  json entries = json::array();
  {
    auto f = open_csv(ctx, "case_" + opt::to_string(id) + ".csv");
    f << "label,p_lim_w,radius,slenderness,p_v,p_a,q,evaluations\n";
    for (const auto& e : result.entries) {
      f << e.label << ',' << (e.p_lim ? std::to_string(*e.p_lim) : "") << ',' << e.geom.radius
        << ',' << e.geom.slenderness << ',' << e.p_v << ',' << e.p_a << ','
        << (e.q ? std::to_string(*e.q) : "") << ',' << e.evaluations << '\n';
      entries.push_back({{"label", e.label},
                         {"p_lim_w", e.p_lim ? json(*e.p_lim) : json(nullptr)},
                         {"radius", e.geom.radius},
                         {"slenderness", e.geom.slenderness},
                         {"p_v", e.p_v},
                         {"p_a", e.p_a},
                         {"q", e.q ? json(*e.q) : json(nullptr)},
                         {"evaluations", e.evaluations},
                         {"layout_x", e.layout_x},
                         {"layout_y", e.layout_y}});
    }
  }
  for (const auto& e : result.entries) {
    auto f = open_csv(ctx, "case_" + opt::to_string(id) + "_" + e.label + "_layout.csv");
    f << "wec,x_m,y_m\n";
    for (std::size_t p = 0; p < e.layout_x.size(); ++p)
      f << p + 1 << ',' << e.layout_x[p] << ',' << e.layout_y[p] << '\n';
  }
  write_json_artifact(ctx, "case_" + opt::to_string(id) + ".json",
                      json{{"case", opt::to_string(id)}, {"entries", entries}});
  return 0;
}

int cmd_perturb(const Context& ctx) {
  if (!ctx.config.contains("perturb")) throw UsageError("perturb requires a perturb block");
  const auto& p = ctx.config["perturb"];
  const std::string result_path = p.value("result", "");
  if (result_path.empty()) throw UsageError("perturb.result must point to an optimize result");
  std::ifstream f(result_path);
  if (!f) throw UsageError("cannot read optimize result: " + result_path);
  json result;
  f >> result;
  const opt::ProblemSpec spec = problem_from_json(result.at("problem"));
  const auto design = result.at("design").get<std::vector<double>>();
  Eigen::VectorXd x =
      Eigen::Map<const Eigen::VectorXd>(design.data(), static_cast<Eigen::Index>(design.size()));

  const auto model = resolve_climate(ctx);
  auto oracle = mbe::make_oracle_source(ctx.grid, ctx.backend, ctx.modes);
  opt::Evaluator evaluator(spec, *oracle, model);
  const std::size_t wec = p.value("wec", 2);
  const double radius = p.value("radius", 5.0);
  const std::size_t n = p.value("n", 200);
  const std::uint64_t seed = p.value("seed", ctx.seed + 31);
  const auto rows = opt::perturb_sensitivity(x, wec, radius, n, seed, evaluator);
  auto csv = open_csv(ctx, "perturb_wec" + std::to_string(wec) + ".csv");
  csv << "dx,dy,p_v,feasible\n";
  for (const auto& r : rows)
    csv << r.dx << ',' << r.dy << ',' << (r.feasible ? std::to_string(r.p_v) : "") << ','
        << (r.feasible ? "true" : "false") << '\n';
  return 0;
}

}  // namespace

std::vector<SmValidationRow> validate_bundle(const surrogate::Bundle& bundle,
                                             const hydro::FrequencyGrid& grid,
                                             hydro::Backend backend, int modes,
                                             std::size_t n_points, std::uint64_t seed) {
  std::vector<SmValidationRow> rows;
  const auto eval_cluster = [&](const std::vector<std::string>& qois,
                                const surrogate::UnitSampler& sampler, std::size_t dim,
                                bool two_body) {
    Rng rng(seed + (two_body ? 1 : 0));
    Eigen::MatrixXd inputs(static_cast<Eigen::Index>(n_points), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < n_points; ++r) {
      Eigen::VectorXd u(static_cast<Eigen::Index>(dim));
      for (std::size_t c = 0; c < dim; ++c) u(static_cast<Eigen::Index>(c)) = rng.uniform();
      inputs.row(static_cast<Eigen::Index>(r)) = sampler(u).transpose();
    }
    // oracle targets for every qoi in the cluster come from one solve per point
    std::vector<Eigen::MatrixXd> targets(qois.size());
    for (auto& t : targets)
      t.resize(static_cast<Eigen::Index>(n_points), static_cast<Eigen::Index>(grid.size()));
    parallel_for(n_points, [&](std::size_t r) {
      const hydro::WecGeometry geom{inputs(static_cast<Eigen::Index>(r), 0),
                                    inputs(static_cast<Eigen::Index>(r), 1)};
      const auto ev = hydro::eval_single(geom, grid, backend, modes);
      auto fill = [&](std::size_t qi, const std::vector<double>& col) {
        targets[qi].row(static_cast<Eigen::Index>(r)) =
            Eigen::Map<const Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(col.size()))
                .transpose();
      };
      if (!two_body) {
        fill(0, ev.iso.a_tilde);
        fill(1, ev.iso.b_tilde);
        fill(2, ev.iso.fe_re);
        fill(3, ev.iso.fe_im);
      } else {
        const auto pair = hydro::pair_from_single(ev, grid, inputs(static_cast<Eigen::Index>(r), 2),
                                                  inputs(static_cast<Eigen::Index>(r), 3));
        fill(0, pair.a11);
        fill(1, pair.a12);
        fill(2, pair.b11);
        fill(3, pair.b12);
        fill(4, pair.fe1_re);
        fill(5, pair.fe1_im);
      }
    });
    for (std::size_t qi = 0; qi < qois.size(); ++qi) {
      const surrogate::Prediction p = surrogate::predict(bundle.find(qois[qi]), inputs);
      SmValidationRow row;
      row.qoi = qois[qi];
      row.n_points = n_points;
      double mean = 0.0, worst = 0.0;
      for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
        const double mse = (p.mean.row(r) - targets[qi].row(r)).array().square().mean();
        mean += mse;
        worst = std::max(worst, mse);
      }
      row.mean_mse = mean / static_cast<double>(n_points);
      row.max_mse = worst;
      rows.push_back(row);
    }
  };
  eval_cluster(surrogate::one_body_qois(), surrogate::one_body_sampler(), 2, false);
  eval_cluster(surrogate::two_body_qois(), surrogate::two_body_sampler(), 4, true);
  return rows;
}

ObjectiveValidation objective_validation(const surrogate::Bundle& bundle,
                                         const hydro::FrequencyGrid& grid,
                                         hydro::Backend backend, int modes,
                                         const climate::ClimateModel& climate, std::size_t n,
                                         std::uint64_t seed) {
  ObjectiveValidation v;
  if (n == 0) return v;
  opt::ProblemSpec spec;
  spec.n_wec = 5;
  spec.optimize_plant = true;
  spec.optimize_control = true;
  spec.optimize_layout = true;
  spec.control_mode = farm::ControlMode::farm_level;

  auto oracle = mbe::make_oracle_source(grid, backend, modes);
  surrogate::SurrogatePairSource sm_source(bundle, grid);
  opt::Evaluator oracle_eval(spec, *oracle, climate);
  opt::Evaluator sm_eval(spec, sm_source, climate);

  Rng rng(seed);
  std::vector<Eigen::VectorXd> designs;
  designs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) designs.push_back(opt::random_feasible(spec, rng));
  v.oracle_pv.resize(n);
  v.surrogate_pv.resize(n);
  parallel_for(n, [&](std::size_t i) {
    v.oracle_pv[i] = oracle_eval.evaluate(designs[i]).p_v;
    v.surrogate_pv[i] = sm_eval.evaluate(designs[i]).p_v;
  });

  std::vector<double> errs(n);
  for (std::size_t i = 0; i < n; ++i) errs[i] = std::abs(v.surrogate_pv[i] - v.oracle_pv[i]);
  std::sort(errs.begin(), errs.end());
  const std::size_t idx99 = static_cast<std::size_t>(
      std::min<double>(static_cast<double>(n) - 1.0, std::ceil(0.99 * static_cast<double>(n)) - 1.0));
  v.p99_abs_error = errs[idx99];

  std::vector<double> sorted = v.oracle_pv;
  std::sort(sorted.begin(), sorted.end());
  auto pct = [&](double q) {
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t i0 = static_cast<std::size_t>(pos);
    const double t = pos - static_cast<double>(i0);
    return i0 + 1 < n ? (1 - t) * sorted[i0] + t * sorted[i0 + 1] : sorted[i0];
  };
  v.oracle_interdecile = pct(0.9) - pct(0.1);
  return v;
}

void write_objective_validation(const std::string& dir, const ObjectiveValidation& v,
                                const std::string& stamp) {
  {
    std::ofstream f(fs::path(dir) / "objective_scatter.csv");
    f << "# " << stamp << "\n";
    f.precision(12);
    f << "oracle_pv,surrogate_pv\n";
    for (std::size_t i = 0; i < v.oracle_pv.size(); ++i)
      f << v.oracle_pv[i] << ',' << v.surrogate_pv[i] << '\n';
  }
  {
    std::ofstream f(fs::path(dir) / "objective_error_hist.csv");
    f << "# " << stamp << "\n";
    f.precision(12);
    f << "bin_lo,bin_hi,count\n";
    if (!v.oracle_pv.empty()) {
      std::vector<double> errs(v.oracle_pv.size());
      for (std::size_t i = 0; i < errs.size(); ++i)
        errs[i] = std::abs(v.surrogate_pv[i] - v.oracle_pv[i]);
      const double hi = *std::max_element(errs.begin(), errs.end());
      const std::size_t bins = 30;
      const double width = hi > 0 ? hi / static_cast<double>(bins) : 1.0;
      std::vector<std::size_t> counts(bins, 0);
      for (double e : errs)
        ++counts[std::min(bins - 1, static_cast<std::size_t>(e / width))];
      for (std::size_t b = 0; b < bins; ++b)
        f << width * static_cast<double>(b) << ',' << width * static_cast<double>(b + 1) << ','
          << counts[b] << '\n';
    }
  }
}

int run(int argc, const char* const* argv) {
  CLI::App app{
      "wecfarm: frequency-domain WEC farm simulation, committee-surrogate training, and "
      "hybrid farm optimization.\nWorker parallelism is capped by the WECFARM_THREADS "
      "environment variable."};
  app.require_subcommand(1);

  std::string config_path, out_dir, case_flag;
  std::optional<std::uint64_t> seed_override;
  bool verbose = false;
  app.add_option("--config,-c", config_path, "JSON config file")->required();
  app.add_option("--out,-o", out_dir, "output directory (default: config output_dir or ./out)");
  std::uint64_t seed_raw = 0;
  auto* seed_opt = app.add_option("--seed,-s", seed_raw, "override the config seed");
  app.add_flag("--verbose,-v", verbose, "log progress to stderr");

  auto* c_fit = app.add_subcommand("climate-fit", "fit a climate model from a samples CSV");
  auto* c_synth = app.add_subcommand("synth-climate", "draw synthetic (Hs, Tp) samples");
  auto* c_train = app.add_subcommand("train", "train the committee surrogates (QBC)");
  auto* c_val = app.add_subcommand("validate-sm", "score a trained bundle against the oracle");
  auto* c_sim = app.add_subcommand("simulate", "evaluate one farm configuration");
  auto* c_opt = app.add_subcommand("optimize", "run the hybrid (or oracle-only) optimization");
  auto* c_case = app.add_subcommand("case-study", "run one of the case studies I..VI");
  auto* c_pert = app.add_subcommand("perturb", "perturb one WEC of an optimized layout");
  c_opt->add_option("--case", case_flag, "case study preset for the variable set (I..VI)");
  c_case->add_option("--case", case_flag, "case study id (I..VI)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (seed_opt->count() > 0) seed_override = seed_raw;
    const Context ctx = make_context(config_path, out_dir, seed_override, verbose);
    if (c_fit->parsed()) return cmd_climate_fit(ctx);
    if (c_synth->parsed()) return cmd_synth_climate(ctx);
    if (c_train->parsed()) return cmd_train(ctx);
    if (c_val->parsed()) return cmd_validate_sm(ctx);
    if (c_sim->parsed()) return cmd_simulate(ctx);
    if (c_opt->parsed()) return cmd_optimize(ctx, case_flag);
    if (c_case->parsed()) return cmd_case_study(ctx, case_flag);
    if (c_pert->parsed()) return cmd_perturb(ctx);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace wecfarm::cli
