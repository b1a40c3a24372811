#include "wecfarm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wecfarm::opt {

using Eigen::VectorXd;

double farm_box_half_width(std::size_t n_wec) {
  return 0.5 * std::sqrt(2.0 * static_cast<double>(n_wec) * 1e4);
}

std::size_t ProblemSpec::n_vars() const {
  std::size_t n = 0;
  if (optimize_plant) n += 2;
  if (optimize_control) n += control_mode == ControlMode::farm_level ? 2 : 2 * n_wec;
  if (optimize_layout) n += 2 * (n_wec - 1);
  return n;
}

void ProblemSpec::bounds(VectorXd& lo, VectorXd& hi) const {
  const std::size_t n = n_vars();
  lo.resize(static_cast<Eigen::Index>(n));
  hi.resize(static_cast<Eigen::Index>(n));
  Eigen::Index i = 0;
  if (optimize_plant) {
    lo(i) = geom_bounds.r_lo;
    hi(i++) = geom_bounds.r_hi;
    lo(i) = geom_bounds.rd_lo;
    hi(i++) = geom_bounds.rd_hi;
  }
  if (optimize_control) {
    const std::size_t reps = control_mode == ControlMode::farm_level ? 1 : n_wec;
    for (std::size_t r = 0; r < reps; ++r) {
      lo(i) = control_bounds.k_lo;
      hi(i++) = control_bounds.k_hi;
      lo(i) = control_bounds.b_lo;
      hi(i++) = control_bounds.b_hi;
    }
  }
  if (optimize_layout) {
    const double half = box_half_width();
    for (std::size_t p = 1; p < n_wec; ++p) {
      lo(i) = 0.0;  // x in [0, half]
      hi(i++) = half;
      lo(i) = -half;
      hi(i++) = half;
    }
  }
}

Candidate decode(const ProblemSpec& spec, const VectorXd& x) {
  require(static_cast<std::size_t>(x.size()) == spec.n_vars(), "decode: wrong design length");
  Candidate c;
  Eigen::Index i = 0;
  if (spec.optimize_plant) {
    c.geom.radius = x(i++);
    c.geom.slenderness = x(i++);
  } else {
    c.geom = spec.frozen_geom;
  }
  if (spec.optimize_control) {
    if (spec.control_mode == ControlMode::farm_level) {
      const double k = x(i++), b = x(i++);
      c.control = ControlParams::farm_level(k, b, spec.n_wec);
    } else {
      std::vector<double> k(spec.n_wec), b(spec.n_wec);
      for (std::size_t p = 0; p < spec.n_wec; ++p) {
        k[p] = x(i++);
        b[p] = x(i++);
      }
      c.control = ControlParams::device_level(std::move(k), std::move(b));
    }
  } else {
    c.control = ControlParams::farm_level(spec.frozen_k_pto, spec.frozen_b_pto, spec.n_wec);
  }
  if (spec.optimize_layout) {
    c.layout.x.assign(1, 0.0);  // first WEC pinned to the origin
    c.layout.y.assign(1, 0.0);
    for (std::size_t p = 1; p < spec.n_wec; ++p) {
      c.layout.x.push_back(x(i++));
      c.layout.y.push_back(x(i++));
    }
  } else if (spec.frozen_layout.size() == spec.n_wec) {
    c.layout = spec.frozen_layout;
  } else {
    // default frozen layout: a column along y with safe spacing
    c.layout.x.assign(spec.n_wec, 0.0);
    c.layout.y.resize(spec.n_wec);
    const double gap = 2.0 * c.geom.radius + 10.0 + 5.0;
    for (std::size_t p = 0; p < spec.n_wec; ++p)
      c.layout.y[p] = static_cast<double>(p) * gap;
  }
  return c;
}

std::vector<double> constraints(const FarmLayout& layout, double radius,
                                const ProblemSpec& spec) {
  std::vector<double> res;
  const std::size_t n = layout.size();
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) {
      const double l = std::hypot(layout.x[q] - layout.x[p], layout.y[q] - layout.y[p]);
      res.push_back(2.0 * radius + spec.safety_distance - l);
    }
  const double half = spec.box_half_width();
  for (std::size_t p = 0; p < n; ++p) {
    res.push_back(-layout.x[p]);          // x >= 0
    res.push_back(layout.x[p] - half);    // x <= half
    res.push_back(std::abs(layout.y[p]) - half);
  }
  return res;
}

double violation(const std::vector<double>& residuals) {
  double v = 0.0;
  for (double r : residuals) v += std::max(0.0, r);
  return v;
}

Evaluator::Evaluator(ProblemSpec spec, mbe::PairSource& source, const ClimateModel& climate)
    : spec_(std::move(spec)), source_(source), climate_(climate) {
  spectrum_ = farm::build_spectrum_table(climate_, source_.grid());
}

EvalOutcome Evaluator::evaluate(const VectorXd& x) const {
  ++evals_;
  const Candidate c = decode(spec_, x);
  EvalOutcome out;
  out.residuals = constraints(c.layout, c.geom.radius, spec_);
  // draft bound residuals when the plant is free
  if (spec_.optimize_plant) {
    const double d = c.geom.draft();
    out.residuals.push_back(spec_.geom_bounds.d_lo - d);
    out.residuals.push_back(d - spec_.geom_bounds.d_hi);
  }
  out.feasible = violation(out.residuals) <= 1e-6;
  const HydroTable table = mbe::compose_farm(c.geom, c.layout, source_);
  const farm::FarmEvaluation ev =
      farm::evaluate_farm(c.geom, c.control, table, climate_, spectrum_, spec_.power,
                          source_.grid().rho, source_.grid().g);
  out.p_v = ev.p_v;
  return out;
}

namespace {

// feasibility-dominance rule: feasible beats infeasible, ties by objective
bool dominates(const EvalOutcome& a, const EvalOutcome& b) {
  const double va = violation(a.residuals), vb = violation(b.residuals);
  const bool fa = va <= 1e-6, fb = vb <= 1e-6;
  if (fa != fb) return fa;
  if (!fa) return va < vb;
  return a.p_v > b.p_v;
}

}  // namespace

OptResult ga_search(const Evaluator& evaluator, const GaOptions& opts) {
  const ProblemSpec& spec = evaluator.spec();
  const std::size_t n_vars = spec.n_vars();
  VectorXd lo, hi;
  spec.bounds(lo, hi);
  const std::size_t pop_size =
      opts.population > 0 ? opts.population : std::min<std::size_t>(20 * n_vars, 400);
  Rng rng(opts.seed);

  auto clip = [&](VectorXd x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::clamp(x(i), lo(i), hi(i));
    return x;
  };
  auto sample = [&]() {
    VectorXd x(static_cast<Eigen::Index>(n_vars));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(lo(i), hi(i));
    return x;
  };

  std::vector<VectorXd> pop(pop_size);
  for (auto& x : pop) {
    // a few rejection tries toward a feasible start; the dominance rule
    // handles the rest
    x = sample();
    for (int t = 0; t < 50; ++t) {
      const Candidate c = decode(spec, x);
      if (violation(constraints(c.layout, c.geom.radius, spec)) <= 1e-6) break;
      x = sample();
    }
  }

  std::vector<EvalOutcome> scores(pop_size);
  auto evaluate_all = [&](const std::vector<VectorXd>& xs, std::vector<EvalOutcome>& out) {
    parallel_for(xs.size(), [&](std::size_t i) { out[i] = evaluator.evaluate(xs[i]); });
  };
  evaluate_all(pop, scores);

  std::size_t best_i = 0;
  for (std::size_t i = 1; i < pop_size; ++i)
    if (dominates(scores[i], scores[best_i])) best_i = i;
  VectorXd best = pop[best_i];
  EvalOutcome best_score = scores[best_i];

  OptResult result;
  result.seed = opts.seed;
  result.history.push_back(best_score.p_v);

  auto tournament = [&]() -> std::size_t {
    const std::size_t a = rng.index(pop_size), b = rng.index(pop_size);
    return dominates(scores[a], scores[b]) ? a : b;
  };

  for (std::size_t gen = 0; gen < opts.generations; ++gen) {
    std::vector<VectorXd> next;
    next.reserve(pop_size);
    next.push_back(best);  // elitism
    while (next.size() < pop_size) {
      const VectorXd& pa = pop[tournament()];
      const VectorXd& pb = pop[tournament()];
      VectorXd child(static_cast<Eigen::Index>(n_vars));
      if (rng.uniform() < opts.crossover_rate) {
        for (Eigen::Index i = 0; i < child.size(); ++i) {
          const double cl = std::min(pa(i), pb(i)), ch = std::max(pa(i), pb(i));
          const double span = ch - cl;
          child(i) = rng.uniform(cl - opts.blend_alpha * span, ch + opts.blend_alpha * span);
        }
      } else {
        child = rng.uniform() < 0.5 ? pa : pb;
      }
      const double p_mut = 1.0 / static_cast<double>(n_vars);
      for (Eigen::Index i = 0; i < child.size(); ++i)
        if (rng.uniform() < p_mut)
          child(i) += opts.mutation_sigma * (hi(i) - lo(i)) * rng.normal();
      next.push_back(clip(std::move(child)));
    }
    pop = std::move(next);
    evaluate_all(pop, scores);
    for (std::size_t i = 0; i < pop_size; ++i)
      if (dominates(scores[i], best_score)) {
        best_score = scores[i];
        best = pop[i];
      }
    result.history.push_back(best_score.p_v);
  }

  if (!best_score.feasible)
    throw std::runtime_error(
        "ga_search: no feasible individual found (violation " +
        std::to_string(violation(best_score.residuals)) + "); enlarge the box or relax spacing");

  result.best = best;
  result.p_v = best_score.p_v;
  result.residuals = best_score.residuals;
  result.feasible = best_score.feasible;
  result.evaluations = evaluator.eval_count();
  return result;
}

namespace {

// push apart pairs that violate the spacing constraint
VectorXd repair_layout(VectorXd x, const ProblemSpec& spec, const VectorXd& lo,
                       const VectorXd& hi) {
  if (!spec.optimize_layout) return x;
  for (int pass = 0; pass < 100; ++pass) {
    Candidate c = decode(spec, x);
    const auto res = constraints(c.layout, c.geom.radius, spec);
    if (violation(res) <= 1e-9) break;
    const double min_l = 2.0 * c.geom.radius + spec.safety_distance;
    Eigen::Index base = static_cast<Eigen::Index>(spec.n_vars() - 2 * (spec.n_wec - 1));
    for (std::size_t p = 0; p < spec.n_wec; ++p)
      for (std::size_t q = p + 1; q < spec.n_wec; ++q) {
        const double dx = c.layout.x[q] - c.layout.x[p];
        const double dy = c.layout.y[q] - c.layout.y[p];
        double l = std::hypot(dx, dy);
        if (l >= min_l) continue;
        double ux = l > 1e-12 ? dx / l : 1.0, uy = l > 1e-12 ? dy / l : 0.0;
        const double push = (min_l - l) * 0.55 + 1e-9;
        // WEC 1 (p == 0) is pinned; move the free endpoints only
        if (p > 0) {
          x(base + 2 * static_cast<Eigen::Index>(p - 1)) -= push * ux;
          x(base + 2 * static_cast<Eigen::Index>(p - 1) + 1) -= push * uy;
        }
        x(base + 2 * static_cast<Eigen::Index>(q - 1)) += push * ux;
        x(base + 2 * static_cast<Eigen::Index>(q - 1) + 1) += push * uy;
        c = decode(spec, x);
      }
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::clamp(x(i), lo(i), hi(i));
  }
  return x;
}

}  // namespace

OptResult gradient_refine(const VectorXd& x0, const Evaluator& evaluator,
                          const RefineOptions& opts) {
  const ProblemSpec& spec = evaluator.spec();
  VectorXd lo, hi;
  spec.bounds(lo, hi);
  VectorXd x = x0;
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::clamp(x(i), lo(i), hi(i));
  x = repair_layout(std::move(x), spec, lo, hi);

  EvalOutcome cur = evaluator.evaluate(x);
  if (!cur.feasible)
    throw std::runtime_error("gradient_refine: start point infeasible and not repairable");

  OptResult result;
  result.seed = 0;
  result.history.push_back(cur.p_v);

  const std::size_t start_evals = evaluator.eval_count();
  double trust = 1.0;
  bool improved_any = false;

  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    if (evaluator.eval_count() - start_evals >= opts.eval_cap) break;
    // central finite differences, shrunk near bounds
    VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double scale = std::max(std::abs(x(i)), 1e-3 * (hi(i) - lo(i)));
      double h = std::max(opts.rel_step * scale, 1e-9);
      const double room = std::min(hi(i) - x(i), x(i) - lo(i));
      if (room > 1e-12) h = std::min(h, room);
      VectorXd xp = x, xm = x;
      xp(i) = std::min(x(i) + h, hi(i));
      xm(i) = std::max(x(i) - h, lo(i));
      const double denom = xp(i) - xm(i);
      g(i) = denom > 0 ? (evaluator.evaluate(xp).p_v - evaluator.evaluate(xm).p_v) / denom : 0.0;
    }
    // project out box-bound components
    VectorXd d = g;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (x(i) >= hi(i) - 1e-12 && d(i) > 0) d(i) = 0;
      if (x(i) <= lo(i) + 1e-12 && d(i) < 0) d(i) = 0;
    }
    // active spacing constraints: remove components that increase violation
    {
      const Candidate c = decode(spec, x);
      std::vector<VectorXd> active;
      if (spec.optimize_layout) {
        const Eigen::Index base =
            static_cast<Eigen::Index>(spec.n_vars() - 2 * (spec.n_wec - 1));
        for (std::size_t p = 0; p < spec.n_wec; ++p)
          for (std::size_t q = p + 1; q < spec.n_wec; ++q) {
            const double dx = c.layout.x[q] - c.layout.x[p];
            const double dy = c.layout.y[q] - c.layout.y[p];
            const double l = std::hypot(dx, dy);
            const double resid = 2.0 * c.geom.radius + spec.safety_distance - l;
            if (resid < -1e-6 * std::max(1.0, l)) continue;
            VectorXd grad = VectorXd::Zero(x.size());
            if (p > 0) {
              grad(base + 2 * static_cast<Eigen::Index>(p - 1)) = dx / l;
              grad(base + 2 * static_cast<Eigen::Index>(p - 1) + 1) = dy / l;
            }
            grad(base + 2 * static_cast<Eigen::Index>(q - 1)) = -dx / l;
            grad(base + 2 * static_cast<Eigen::Index>(q - 1) + 1) = -dy / l;
            if (spec.optimize_plant) grad(0) += 2.0;
            if (grad.dot(d) > 0) active.push_back(grad);
          }
      }
      if (!active.empty()) {
        Eigen::MatrixXd a(static_cast<Eigen::Index>(active.size()), x.size());
        for (std::size_t r = 0; r < active.size(); ++r)
          a.row(static_cast<Eigen::Index>(r)) = active[r].transpose();
        const Eigen::VectorXd lambda =
            a.completeOrthogonalDecomposition().pseudoInverse().transpose() * d;
        d -= a.transpose() * lambda;
      }
    }

    const double dn = d.norm();
    if (dn < 1e-14) break;
    const double x_scale = std::max(1.0, x.norm());
    double step = trust * x_scale / dn;

    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      VectorXd trial = x + step * d;
      for (Eigen::Index i = 0; i < trial.size(); ++i)
        trial(i) = std::clamp(trial(i), lo(i), hi(i));
      const EvalOutcome out = evaluator.evaluate(trial);
      if (out.feasible && out.p_v > cur.p_v) {
        const double moved = (trial - x).norm();
        x = trial;
        const double gain = out.p_v - cur.p_v;
        cur = out;
        result.history.push_back(cur.p_v);
        accepted = true;
        improved_any = true;
        trust = std::min(trust * 2.0, 1.0);
        if (moved < opts.step_tol * (1.0 + x.norm()) ||
            gain < opts.objective_tol * (1.0 + std::abs(cur.p_v))) {
          it = opts.max_iterations;  // converged
        }
        break;
      }
      step *= 0.5;
      if (step * dn < opts.step_tol * (1.0 + x.norm())) break;
    }
    if (!accepted) {
      trust *= 0.25;
      if (trust < 1e-10) break;
    }
  }

  result.best = x;
  result.p_v = cur.p_v;
  result.residuals = cur.residuals;
  result.feasible = cur.feasible;
  result.evaluations = evaluator.eval_count() - start_evals;
  result.stationary = !improved_any;
  return result;
}

HybridResult hybrid(const Evaluator& surrogate_eval, const Evaluator& oracle_eval,
                    const GaOptions& ga_opts, const RefineOptions& refine_opts) {
  HybridResult h;
  h.global_stage = ga_search(surrogate_eval, ga_opts);
  h.start_pv_oracle = oracle_eval.evaluate(h.global_stage.best).p_v;
  h.refined_stage = gradient_refine(h.global_stage.best, oracle_eval, refine_opts);
  if (h.refined_stage.p_v < h.start_pv_oracle) {
    // monotone guarantee: never leave the start point for something worse
    h.refined_stage.best = h.global_stage.best;
    h.refined_stage.p_v = h.start_pv_oracle;
    h.refined_stage.stationary = true;
  }
  return h;
}

Eigen::VectorXd random_feasible(const ProblemSpec& spec, Rng& rng, std::size_t max_tries) {
  VectorXd lo, hi;
  spec.bounds(lo, hi);
  for (std::size_t t = 0; t < max_tries; ++t) {
    VectorXd x(lo.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(lo(i), hi(i));
    const Candidate c = decode(spec, x);
    auto res = constraints(c.layout, c.geom.radius, spec);
    if (spec.optimize_plant) {
      res.push_back(spec.geom_bounds.d_lo - c.geom.draft());
      res.push_back(c.geom.draft() - spec.geom_bounds.d_hi);
    }
    if (violation(res) <= 1e-6) return x;
  }
  throw std::runtime_error("random_feasible: no feasible sample found");
}

std::vector<PerturbRow> perturb_sensitivity(const VectorXd& x, std::size_t wec_index,
                                            double radius, std::size_t n, std::uint64_t seed,
                                            const Evaluator& evaluator) {
  const ProblemSpec& spec = evaluator.spec();
  require(spec.optimize_layout, "perturb_sensitivity: problem has no layout variables");
  require(wec_index >= 1 && wec_index < spec.n_wec,
          "perturb_sensitivity: index must name a free WEC (1..N-1)");
  const Eigen::Index base = static_cast<Eigen::Index>(spec.n_vars() - 2 * (spec.n_wec - 1));
  const Eigen::Index ix = base + 2 * static_cast<Eigen::Index>(wec_index - 1);
  Rng rng(seed);
  std::vector<PerturbRow> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = radius * std::sqrt(rng.uniform());
    const double a = rng.uniform(0.0, 2.0 * M_PI);
    PerturbRow row;
    row.dx = r * std::cos(a);
    row.dy = r * std::sin(a);
    VectorXd trial = x;
    trial(ix) += row.dx;
    trial(ix + 1) += row.dy;
    const Candidate c = decode(spec, trial);
    const auto res = constraints(c.layout, c.geom.radius, spec);
    if (violation(res) > 1e-6) {
      row.feasible = false;  // recorded, not evaluated
    } else {
      row.feasible = true;
      row.p_v = evaluator.evaluate(trial).p_v;
    }
    rows.push_back(row);
  }
  return rows;
}

CaseId case_from_string(const std::string& s) {
  if (s == "I" || s == "1") return CaseId::I;
  if (s == "II" || s == "2") return CaseId::II;
  if (s == "III" || s == "3") return CaseId::III;
  if (s == "IV" || s == "4") return CaseId::IV;
  if (s == "V" || s == "5") return CaseId::V;
  if (s == "VI" || s == "6") return CaseId::VI;
  throw std::invalid_argument("unknown case study id: " + s);
}

std::string to_string(CaseId id) {
  switch (id) {
    case CaseId::I: return "I";
    case CaseId::II: return "II";
    case CaseId::III: return "III";
    case CaseId::IV: return "IV";
    case CaseId::V: return "V";
    default: return "VI";
  }
}

namespace {

ProblemSpec case_problem(CaseId id, const CaseStudyConfig& config) {
  ProblemSpec spec;
  spec.power.p_lim = config.p_lim;
  switch (id) {
    case CaseId::I:
      spec.n_wec = 1;
      spec.optimize_plant = true;
      spec.optimize_control = false;
      spec.optimize_layout = false;
      spec.frozen_k_pto = -0.5e3;
      spec.frozen_b_pto = 500e3;
      spec.frozen_layout = FarmLayout::single();
      break;
    case CaseId::II:
      spec.n_wec = config.n_wec;
      spec.optimize_plant = false;
      spec.optimize_control = false;
      spec.optimize_layout = true;
      spec.frozen_geom = WecGeometry{2.0, 1.0};
      spec.frozen_k_pto = -5e3;
      spec.frozen_b_pto = 500e3;
      break;
    case CaseId::III:
      spec.n_wec = config.n_wec;
      spec.optimize_plant = true;
      spec.optimize_control = false;
      spec.optimize_layout = true;
      spec.frozen_k_pto = -5e3;
      spec.frozen_b_pto = 500e3;
      break;
    case CaseId::IV:
      spec.n_wec = config.n_wec;
      spec.optimize_plant = true;
      spec.optimize_control = true;
      spec.optimize_layout = true;
      spec.control_mode = ControlMode::farm_level;
      break;
    case CaseId::V:
      spec.n_wec = config.n_wec;
      spec.optimize_plant = true;
      spec.optimize_control = true;
      spec.optimize_layout = true;
      spec.control_mode = ControlMode::device_level;
      break;
    case CaseId::VI:
      spec.n_wec = 25;
      spec.optimize_plant = true;
      spec.optimize_control = true;
      spec.optimize_layout = true;
      spec.control_mode = ControlMode::farm_level;
      break;
  }
  return spec;
}

CaseStudyEntry run_case_entry(const ProblemSpec& spec, const CaseStudyConfig& config,
                              const std::string& label) {
  auto oracle = mbe::make_oracle_source(config.grid, config.backend, config.modes);
  Evaluator oracle_eval(spec, *oracle, config.climate);

  OptResult stage;
  double pv = 0.0;
  VectorXd best;
  if (config.surrogate_source) {
    Evaluator sm_eval(spec, *config.surrogate_source, config.climate);
    const HybridResult h = hybrid(sm_eval, oracle_eval, config.ga, config.refine);
    stage = h.refined_stage;
    pv = h.refined_stage.p_v;
    best = h.refined_stage.best;
  } else {
    const OptResult ga = ga_search(oracle_eval, config.ga);
    stage = gradient_refine(ga.best, oracle_eval, config.refine);
    pv = stage.p_v;
    best = stage.best;
  }

  CaseStudyEntry entry;
  entry.label = label;
  entry.p_lim = config.p_lim;
  entry.best = best;
  const Candidate c = decode(spec, best);
  entry.geom = c.geom;
  entry.p_v = pv;
  entry.p_a = pv * M_PI * c.geom.radius * c.geom.radius * c.geom.draft();
  entry.evaluations = stage.evaluations;
  entry.layout_x = c.layout.x;
  entry.layout_y = c.layout.y;

  // q factor against an isolated device with the same plant and control
  if (spec.n_wec > 1) {
    ProblemSpec iso = spec;
    iso.n_wec = 1;
    iso.optimize_plant = false;
    iso.optimize_control = false;
    iso.optimize_layout = false;
    iso.frozen_geom = c.geom;
    iso.frozen_k_pto = c.control.k_pto[0];
    iso.frozen_b_pto = c.control.b_pto[0];
    iso.frozen_layout = FarmLayout::single();
    Evaluator iso_eval(iso, *oracle, config.climate);
    const double iso_pv = iso_eval.evaluate(VectorXd(0)).p_v;
    if (iso_pv != 0.0) {
      const double volume = M_PI * c.geom.radius * c.geom.radius * c.geom.draft();
      entry.q = farm::q_factor(entry.p_a, iso_pv * volume, spec.n_wec);
    }
  }
  return entry;
}

}  // namespace

CaseStudyResult case_study(CaseId id, const CaseStudyConfig& config) {
  CaseStudyResult result;
  result.id = id;
  if (id == CaseId::I) {
    // sweep of power saturation limits [kW]
    const std::vector<double> limits_kw = {1.0, 10.0, 100.0, 1000.0, 1e6};
    for (double lim : limits_kw) {
      CaseStudyConfig cfg = config;
      cfg.p_lim = lim * 1e3;
      ProblemSpec spec = case_problem(id, cfg);
      spec.power.p_lim = cfg.p_lim;
      result.entries.push_back(run_case_entry(spec, cfg, "p_lim_" + std::to_string(lim) + "kW"));
    }
    return result;
  }
  const ProblemSpec spec = case_problem(id, config);
  result.entries.push_back(run_case_entry(spec, config, "case_" + to_string(id)));
  return result;
}

}  // namespace wecfarm::opt
