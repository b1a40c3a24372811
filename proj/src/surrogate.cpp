#include "wecfarm/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace wecfarm::surrogate {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Network::Network(const NetSpec& s, Rng& rng) : spec(s) {
  std::vector<std::size_t> widths;
  widths.push_back(s.input_width);
  for (std::size_t hsz : s.hidden) widths.push_back(hsz);
  widths.push_back(s.output_width);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t fan_in = widths[l], fan_out = widths[l + 1];
    const double scale = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    MatrixXd w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.size(); ++i)
      w.data()[i] = rng.uniform(-scale, scale);
    weights.push_back(std::move(w));
    biases.emplace_back(VectorXd::Zero(static_cast<Eigen::Index>(fan_out)));
  }
}

MatrixXd Network::forward(const MatrixXd& inputs) const {
  MatrixXd h = inputs;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = (h * weights[l].transpose()).rowwise() + biases[l].transpose();
    if (l + 1 < weights.size()) h = h.array().tanh().matrix();
  }
  return h;
}

Dataset Dataset::make(MatrixXd inputs, MatrixXd targets, std::uint64_t seed) {
  require(inputs.rows() == targets.rows() && inputs.rows() > 0, "Dataset: row mismatch");
  Dataset d;
  d.inputs = std::move(inputs);
  d.targets = std::move(targets);
  const std::size_t n = static_cast<std::size_t>(d.inputs.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  d.split.assign(n, 0);
  const std::size_t n_train = static_cast<std::size_t>(std::round(0.70 * static_cast<double>(n)));
  const std::size_t n_val = static_cast<std::size_t>(std::round(0.15 * static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train)
      d.split[order[i]] = 0;
    else if (i < n_train + n_val)
      d.split[order[i]] = 1;
    else
      d.split[order[i]] = 2;
  }
  return d;
}

Committee init_committee(const NetSpec& spec, std::size_t n, std::uint64_t seed,
                         const std::string& qoi) {
  require(n >= 2, "init_committee: need at least 2 members");
  Committee c;
  c.qoi = qoi;
  c.spec = spec;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(fnv1a64(&i, sizeof(i), seed ^ 0x9e3779b97f4a7c15ULL));
    c.members.emplace_back(spec, rng);
  }
  return c;
}

namespace {

struct Adam {
  std::vector<MatrixXd> mw, vw;
  std::vector<VectorXd> mb, vb;
  double lr, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::size_t t = 0;

  explicit Adam(const Network& net, double learning_rate) : lr(learning_rate) {
    for (const auto& w : net.weights) {
      mw.emplace_back(MatrixXd::Zero(w.rows(), w.cols()));
      vw.emplace_back(MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : net.biases) {
      mb.emplace_back(VectorXd::Zero(b.size()));
      vb.emplace_back(VectorXd::Zero(b.size()));
    }
  }

  void step(Network& net, const std::vector<MatrixXd>& gw, const std::vector<VectorXd>& gb) {
    ++t;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t l = 0; l < gw.size(); ++l) {
      mw[l] = b1 * mw[l] + (1.0 - b1) * gw[l];
      vw[l] = (b2 * vw[l].array() + (1.0 - b2) * gw[l].array().square()).matrix();
      net.weights[l].array() -=
          lr * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + eps);
      mb[l] = b1 * mb[l] + (1.0 - b1) * gb[l];
      vb[l] = (b2 * vb[l].array() + (1.0 - b2) * gb[l].array().square()).matrix();
      net.biases[l].array() -= lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
    }
  }
};

double mse_of(const MatrixXd& pred, const MatrixXd& truth) {
  return (pred - truth).array().square().mean();
}

// one Adam pass over a shuffled mini-batch schedule
void train_epoch(Network& net, Adam& opt, const MatrixXd& x, const MatrixXd& y,
                 std::size_t batch, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  const std::size_t n_layers = net.weights.size();
  for (std::size_t start = 0; start < n; start += batch) {
    const std::size_t count = std::min(batch, n - start);
    MatrixXd xb(count, x.cols()), yb(count, y.cols());
    for (std::size_t i = 0; i < count; ++i) {
      xb.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(order[start + i]));
      yb.row(static_cast<Eigen::Index>(i)) = y.row(static_cast<Eigen::Index>(order[start + i]));
    }
    // forward with cached activations
    std::vector<MatrixXd> acts;  // acts[0] = input, acts[l+1] = layer output
    acts.reserve(n_layers + 1);
    acts.push_back(xb);
    for (std::size_t l = 0; l < n_layers; ++l) {
      MatrixXd z = (acts.back() * net.weights[l].transpose()).rowwise() +
                   net.biases[l].transpose();
      if (l + 1 < n_layers) z = z.array().tanh().matrix();
      acts.push_back(std::move(z));
    }
    // backward, MSE scaled by 2/(count*out)
    MatrixXd delta = (acts.back() - yb) *
                     (2.0 / static_cast<double>(count * static_cast<std::size_t>(yb.cols())));
    if (!delta.allFinite())
      throw std::runtime_error("train: loss diverged (non-finite gradients)");
    std::vector<MatrixXd> gw(n_layers);
    std::vector<VectorXd> gb(n_layers);
    for (std::size_t l = n_layers; l-- > 0;) {
      gw[l] = delta.transpose() * acts[l];
      gb[l] = delta.colwise().sum().transpose();
      if (l > 0) {
        delta = (delta * net.weights[l]).array() * (1.0 - acts[l].array().square());
      }
    }
    opt.step(net, gw, gb);
  }
}

std::vector<std::size_t> rows_with_split(const Dataset& data, int tag) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < data.split.size(); ++i)
    if (data.split[i] == tag) idx.push_back(i);
  return idx;
}

MatrixXd take_rows(const MatrixXd& m, const std::vector<std::size_t>& idx) {
  MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

}  // namespace

TrainMetrics train(Committee& committee, const Dataset& data, const TrainOptions& opts) {
  TrainMetrics metrics;
  require(data.size() > 0, "train: empty dataset");
  if (opts.epochs == 0) {
    metrics.member_val_mse.assign(committee.members.size(), 0.0);
    return metrics;
  }

  const auto train_idx = rows_with_split(data, 0);
  const auto val_idx = rows_with_split(data, 1);
  const auto test_idx = rows_with_split(data, 2);
  require(!train_idx.empty(), "train: empty training split");

  const MatrixXd x_train = take_rows(data.inputs, train_idx);
  const MatrixXd y_train = take_rows(data.targets, train_idx);

  // scaling statistics from the training split
  committee.in_mean = x_train.colwise().mean();
  committee.out_mean = y_train.colwise().mean();
  auto col_std = [](const MatrixXd& m, const VectorXd& mean) {
    VectorXd sd(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double var = (m.col(c).array() - mean(c)).square().mean();
      sd(c) = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    return sd;
  };
  committee.in_std = col_std(x_train, committee.in_mean);
  committee.out_std = col_std(y_train, committee.out_mean);
  committee.box_lo = data.inputs.colwise().minCoeff();
  committee.box_hi = data.inputs.colwise().maxCoeff();

  auto scale_in = [&](const MatrixXd& m) {
    return ((m.rowwise() - committee.in_mean.transpose()).array().rowwise() /
            committee.in_std.transpose().array())
        .matrix();
  };
  auto scale_out = [&](const MatrixXd& m) {
    return ((m.rowwise() - committee.out_mean.transpose()).array().rowwise() /
            committee.out_std.transpose().array())
        .matrix();
  };

  const MatrixXd xs = scale_in(x_train);
  const MatrixXd ys = scale_out(y_train);
  const MatrixXd xv = val_idx.empty() ? MatrixXd() : scale_in(take_rows(data.inputs, val_idx));
  const MatrixXd yv = val_idx.empty() ? MatrixXd() : scale_out(take_rows(data.targets, val_idx));

  metrics.member_val_mse.assign(committee.members.size(), 0.0);
  const std::size_t n_sub = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(opts.subsample * static_cast<double>(xs.rows()))));

  parallel_for(committee.members.size(), [&](std::size_t m) {
    Rng rng(fnv1a64(&m, sizeof(m), opts.seed ^ 0xa5a5a5a55a5a5a5aULL));
    const auto sub = rng.sample_without_replacement(static_cast<std::size_t>(xs.rows()), n_sub);
    const MatrixXd xm = take_rows(xs, sub);
    const MatrixXd ym = take_rows(ys, sub);
    Network& net = committee.members[m];
    Adam opt(net, opts.learning_rate);
    Network best = net;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    const std::size_t check_every = 5;
    for (std::size_t e = 0; e < opts.epochs; ++e) {
      train_epoch(net, opt, xm, ym, opts.batch, rng);
      if ((e + 1) % check_every == 0 || e + 1 == opts.epochs) {
        const double val = xv.rows() > 0 ? mse_of(net.forward(xv), yv)
                                         : mse_of(net.forward(xm), ym);
        if (!std::isfinite(val)) throw std::runtime_error("train: validation loss is NaN");
        if (val < best_val * (1.0 - 1e-4)) {
          best_val = val;
          best = net;
          stale = 0;
        } else if (++stale >= opts.patience) {
          break;
        }
      }
    }
    net = best;
    metrics.member_val_mse[m] = best_val;
  });
  committee.trained = true;

  if (!test_idx.empty()) {
    const Prediction p = predict(committee, take_rows(data.inputs, test_idx));
    metrics.committee_test_mse = mse_of(p.mean, take_rows(data.targets, test_idx));
  }
  return metrics;
}

Prediction predict(const Committee& committee, const MatrixXd& inputs) {
  require(committee.trained, "predict: committee not trained");
  require(inputs.cols() == static_cast<Eigen::Index>(committee.spec.input_width),
          "predict: input width mismatch");
  Prediction out;
  const MatrixXd xs = ((inputs.rowwise() - committee.in_mean.transpose()).array().rowwise() /
                       committee.in_std.transpose().array())
                          .matrix();
  const std::size_t n_members = committee.members.size();
  out.mean = MatrixXd::Zero(inputs.rows(), static_cast<Eigen::Index>(committee.spec.output_width));
  MatrixXd sq = out.mean;
  for (const Network& net : committee.members) {
    MatrixXd y = net.forward(xs);
    // back to physics-normalized space
    y = ((y.array().rowwise() * committee.out_std.transpose().array()).rowwise() +
         committee.out_mean.transpose().array())
            .matrix();
    out.mean += y;
    sq += y.array().square().matrix();
  }
  out.mean /= static_cast<double>(n_members);
  out.variance =
      (sq / static_cast<double>(n_members) - out.mean.array().square().matrix()).cwiseMax(0.0);
  out.ranking_variance = out.variance.rowwise().mean();
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
    bool outside = false;
    for (Eigen::Index c = 0; c < inputs.cols(); ++c)
      if (inputs(r, c) < committee.box_lo(c) - 1e-12 ||
          inputs(r, c) > committee.box_hi(c) + 1e-12)
        outside = true;
    if (outside) ++out.extrapolated;
  }
  return out;
}

MatrixXd kmeans(const MatrixXd& points, std::size_t k, std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(points.rows());
  require(k >= 1 && k <= n, "kmeans: need 1 <= k <= n_points");
  Rng rng(seed);
  const auto init = rng.sample_without_replacement(n, k);
  MatrixXd centroids(static_cast<Eigen::Index>(k), points.cols());
  for (std::size_t c = 0; c < k; ++c)
    centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(init[c]));

  std::vector<std::size_t> assign(n, 0), prev(n, SIZE_MAX);
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d2 = (points.row(static_cast<Eigen::Index>(i)) -
                           centroids.row(static_cast<Eigen::Index>(c)))
                              .squaredNorm();
        if (d2 < best) {
          best = d2;
          assign[i] = c;
        }
      }
    }
    if (assign == prev) break;
    prev = assign;
    MatrixXd sums = MatrixXd::Zero(static_cast<Eigen::Index>(k), points.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(assign[i])) += points.row(static_cast<Eigen::Index>(i));
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // re-seed an emptied cluster at a random point
        centroids.row(static_cast<Eigen::Index>(c)) =
            points.row(static_cast<Eigen::Index>(rng.index(n)));
      } else {
        centroids.row(static_cast<Eigen::Index>(c)) =
            sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
      }
    }
  }
  return centroids;
}

namespace {

// targets for a list of inputs, dropping rows where the oracle fails
void evaluate_oracle(const OracleFn& oracle, const MatrixXd& inputs, MatrixXd& ok_inputs,
                     MatrixXd& ok_targets, std::size_t out_width, std::size_t& failures) {
  std::vector<Eigen::Index> kept;
  MatrixXd targets(inputs.rows(), static_cast<Eigen::Index>(out_width));
  std::vector<char> good(static_cast<std::size_t>(inputs.rows()), 0);
  parallel_for(static_cast<std::size_t>(inputs.rows()), [&](std::size_t r) {
    try {
      targets.row(static_cast<Eigen::Index>(r)) =
          oracle(inputs.row(static_cast<Eigen::Index>(r)).transpose()).transpose();
      good[r] = 1;
    } catch (const std::exception&) {
      good[r] = 0;
    }
  });
  for (Eigen::Index r = 0; r < inputs.rows(); ++r)
    if (good[static_cast<std::size_t>(r)]) kept.push_back(r);
  failures += static_cast<std::size_t>(inputs.rows()) - kept.size();
  ok_inputs.resize(static_cast<Eigen::Index>(kept.size()), inputs.cols());
  ok_targets.resize(static_cast<Eigen::Index>(kept.size()), targets.cols());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    ok_inputs.row(static_cast<Eigen::Index>(i)) = inputs.row(kept[i]);
    ok_targets.row(static_cast<Eigen::Index>(i)) = targets.row(kept[i]);
  }
}

// Latin hypercube on the unit cube
MatrixXd latin_hypercube(std::size_t n, std::size_t d, Rng& rng) {
  MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    for (std::size_t r = 0; r < n; ++r)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          (static_cast<double>(perm[r]) + rng.uniform()) / static_cast<double>(n);
  }
  return out;
}

double point_mse_max(const Committee& committee, const Dataset& data) {
  const Prediction p = predict(committee, data.inputs);
  double worst = 0.0;
  for (Eigen::Index r = 0; r < data.inputs.rows(); ++r) {
    const double mse = (p.mean.row(r) - data.targets.row(r)).array().square().mean();
    worst = std::max(worst, mse);
  }
  return worst;
}

}  // namespace

QbcResult qbc_run(const std::string& qoi, const OracleFn& oracle, const UnitSampler& sampler,
                  std::size_t input_width, const QbcConfig& config) {
  require(config.pool_size * static_cast<std::size_t>(config.top_fraction * 100) / 100 >=
              config.n_batch,
          "qbc_run: top fraction of the pool is smaller than the batch size");
  Rng rng(config.seed);
  const std::size_t d = input_width;

  // initial measured set: corner points plus space-filling interior points
  const std::size_t n_corners = std::size_t{1} << d;
  MatrixXd unit0(static_cast<Eigen::Index>(n_corners + config.d0_interior),
                 static_cast<Eigen::Index>(d));
  for (std::size_t c = 0; c < n_corners; ++c)
    for (std::size_t j = 0; j < d; ++j)
      unit0(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) =
          (c >> j) & 1 ? 1.0 : 0.0;
  unit0.bottomRows(static_cast<Eigen::Index>(config.d0_interior)) =
      latin_hypercube(config.d0_interior, d, rng);

  MatrixXd d0_inputs(unit0.rows(), unit0.cols());
  for (Eigen::Index r = 0; r < unit0.rows(); ++r)
    d0_inputs.row(r) = sampler(unit0.row(r).transpose()).transpose();

  QbcResult result;
  MatrixXd inputs, targets;
  evaluate_oracle(oracle, d0_inputs, inputs, targets, config.spec.output_width,
                  result.oracle_failures);
  require(inputs.rows() > 0, "qbc_run: oracle failed on the whole initial set");

  // candidate pool
  MatrixXd pool(static_cast<Eigen::Index>(config.pool_size), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < config.pool_size; ++r) {
    VectorXd u(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) u(static_cast<Eigen::Index>(j)) = rng.uniform();
    pool.row(static_cast<Eigen::Index>(r)) = sampler(u).transpose();
  }

  NetSpec spec = config.spec;
  spec.input_width = d;

  auto fit = [&](std::size_t round) {
    result.data = Dataset::make(inputs, targets, config.seed + 7919 * round);
    result.committee =
        init_committee(spec, config.committee_size, config.seed + 104729 * round, qoi);
    TrainOptions opts = config.train;
    opts.seed = config.seed + 15485863 * round;
    train(result.committee, result.data, opts);
  };

  auto assess = [&](std::size_t round) {
    const Prediction p = predict(result.committee, pool);
    QbcHistoryRow row;
    row.round = round;
    row.pool_var_mean = p.ranking_variance.mean();
    row.pool_var_max = p.ranking_variance.maxCoeff();
    row.max_mse = point_mse_max(result.committee, result.data);
    row.n_samples = static_cast<std::size_t>(inputs.rows());
    return row;
  };

  fit(0);
  std::vector<QbcHistoryRow> history{assess(0)};

  while ((history.back().pool_var_mean > config.tol_var ||
          history.back().max_mse > config.tol_mse) &&
         result.rounds < config.k_max) {
    ++result.rounds;
    // rank pool by committee disagreement, keep the top fraction
    const Prediction p = predict(result.committee, pool);
    std::vector<std::size_t> order(config.pool_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return p.ranking_variance(static_cast<Eigen::Index>(a)) >
             p.ranking_variance(static_cast<Eigen::Index>(b));
    });
    const std::size_t n_top = std::max(
        config.n_batch,
        static_cast<std::size_t>(config.top_fraction * static_cast<double>(config.pool_size)));
    MatrixXd top(static_cast<Eigen::Index>(n_top), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n_top; ++i)
      top.row(static_cast<Eigen::Index>(i)) = pool.row(static_cast<Eigen::Index>(order[i]));

    const MatrixXd centroids = kmeans(top, config.n_batch, config.seed + 31 * result.rounds);
    MatrixXd new_in, new_tg;
    evaluate_oracle(oracle, centroids, new_in, new_tg, config.spec.output_width,
                    result.oracle_failures);
    if (new_in.rows() > 0) {
      MatrixXd all_in(inputs.rows() + new_in.rows(), inputs.cols());
      all_in << inputs, new_in;
      MatrixXd all_tg(targets.rows() + new_tg.rows(), targets.cols());
      all_tg << targets, new_tg;
      inputs = std::move(all_in);
      targets = std::move(all_tg);
    }
    fit(result.rounds);
    history.push_back(assess(result.rounds));
  }
  result.committee.history = history;
  return result;
}

// ---- bundle IO ----

namespace {

nlohmann::json committee_to_json(const Committee& c) {
  nlohmann::json j;
  j["qoi"] = c.qoi;
  j["spec"] = {{"input_width", c.spec.input_width},
               {"hidden", c.spec.hidden},
               {"activation", c.spec.activation},
               {"output_width", c.spec.output_width}};
  auto vec = [](const VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  j["in_mean"] = vec(c.in_mean);
  j["in_std"] = vec(c.in_std);
  j["out_mean"] = vec(c.out_mean);
  j["out_std"] = vec(c.out_std);
  j["box_lo"] = vec(c.box_lo);
  j["box_hi"] = vec(c.box_hi);
  j["trained"] = c.trained;
  nlohmann::json members = nlohmann::json::array();
  for (const Network& net : c.members) {
    nlohmann::json m;
    nlohmann::json ws = nlohmann::json::array();
    for (const auto& w : net.weights) {
      // row-major flattening
      std::vector<double> flat;
      flat.reserve(static_cast<std::size_t>(w.size()));
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index cc = 0; cc < w.cols(); ++cc) flat.push_back(w(r, cc));
      ws.push_back({{"rows", w.rows()}, {"cols", w.cols()}, {"data", flat}});
    }
    m["weights"] = ws;
    nlohmann::json bs = nlohmann::json::array();
    for (const auto& b : net.biases) bs.push_back(vec(b));
    m["biases"] = bs;
    members.push_back(std::move(m));
  }
  j["members"] = std::move(members);
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& row : c.history)
    hist.push_back({{"round", row.round},
                    {"pool_var_mean", row.pool_var_mean},
                    {"pool_var_max", row.pool_var_max},
                    {"max_mse", row.max_mse},
                    {"n_samples", row.n_samples}});
  j["history"] = std::move(hist);
  return j;
}

Committee committee_from_json(const nlohmann::json& j) {
  Committee c;
  c.qoi = j.at("qoi").get<std::string>();
  const auto& s = j.at("spec");
  c.spec.input_width = s.at("input_width").get<std::size_t>();
  c.spec.hidden = s.at("hidden").get<std::vector<std::size_t>>();
  c.spec.activation = s.at("activation").get<std::string>();
  c.spec.output_width = s.at("output_width").get<std::size_t>();
  auto vec = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
  };
  c.in_mean = vec(j.at("in_mean"));
  c.in_std = vec(j.at("in_std"));
  c.out_mean = vec(j.at("out_mean"));
  c.out_std = vec(j.at("out_std"));
  c.box_lo = vec(j.at("box_lo"));
  c.box_hi = vec(j.at("box_hi"));
  c.trained = j.at("trained").get<bool>();
  for (const auto& m : j.at("members")) {
    Network net;
    net.spec = c.spec;
    for (const auto& w : m.at("weights")) {
      const auto rows = w.at("rows").get<Eigen::Index>();
      const auto cols = w.at("cols").get<Eigen::Index>();
      const auto flat = w.at("data").get<std::vector<double>>();
      MatrixXd mat(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index cc = 0; cc < cols; ++cc)
          mat(r, cc) = flat[static_cast<std::size_t>(r * cols + cc)];
      net.weights.push_back(std::move(mat));
    }
    for (const auto& b : m.at("biases")) net.biases.push_back(vec(b));
    c.members.push_back(std::move(net));
  }
  for (const auto& h : j.at("history")) {
    QbcHistoryRow row;
    row.round = h.at("round").get<std::size_t>();
    row.pool_var_mean = h.at("pool_var_mean").get<double>();
    row.pool_var_max = h.at("pool_var_max").get<double>();
    row.max_mse = h.at("max_mse").get<double>();
    row.n_samples = h.at("n_samples").get<std::size_t>();
    c.history.push_back(row);
  }
  return c;
}

}  // namespace

const Committee& Bundle::find(const std::string& qoi) const {
  for (const auto& c : committees)
    if (c.qoi == qoi) return c;
  throw std::runtime_error("bundle: no committee for qoi " + qoi);
}

bool Bundle::has(const std::string& qoi) const {
  for (const auto& c : committees)
    if (c.qoi == qoi) return true;
  return false;
}

std::string bundle_to_json(const Bundle& bundle) {
  nlohmann::json j;
  j["format"] = "wecfarm-bundle";
  j["version"] = bundle.version;
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : bundle.committees) cs.push_back(committee_to_json(c));
  j["committees"] = std::move(cs);
  j["checksum"] = hex64(fnv1a64(j["committees"].dump()));
  return j.dump();
}

Bundle bundle_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("format", "") != "wecfarm-bundle")
    throw std::runtime_error("bundle: unrecognized file format");
  Bundle b;
  b.version = j.at("version").get<std::string>();
  if (b.version.substr(0, 2) != "0.")
    throw std::runtime_error("bundle: version mismatch: " + b.version);
  const std::string expect = hex64(fnv1a64(j.at("committees").dump()));
  if (j.at("checksum").get<std::string>() != expect)
    throw std::runtime_error("bundle: checksum failure");
  for (const auto& c : j.at("committees")) b.committees.push_back(committee_from_json(c));
  return b;
}

void save_bundle(const std::string& path, const Bundle& bundle) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write bundle: " + path);
  f << bundle_to_json(bundle);
}

Bundle load_bundle(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open bundle: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return bundle_from_json(ss.str());
}

// ---- hydro glue ----

UnitSampler one_body_sampler(const hydro::GeometryBounds& bounds) {
  return [bounds](const VectorXd& u) {
    VectorXd x(2);
    x(0) = bounds.r_lo + (bounds.r_hi - bounds.r_lo) * u(0);
    x(1) = bounds.rd_lo + (bounds.rd_hi - bounds.rd_lo) * u(1);
    // keep the draft within its own Table bounds
    const double d = x(0) / x(1);
    if (d > bounds.d_hi) x(1) = x(0) / bounds.d_hi;
    if (d < bounds.d_lo) x(1) = x(0) / bounds.d_lo;
    return x;
  };
}

UnitSampler two_body_sampler(const hydro::GeometryBounds& bounds, double l_max) {
  const UnitSampler one = one_body_sampler(bounds);
  return [one, l_max](const VectorXd& u) {
    VectorXd x(4);
    x.head(2) = one(u.head(2));
    x(2) = 2.0 * x(0) + (l_max - 2.0 * x(0)) * u(2);  // l in [2R, l_max]
    x(3) = M_PI * u(3);
    return x;
  };
}

namespace {

Eigen::Index qoi_index(const std::vector<std::string>& qois, const std::string& qoi) {
  for (std::size_t i = 0; i < qois.size(); ++i)
    if (qois[i] == qoi) return static_cast<Eigen::Index>(i);
  throw std::invalid_argument("unknown qoi: " + qoi);
}

}  // namespace

OracleFn make_one_body_oracle(const hydro::FrequencyGrid& grid, hydro::Backend backend,
                              const std::string& qoi, int modes) {
  const Eigen::Index which = qoi_index(one_body_qois(), qoi);
  return [grid, backend, modes, which](const VectorXd& in) {
    const hydro::WecGeometry geom{in(0), in(1)};
    const hydro::OneBodyOutputs out = hydro::single_body(geom, grid, backend, modes);
    const std::vector<double>* col = nullptr;
    switch (which) {
      case 0: col = &out.a_tilde; break;
      case 1: col = &out.b_tilde; break;
      case 2: col = &out.fe_re; break;
      default: col = &out.fe_im; break;
    }
    return Eigen::Map<const VectorXd>(col->data(), static_cast<Eigen::Index>(col->size())).eval();
  };
}

OracleFn make_two_body_oracle(const hydro::FrequencyGrid& grid, hydro::Backend backend,
                              const std::string& qoi, int modes) {
  const Eigen::Index which = qoi_index(two_body_qois(), qoi);
  return [grid, backend, modes, which](const VectorXd& in) {
    const hydro::WecGeometry geom{in(0), in(1)};
    const hydro::PairOutputs out = hydro::pair_body(geom, in(2), in(3), grid, backend, modes);
    const std::vector<double>* col = nullptr;
    switch (which) {
      case 0: col = &out.a11; break;
      case 1: col = &out.a12; break;
      case 2: col = &out.b11; break;
      case 3: col = &out.b12; break;
      case 4: col = &out.fe1_re; break;
      default: col = &out.fe1_im; break;
    }
    return Eigen::Map<const VectorXd>(col->data(), static_cast<Eigen::Index>(col->size())).eval();
  };
}

Bundle train_all(const hydro::FrequencyGrid& grid, hydro::Backend backend,
                 const TrainAllConfig& config,
                 const std::function<void(const std::string&)>& log) {
  Bundle bundle;
  auto note = [&](const std::string& s) {
    if (log) log(s);
  };
  QbcConfig one;
  one.committee_size = 10;
  one.pool_size = config.one_body_pool;
  one.n_batch = 50;
  one.d0_interior = 50;
  one.k_max = config.k_max;
  one.spec = NetSpec{2, {32, 32}, "tanh", grid.size()};
  one.train.epochs = config.epochs;

  QbcConfig two = one;
  two.committee_size = 5;
  two.pool_size = config.two_body_pool;
  two.n_batch = 200;
  two.d0_interior = 200;
  two.spec.input_width = 4;

  std::uint64_t salt = 0;
  for (const auto& qoi : one_body_qois()) {
    QbcConfig cfg = one;
    cfg.seed = config.seed + 1000 * salt++;
    auto res = qbc_run(qoi, make_one_body_oracle(grid, backend, qoi, config.modes),
                       one_body_sampler(), 2, cfg);
    note("qbc one-body " + qoi + ": rounds=" + std::to_string(res.rounds) +
         " samples=" + std::to_string(res.data.size()));
    bundle.committees.push_back(std::move(res.committee));
  }
  for (const auto& qoi : two_body_qois()) {
    QbcConfig cfg = two;
    cfg.seed = config.seed + 1000 * salt++;
    auto res = qbc_run(qoi, make_two_body_oracle(grid, backend, qoi, config.modes),
                       two_body_sampler(), 4, cfg);
    note("qbc two-body " + qoi + ": rounds=" + std::to_string(res.rounds) +
         " samples=" + std::to_string(res.data.size()));
    bundle.committees.push_back(std::move(res.committee));
  }
  return bundle;
}

// ---- surrogate-backed pair source ----

SurrogatePairSource::SurrogatePairSource(Bundle bundle, hydro::FrequencyGrid grid)
    : bundle_(std::move(bundle)), grid_(std::move(grid)) {
  for (const auto& qoi : one_body_qois())
    require(bundle_.has(qoi), "surrogate source: bundle lacks one-body qoi " + qoi);
  for (const auto& qoi : two_body_qois())
    require(bundle_.has(qoi), "surrogate source: bundle lacks two-body qoi " + qoi);
}

hydro::OneBodyOutputs SurrogatePairSource::one_body(const hydro::WecGeometry& geom) {
  Eigen::MatrixXd in(1, 2);
  in << geom.radius, geom.slenderness;
  hydro::OneBodyOutputs out;
  auto run = [&](const std::string& qoi, std::vector<double>& dst) {
    const Prediction p = predict(bundle_.find(qoi), in);
    extrapolated_ += p.extrapolated;
    dst.assign(p.mean.data(), p.mean.data() + p.mean.size());
  };
  run("a", out.a_tilde);
  run("b", out.b_tilde);
  run("fe_re", out.fe_re);
  run("fe_im", out.fe_im);
  return out;
}

std::vector<hydro::PairOutputs> SurrogatePairSource::two_body_batch(
    const hydro::WecGeometry& geom, const std::vector<mbe::PairFeatures>& feats) {
  Eigen::MatrixXd in(static_cast<Eigen::Index>(feats.size()), 4);
  for (std::size_t i = 0; i < feats.size(); ++i)
    in.row(static_cast<Eigen::Index>(i)) << geom.radius, geom.slenderness, feats[i].l,
        feats[i].theta;
  std::vector<hydro::PairOutputs> out(feats.size());
  const std::size_t nf = grid_.size();
  for (auto& o : out) {
    o.a11.resize(nf);
    o.a12.resize(nf);
    o.b11.resize(nf);
    o.b12.resize(nf);
    o.fe1_re.resize(nf);
    o.fe1_im.resize(nf);
  }
  auto run = [&](const std::string& qoi, std::vector<double> hydro::PairOutputs::* field) {
    const Prediction p = predict(bundle_.find(qoi), in);
    extrapolated_ += p.extrapolated;
    for (std::size_t i = 0; i < feats.size(); ++i)
      for (std::size_t k = 0; k < nf; ++k)
        (out[i].*field)[k] = p.mean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  };
  run("a11", &hydro::PairOutputs::a11);
  run("a12", &hydro::PairOutputs::a12);
  run("b11", &hydro::PairOutputs::b11);
  run("b12", &hydro::PairOutputs::b12);
  run("fe1_re", &hydro::PairOutputs::fe1_re);
  run("fe1_im", &hydro::PairOutputs::fe1_im);
  return out;
}

hydro::PairOutputs SurrogatePairSource::two_body(const hydro::WecGeometry& geom, double l,
                                                 double theta) {
  return two_body_batch(geom, {{l, theta}}).front();
}

}  // namespace wecfarm::surrogate
