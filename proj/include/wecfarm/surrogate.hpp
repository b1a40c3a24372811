#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wecfarm/hydro.hpp"
#include "wecfarm/mbe.hpp"
#include "wecfarm/util.hpp"

namespace wecfarm::surrogate {

// Quantities of interest, one committee each.
inline const std::vector<std::string>& one_body_qois() {
  static const std::vector<std::string> q = {"a", "b", "fe_re", "fe_im"};
  return q;
}
inline const std::vector<std::string>& two_body_qois() {
  static const std::vector<std::string> q = {"a11", "a12", "b11", "b12", "fe1_re", "fe1_im"};
  return q;
}

struct NetSpec {
  std::size_t input_width = 2;           // 2 one-body, 4 two-body
  std::vector<std::size_t> hidden = {32, 32};
  std::string activation = "tanh";
  std::size_t output_width = 100;        // frequency-grid length
};

// Fully-connected feedforward net, tanh hidden layers, linear output.
class Network {
 public:
  Network() = default;
  Network(const NetSpec& spec, Rng& rng);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;  // rows = samples

  std::vector<Eigen::MatrixXd> weights;  // weights[l] is (fan_out x fan_in)
  std::vector<Eigen::VectorXd> biases;
  NetSpec spec;
};

struct QbcHistoryRow {
  std::size_t round = 0;
  double pool_var_mean = 0.0;
  double pool_var_max = 0.0;
  double max_mse = 0.0;
  std::size_t n_samples = 0;
};

struct Committee {
  std::string qoi;
  NetSpec spec;
  std::vector<Network> members;
  // input/output affine scaling (z-score over the training split)
  Eigen::VectorXd in_mean, in_std, out_mean, out_std;
  // training-input bounding box, used to flag extrapolation
  Eigen::VectorXd box_lo, box_hi;
  std::vector<QbcHistoryRow> history;
  bool trained = false;
};

struct Dataset {
  Eigen::MatrixXd inputs;   // rows = samples
  Eigen::MatrixXd targets;
  std::vector<int> split;   // 0 train, 1 val, 2 test

  static Dataset make(Eigen::MatrixXd inputs, Eigen::MatrixXd targets, std::uint64_t seed);
  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
};

struct TrainOptions {
  std::size_t epochs = 200;
  std::size_t batch = 32;
  double learning_rate = 5e-3;
  std::size_t patience = 12;       // early stop, in validation checks
  double subsample = 0.8;          // per-member share of the training split
  std::uint64_t seed = 0;
};

struct TrainMetrics {
  std::vector<double> member_val_mse;
  double committee_test_mse = 0.0;
};

Committee init_committee(const NetSpec& spec, std::size_t n, std::uint64_t seed,
                         const std::string& qoi = "");

// Gradient-based MSE minimization (Adam, mini-batch); each member trains on
// its own random equal-sized sub-sample of the training split.
TrainMetrics train(Committee& committee, const Dataset& data, const TrainOptions& opts);

struct Prediction {
  Eigen::MatrixXd mean;              // rows = inputs
  Eigen::MatrixXd variance;          // population variance across members
  Eigen::VectorXd ranking_variance;  // variance averaged over outputs
  std::size_t extrapolated = 0;      // inputs outside the training box
};
Prediction predict(const Committee& committee, const Eigen::MatrixXd& inputs);

// Lloyd iteration with seeded initialization; an emptied cluster is
// re-seeded to a random point.
Eigen::MatrixXd kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed);

// Maps the qoi input row to the physics-normalized output row, or throws.
using OracleFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct QbcConfig {
  std::size_t committee_size = 10;
  std::size_t pool_size = 10000;
  std::size_t n_batch = 50;
  std::size_t k_max = 20;
  double tol_var = 1e-3;
  double tol_mse = 1e-3;
  std::size_t d0_interior = 50;
  double top_fraction = 0.2;
  NetSpec spec;
  TrainOptions train;
  std::uint64_t seed = 0;
};

struct QbcResult {
  Committee committee;
  Dataset data;
  std::size_t rounds = 0;
  std::size_t oracle_failures = 0;
};

// Pool-based batch-mode query-by-committee loop over a sampled candidate
// pool. The sampler maps a unit-cube point to an input row (it owns the
// geometry-dependent bounds such as l >= 2R).
using UnitSampler = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

QbcResult qbc_run(const std::string& qoi, const OracleFn& oracle, const UnitSampler& sampler,
                  std::size_t input_width, const QbcConfig& config);

// ---- trained-bundle container and IO ----

struct Bundle {
  std::string version = "0.1.0";
  std::vector<Committee> committees;

  const Committee& find(const std::string& qoi) const;
  bool has(const std::string& qoi) const;
};

std::string bundle_to_json(const Bundle& bundle);
Bundle bundle_from_json(const std::string& text);
void save_bundle(const std::string& path, const Bundle& bundle);
Bundle load_bundle(const std::string& path);

// ---- glue to the hydro oracle ----

// input row -> unit-cube mapping owning the Table-1 ranges
UnitSampler one_body_sampler(const hydro::GeometryBounds& bounds = {});
UnitSampler two_body_sampler(const hydro::GeometryBounds& bounds = {}, double l_max = 1000.0);

OracleFn make_one_body_oracle(const hydro::FrequencyGrid& grid, hydro::Backend backend,
                              const std::string& qoi, int modes = 40);
OracleFn make_two_body_oracle(const hydro::FrequencyGrid& grid, hydro::Backend backend,
                              const std::string& qoi, int modes = 40);

// Trains all 4 + 6 committees with the stated pools and batch sizes.
struct TrainAllConfig {
  std::size_t one_body_pool = 10000;
  std::size_t two_body_pool = 100000;
  std::size_t k_max = 20;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  int modes = 40;
};
Bundle train_all(const hydro::FrequencyGrid& grid, hydro::Backend backend,
                 const TrainAllConfig& config,
                 const std::function<void(const std::string&)>& log = nullptr);

// PairSource backed by a trained bundle; inputs outside the training box are
// still evaluated but counted.
class SurrogatePairSource final : public mbe::PairSource {
 public:
  SurrogatePairSource(Bundle bundle, hydro::FrequencyGrid grid);

  const hydro::FrequencyGrid& grid() const override { return grid_; }
  hydro::OneBodyOutputs one_body(const hydro::WecGeometry& geom) override;
  hydro::PairOutputs two_body(const hydro::WecGeometry& geom, double l, double theta) override;
  std::vector<hydro::PairOutputs> two_body_batch(
      const hydro::WecGeometry& geom, const std::vector<mbe::PairFeatures>& feats) override;
  std::size_t extrapolation_count() const override { return extrapolated_; }

  const Bundle& bundle() const { return bundle_; }

 private:
  Bundle bundle_;
  hydro::FrequencyGrid grid_;
  std::size_t extrapolated_ = 0;
};

}  // namespace wecfarm::surrogate
