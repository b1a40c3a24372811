#include "wecfarm/mbe.hpp"

#include <cmath>

#include "wecfarm/climate.hpp"
#include "wecfarm/util.hpp"

namespace wecfarm::mbe {

using cd = std::complex<double>;

double normalize_added_mass(double a, const WecGeometry& geom, double rho) {
  return a / (rho * M_PI * std::pow(geom.radius, 3));
}

double denormalize_added_mass(double a_tilde, const WecGeometry& geom, double rho) {
  return a_tilde * rho * M_PI * std::pow(geom.radius, 3);
}

double normalize_damping(double b, const WecGeometry& geom, double omega, double rho) {
  require(omega > 0, "normalize_damping: omega must be positive");
  return b / (omega * rho * M_PI * std::pow(geom.radius, 3));
}

double denormalize_damping(double b_tilde, const WecGeometry& geom, double omega, double rho) {
  require(omega > 0, "denormalize_damping: omega must be positive");
  return b_tilde * omega * rho * M_PI * std::pow(geom.radius, 3);
}

cd normalize_excitation(cd fe, const WecGeometry& geom, double rho, double g) {
  return fe / (rho * g * M_PI * geom.radius * geom.radius * geom.draft());
}

cd denormalize_excitation(cd fe_tilde, const WecGeometry& geom, double rho, double g) {
  return fe_tilde * (rho * g * M_PI * geom.radius * geom.radius * geom.draft());
}

PairFeatures pair_features(double px, double py, double qx, double qy) {
  const double dx = qx - px, dy = qy - py;
  const double l = std::hypot(dx, dy);
  require(l > 0, "pair_features: coincident centers");
  return {l, std::abs(std::atan2(dy, dx))};
}

AdditiveTerms additive_terms(const OneBodyOutputs& iso, const PairOutputs& pair) {
  const std::size_t nf = iso.a_tilde.size();
  require(pair.a11.size() == nf, "additive_terms: frequency grid mismatch");
  AdditiveTerms d;
  d.da11.resize(nf);
  d.da12.resize(nf);
  d.db11.resize(nf);
  d.db12.resize(nf);
  d.dfe1.resize(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    d.da11[i] = pair.a11[i] - iso.a_tilde[i];
    d.da12[i] = pair.a12[i];
    d.db11[i] = pair.b11[i] - iso.b_tilde[i];
    d.db12[i] = pair.b12[i];
    // e^{ikL} factor with L = 0 under the training convention
    d.dfe1[i] = cd(pair.fe1_re[i] - iso.fe_re[i], pair.fe1_im[i] - iso.fe_im[i]);
  }
  return d;
}

std::vector<PairOutputs> PairSource::two_body_batch(const WecGeometry& geom,
                                                    const std::vector<PairFeatures>& feats) {
  std::vector<PairOutputs> out;
  out.reserve(feats.size());
  for (const auto& f : feats) out.push_back(two_body(geom, f.l, f.theta));
  return out;
}

namespace {

class OracleSource final : public PairSource {
 public:
  OracleSource(const FrequencyGrid& grid, hydro::Backend backend, int modes)
      : grid_(grid), backend_(backend), modes_(modes) {}

  const FrequencyGrid& grid() const override { return grid_; }

  OneBodyOutputs one_body(const WecGeometry& geom) override {
    return hydro::cached_single(geom, grid_, backend_, modes_)->iso;
  }

  PairOutputs two_body(const WecGeometry& geom, double l, double theta) override {
    const auto ev = hydro::cached_single(geom, grid_, backend_, modes_);
    return hydro::pair_from_single(*ev, grid_, l, theta);
  }

 private:
  FrequencyGrid grid_;
  hydro::Backend backend_;
  int modes_;
};

}  // namespace

std::unique_ptr<PairSource> make_oracle_source(const FrequencyGrid& grid, hydro::Backend backend,
                                               int modes) {
  return std::make_unique<OracleSource>(grid, backend, modes);
}

HydroTable compose_farm(const WecGeometry& geom, const FarmLayout& layout, PairSource& source) {
  const std::size_t n = layout.size();
  require(n >= 1, "compose_farm: empty layout");
  const FrequencyGrid& grid = source.grid();
  const std::size_t nf = grid.size();

  const OneBodyOutputs iso = source.one_body(geom);

  // ordered pairs (p, q), q acting on p
  std::vector<PairFeatures> feats;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      if (q == p) continue;
      feats.push_back(pair_features(layout.x[p], layout.y[p], layout.x[q], layout.y[q]));
      pairs.emplace_back(p, q);
    }
  const std::vector<PairOutputs> pair_out = source.two_body_batch(geom, feats);

  HydroTable table;
  table.omegas = grid.values;
  table.added_mass.assign(nf, Eigen::MatrixXd::Zero(n, n));
  table.damping.assign(nf, Eigen::MatrixXd::Zero(n, n));
  table.excitation.assign(nf, Eigen::VectorXcd::Zero(n));

  std::vector<double> wavenumbers(nf);
  for (std::size_t i = 0; i < nf; ++i)
    wavenumbers[i] = climate::dispersion(grid.values[i], grid.h, grid.g);

  // normalized accumulation
  std::vector<std::vector<double>> a_diag(nf, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> b_diag(nf, std::vector<double>(n, 0.0));
  std::vector<std::vector<cd>> fe_acc(nf, std::vector<cd>(n));
  for (std::size_t i = 0; i < nf; ++i)
    for (std::size_t p = 0; p < n; ++p) {
      a_diag[i][p] = iso.a_tilde[i];
      b_diag[i][p] = iso.b_tilde[i];
      fe_acc[i][p] = cd(iso.fe_re[i], iso.fe_im[i]);
    }

  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const auto [p, q] = pairs[e];
    const AdditiveTerms d = additive_terms(iso, pair_out[e]);
    for (std::size_t i = 0; i < nf; ++i) {
      a_diag[i][p] += d.da11[i];
      b_diag[i][p] += d.db11[i];
      fe_acc[i][p] += d.dfe1[i];
      table.added_mass[i](p, q) = d.da12[i];
      table.damping[i](p, q) = d.db12[i];
    }
  }

  for (std::size_t i = 0; i < nf; ++i) {
    const double w = grid.values[i];
    auto& A = table.added_mass[i];
    auto& B = table.damping[i];
    for (std::size_t p = 0; p < n; ++p) {
      A(p, p) = a_diag[i][p];
      B(p, p) = b_diag[i][p];
      table.excitation[i](p) = denormalize_excitation(fe_acc[i][p], geom, grid.rho, grid.g) *
                               std::exp(cd(0.0, -wavenumbers[i] * layout.x[p]));
    }
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q) {
        A(p, q) = denormalize_added_mass(A(p, q), geom, grid.rho);
        B(p, q) = denormalize_damping(B(p, q), geom, w, grid.rho);
      }
    A = 0.5 * (A + A.transpose()).eval();
    B = 0.5 * (B + B.transpose()).eval();
  }
  return table;
}

}  // namespace wecfarm::mbe
