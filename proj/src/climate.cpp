#include "wecfarm/climate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "wecfarm/util.hpp"

namespace wecfarm::climate {

Quadrature gauss_legendre(std::size_t n, double a, double b) {
  require(n >= 1, "gauss_legendre: n must be >= 1");
  require(std::isfinite(a) && std::isfinite(b) && a < b, "gauss_legendre: invalid bounds");
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  // Newton iteration on P_n over [-1, 1]; roots are symmetric.
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      if (n == 1) p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      const double pn = (n == 1) ? x : p1;
      const double pn1 = (n == 1) ? 1.0 : p0;
      dp = static_cast<double>(n) * (x * pn - pn1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = -x;  // ascending order: most negative root first
    q.weights[i] = w;
    q.nodes[n - 1 - i] = x;
    q.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    // central node of an odd rule is exactly zero
    q.nodes[n / 2] = 0.0;
  }
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t i = 0; i < n; ++i) {
    q.nodes[i] = mid + half * q.nodes[i];
    q.weights[i] *= half;
  }
  return q;
}

SpectrumParams jonswap_params(double hs, double tp) {
  require(hs > 0 && tp > 0, "jonswap: hs and tp must be positive");
  SpectrumParams p;
  p.omega_p = 2.0 * M_PI / tp;
  const double ratio = tp / std::sqrt(hs);
  if (ratio <= 3.6)
    p.gamma = 5.0;
  else if (ratio <= 5.0)
    p.gamma = std::exp(5.75 - 1.15 * ratio);
  else
    p.gamma = 1.0;
  p.beta_s = 1.25 * std::pow(p.omega_p, 4);
  // alpha_s carries the frequency-dependent gamma^r factor; stored here is
  // the omega-independent prefactor (beta_s/4) hs^2 C(gamma).
  p.alpha_s = 0.25 * p.beta_s * hs * hs * (1.0 - 0.287 * std::log(p.gamma));
  return p;
}

double jonswap(double hs, double tp, double omega) {
  require(omega > 0, "jonswap: omega must be positive");
  const SpectrumParams p = jonswap_params(hs, tp);
  const double sigma = (omega <= p.omega_p) ? 0.07 : 0.09;
  const double d = omega / p.omega_p - 1.0;
  const double r = std::exp(-d * d / (2.0 * sigma * sigma));
  const double alpha = p.alpha_s * std::pow(p.gamma, r);
  return alpha * std::pow(omega, -5) * std::exp(-p.beta_s * std::pow(omega, -4));
}

double dispersion(double omega, double h, double g) {
  require(omega > 0 && h > 0 && g > 0, "dispersion: inputs must be positive");
  const double w2 = omega * omega;
  const double k_deep = w2 / g;
  // f(k) = g k tanh(k h) - omega^2 is strictly increasing; root lies in
  // [k_deep, k_deep / tanh(k_deep h)].
  double lo = k_deep;
  double th = std::tanh(k_deep * h);
  double hi = (th > 1e-300) ? k_deep / th : std::sqrt(w2 / (g * h)) * 2.0;
  auto f = [&](double k) { return g * k * std::tanh(k * h) - w2; };
  if (f(lo) > 0.0) lo *= 0.5;
  while (f(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-16 * hi) break;
  }
  double k = 0.5 * (lo + hi);
  // Newton polish
  for (int i = 0; i < 8; ++i) {
    const double t = std::tanh(k * h);
    const double fk = g * k * t - w2;
    const double dfk = g * t + g * k * h * (1.0 - t * t);
    k -= fk / dfk;
  }
  if (!(k > 0.0) || std::abs(g * k * std::tanh(k * h) - w2) > 1e-10 * w2)
    throw std::runtime_error("dispersion: root solve failed to converge");
  return k;
}

namespace {

double silverman_bandwidth(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= (n - 1.0);
  const double sd = std::sqrt(var);
  return 1.06 * sd * std::pow(n, -0.2);
}

}  // namespace

ClimateModel fit_climate(const std::vector<SeaSample>& samples, std::size_t n_gq,
                         std::optional<std::pair<double, double>> bandwidth,
                         const ClimateBox& box) {
  require(n_gq >= 2, "fit_climate: n_gq must be >= 2");
  require(!samples.empty(), "fit_climate: no samples");
  std::map<int, std::vector<const SeaSample*>> by_year;
  for (const auto& s : samples) {
    require(s.hs > 0 && s.tp > 0, "fit_climate: samples must have hs > 0 and tp > 0");
    by_year[s.year].push_back(&s);
  }
  ClimateModel m;
  m.box = box;
  const Quadrature qh = gauss_legendre(n_gq, box.hs_lo, box.hs_hi);
  const Quadrature qt = gauss_legendre(n_gq, box.tp_lo, box.tp_hi);
  m.hs_nodes = qh.nodes;
  m.hs_weights = qh.weights;
  m.tp_nodes = qt.nodes;
  m.tp_weights = qt.weights;
  for (const auto& [year, rows] : by_year) {
    require(rows.size() >= 10, "fit_climate: need at least 10 samples per year");
    std::vector<double> hs(rows.size()), tp(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      hs[i] = rows[i]->hs;
      tp[i] = rows[i]->tp;
    }
    double bh, bt;
    if (bandwidth) {
      bh = bandwidth->first;
      bt = bandwidth->second;
    } else {
      bh = silverman_bandwidth(hs);
      bt = silverman_bandwidth(tp);
    }
    require(bh > 0 && bt > 0,
            "fit_climate: degenerate (zero-variance) sample set; pass an explicit bandwidth");
    std::vector<double> pdf(n_gq * n_gq, 0.0);
    const double norm = 1.0 / (2.0 * M_PI * bh * bt * static_cast<double>(rows.size()));
    for (std::size_t i = 0; i < n_gq; ++i) {
      for (std::size_t j = 0; j < n_gq; ++j) {
        double acc = 0.0;
        for (std::size_t s = 0; s < rows.size(); ++s) {
          const double dh = (m.hs_nodes[i] - hs[s]) / bh;
          const double dt = (m.tp_nodes[j] - tp[s]) / bt;
          acc += std::exp(-0.5 * (dh * dh + dt * dt));
        }
        pdf[i * n_gq + j] = norm * acc;
      }
    }
    std::vector<double> prob(n_gq * n_gq);
    double total = 0.0;
    for (std::size_t i = 0; i < n_gq; ++i)
      for (std::size_t j = 0; j < n_gq; ++j) {
        prob[i * n_gq + j] = pdf[i * n_gq + j] * m.hs_weights[i] * m.tp_weights[j];
        total += prob[i * n_gq + j];
      }
    require(total > 0, "fit_climate: zero total probability mass on the grid");
    for (double& p : prob) p /= total;
    m.years.push_back(year);
    m.pdf.push_back(std::move(pdf));
    m.prob.push_back(std::move(prob));
  }
  return m;
}

WaveComponents wave_components(double hs, double tp, std::size_t n_r, std::uint64_t seed,
                               double h, double g) {
  require(n_r >= 1, "wave_components: n_r must be >= 1");
  const double omega_p = 2.0 * M_PI / tp;
  // band covering essentially all JONSWAP energy
  const double lo = 0.5 * omega_p, hi = 6.0 * omega_p;
  const double dw = (hi - lo) / static_cast<double>(n_r);
  WaveComponents wc;
  wc.omegas.resize(n_r);
  wc.wavenumbers.resize(n_r);
  wc.amplitudes.resize(n_r);
  wc.phases.resize(n_r);
  Rng rng(seed);
  for (std::size_t i = 0; i < n_r; ++i) {
    const double w = lo + (static_cast<double>(i) + 0.5) * dw;
    wc.omegas[i] = w;
    wc.wavenumbers[i] = dispersion(w, h, g);
    wc.amplitudes[i] = 2.0 * std::sqrt(2.0 * jonswap(hs, tp, w) * dw);
    wc.phases[i] = 2.0 * M_PI * rng.uniform();
  }
  return wc;
}

double elevation_at(const WaveComponents& wc, double x, double t) {
  double eta = 0.0;
  for (std::size_t i = 0; i < wc.omegas.size(); ++i)
    eta += 0.5 * wc.amplitudes[i] *
           std::cos(wc.wavenumbers[i] * x - wc.omegas[i] * t + wc.phases[i]);
  return eta;
}

double synth_elevation(double hs, double tp, std::size_t n_r, std::uint64_t seed, double x,
                       double t, double h, double g) {
  return elevation_at(wave_components(hs, tp, n_r, seed, h, g), x, t);
}

std::vector<SeaSample> synth_climate(const SyntheticSite& site, int years, std::size_t n_per_year,
                                     std::uint64_t seed) {
  require(years >= 1, "synth_climate: years must be >= 1");
  require(n_per_year >= 10, "synth_climate: need at least 10 samples per year");
  std::vector<SeaSample> out;
  out.reserve(static_cast<std::size_t>(years) * n_per_year);
  Rng rng(seed);
  const double c = std::sqrt(std::max(0.0, 1.0 - site.rho * site.rho));
  for (int y = 1; y <= years; ++y) {
    for (std::size_t i = 0; i < n_per_year; ++i) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      double hs = site.median_hs * std::exp(site.sigma_log_hs * z1);
      double tp = site.median_tp * std::exp(site.sigma_log_tp * (site.rho * z1 + c * z2));
      hs = std::clamp(hs, site.clip.hs_lo, site.clip.hs_hi);
      tp = std::clamp(tp, site.clip.tp_lo, site.clip.tp_hi);
      out.push_back({y, hs, tp});
    }
  }
  return out;
}

std::vector<SeaSample> read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open climate CSV: " + path);
  std::string line;
  // tolerate leading comment lines and trailing \r from CRLF files
  do {
    if (!std::getline(in, line)) throw std::runtime_error("empty climate CSV: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
  } while (!line.empty() && line[0] == '#');
  if (line != "year,hs_m,tp_s")
    throw std::runtime_error("climate CSV must start with header year,hs_m,tp_s");
  std::vector<SeaSample> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b, d;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, d, ','))
      throw std::runtime_error("malformed climate CSV row at line " + std::to_string(lineno));
    SeaSample s;
    s.year = std::stoi(a);
    s.hs = std::stod(b);
    s.tp = std::stod(d);
    out.push_back(s);
  }
  return out;
}

void write_samples_csv(const std::string& path, const std::vector<SeaSample>& samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write climate CSV: " + path);
  out << "year,hs_m,tp_s\n";
  out.precision(12);
  for (const auto& s : samples) out << s.year << ',' << s.hs << ',' << s.tp << '\n';
}

std::string climate_to_json(const ClimateModel& m) {
  nlohmann::json j;
  j["years"] = m.years;
  j["hs_nodes"] = m.hs_nodes;
  j["tp_nodes"] = m.tp_nodes;
  j["hs_weights"] = m.hs_weights;
  j["tp_weights"] = m.tp_weights;
  j["box"] = {{"hs_lo", m.box.hs_lo},
              {"hs_hi", m.box.hs_hi},
              {"tp_lo", m.box.tp_lo},
              {"tp_hi", m.box.tp_hi}};
  j["pdf"] = m.pdf;
  j["prob"] = m.prob;
  return j.dump(2);
}

ClimateModel climate_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ClimateModel m;
  m.years = j.at("years").get<std::vector<int>>();
  m.hs_nodes = j.at("hs_nodes").get<std::vector<double>>();
  m.tp_nodes = j.at("tp_nodes").get<std::vector<double>>();
  m.hs_weights = j.at("hs_weights").get<std::vector<double>>();
  m.tp_weights = j.at("tp_weights").get<std::vector<double>>();
  const auto& b = j.at("box");
  m.box = {b.at("hs_lo").get<double>(), b.at("hs_hi").get<double>(), b.at("tp_lo").get<double>(),
           b.at("tp_hi").get<double>()};
  m.pdf = j.at("pdf").get<std::vector<std::vector<double>>>();
  m.prob = j.at("prob").get<std::vector<std::vector<double>>>();
  return m;
}

}  // namespace wecfarm::climate
