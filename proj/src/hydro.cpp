#include "wecfarm/hydro.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "wecfarm/climate.hpp"
#include "wecfarm/util.hpp"

namespace wecfarm::hydro {

using climate::dispersion;
using cd = std::complex<double>;

bool geometry_in_bounds(const WecGeometry& g, const GeometryBounds& b) {
  const double d = g.draft();
  return g.radius >= b.r_lo && g.radius <= b.r_hi && g.slenderness >= b.rd_lo &&
         g.slenderness <= b.rd_hi && d >= b.d_lo && d <= b.d_hi;
}

void check_geometry(const WecGeometry& g, const GeometryBounds& b) {
  if (!geometry_in_bounds(g, b))
    throw std::invalid_argument("geometry outside bounds: radius=" + std::to_string(g.radius) +
                                " slenderness=" + std::to_string(g.slenderness));
}

FrequencyGrid FrequencyGrid::standard(std::size_t n, double lo, double hi) {
  FrequencyGrid grid;
  grid.values = linspace(lo, hi, n);
  return grid;
}

Backend backend_from_string(const std::string& name) {
  if (name == "reference") return Backend::reference;
  if (name == "toy") return Backend::toy;
  throw std::invalid_argument("unknown hydro backend: " + name);
}

std::string to_string(Backend b) { return b == Backend::reference ? "reference" : "toy"; }

namespace {

SingleBodyEval eval_single_toy(const WecGeometry& geom, const FrequencyGrid& grid) {
  SingleBodyEval ev;
  const std::size_t nf = grid.size();
  ev.iso.a_tilde.resize(nf);
  ev.iso.b_tilde.resize(nf);
  ev.iso.fe_re.resize(nf);
  ev.iso.fe_im.resize(nf);
  ev.sigma.resize(nf);
  const double rd = geom.slenderness;
  const double d = geom.draft();
  for (std::size_t i = 0; i < nf; ++i) {
    const double w = grid.values[i];
    const double s = w * std::sqrt(geom.radius / grid.g);
    const double e = std::exp(-s * s);
    ev.iso.a_tilde[i] = (0.4 + 0.3 / (1.0 + s * s)) * (1.0 + 0.2 / rd);
    ev.iso.b_tilde[i] = 0.8 * s * e * (1.0 + 0.2 / rd);
    ev.iso.fe_re[i] = e / d;
    ev.iso.fe_im[i] = -0.5 * s * e / d;
    ev.sigma[i] = 0.3 * s * std::exp(-s);
  }
  return ev;
}

SingleBodyEval eval_single_reference(const WecGeometry& geom, const FrequencyGrid& grid,
                                     int modes) {
  SingleBodyEval ev;
  const std::size_t nf = grid.size();
  ev.iso.a_tilde.resize(nf);
  ev.iso.b_tilde.resize(nf);
  ev.iso.fe_re.resize(nf);
  ev.iso.fe_im.resize(nf);
  ev.sigma.resize(nf);
  const double r3 = grid.rho * M_PI * std::pow(geom.radius, 3);
  const double fe_scale = grid.rho * grid.g * M_PI * geom.radius * geom.radius * geom.draft();
  parallel_for(nf, [&](std::size_t i) {
    const double w = grid.values[i];
    const CylinderSolution sol =
        solve_cylinder(geom.radius, geom.draft(), w, grid.h, grid.g, grid.rho, modes);
    ev.iso.a_tilde[i] = sol.added_mass / r3;
    ev.iso.b_tilde[i] = sol.damping / (w * r3);
    ev.iso.fe_re[i] = sol.excitation.real() / fe_scale;
    ev.iso.fe_im[i] = sol.excitation.imag() / fe_scale;
    ev.sigma[i] = sol.scatter_strength;
  });
  return ev;
}

// scattered-wave contribution to the excitation of a body at the origin
// from a neighbor at distance l, angle theta
cd pair_excitation_term(double sigma, double k, double l, double theta) {
  const double kl = k * l;
  const double amp = sigma * std::sqrt(2.0 / (M_PI * kl));
  const double phase = kl - 0.75 * M_PI - kl * std::cos(theta);
  return amp * cd(std::cos(phase), std::sin(phase));
}

std::uint64_t grid_key(const FrequencyGrid& grid) {
  std::uint64_t h = fnv1a64(grid.values.data(), grid.values.size() * sizeof(double));
  const double params[3] = {grid.h, grid.g, grid.rho};
  return fnv1a64(params, sizeof(params), h);
}

}  // namespace

SingleBodyEval eval_single(const WecGeometry& geom, const FrequencyGrid& grid, Backend backend,
                           int modes) {
  check_geometry(geom);
  require(!grid.values.empty(), "eval_single: empty frequency grid");
  return backend == Backend::toy ? eval_single_toy(geom, grid)
                                 : eval_single_reference(geom, grid, modes);
}

OneBodyOutputs single_body(const WecGeometry& geom, const FrequencyGrid& grid, Backend backend,
                           int modes) {
  return eval_single(geom, grid, backend, modes).iso;
}

std::shared_ptr<const SingleBodyEval> cached_single(const WecGeometry& geom,
                                                    const FrequencyGrid& grid, Backend backend,
                                                    int modes) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const SingleBodyEval>> cache;
  std::ostringstream key;
  key.precision(17);
  key << to_string(backend) << '|' << modes << '|' << geom.radius << '|' << geom.slenderness
      << '|' << hex64(grid_key(grid));
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key.str());
    if (it != cache.end()) return it->second;
  }
  auto ev = std::make_shared<SingleBodyEval>(eval_single(geom, grid, backend, modes));
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 512) cache.clear();
  return cache[key.str()] = ev;
}

PairOutputs pair_from_single(const SingleBodyEval& ev, const FrequencyGrid& grid, double l,
                             double theta) {
  require(l > 0, "pair_from_single: l must be positive");
  require(theta >= 0.0 && theta <= M_PI, "pair_from_single: theta must lie in [0, pi]");
  PairOutputs out;
  const std::size_t nf = grid.size();
  out.a11.resize(nf);
  out.a12.resize(nf);
  out.b11.resize(nf);
  out.b12.resize(nf);
  out.fe1_re.resize(nf);
  out.fe1_im.resize(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    const double k = dispersion(grid.values[i], grid.h, grid.g);
    const double kl = k * l;
    out.a11[i] = ev.iso.a_tilde[i];
    out.b11[i] = ev.iso.b_tilde[i];
    out.a12[i] = -ev.iso.b_tilde[i] * std::cyl_neumann(0, kl);
    out.b12[i] = ev.iso.b_tilde[i] * std::cyl_bessel_j(0, kl);
    const cd fe1 = cd(ev.iso.fe_re[i], ev.iso.fe_im[i]) +
                   pair_excitation_term(ev.sigma[i], k, l, theta);
    out.fe1_re[i] = fe1.real();
    out.fe1_im[i] = fe1.imag();
  }
  return out;
}

PairOutputs pair_body(const WecGeometry& geom, double l, double theta, const FrequencyGrid& grid,
                      Backend backend, int modes) {
  return pair_from_single(eval_single(geom, grid, backend, modes), grid, l, theta);
}

HydroTable farm_direct(const WecGeometry& geom, const FarmLayout& layout,
                       const FrequencyGrid& grid, Backend backend, int modes) {
  const std::size_t n = layout.size();
  require(n >= 1, "farm_direct: empty layout");
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) {
      const double dx = layout.x[q] - layout.x[p], dy = layout.y[q] - layout.y[p];
      require(dx * dx + dy * dy > 0.0, "farm_direct: coincident WEC centers");
    }

  const auto ev = cached_single(geom, grid, backend, modes);
  const std::size_t nf = grid.size();
  const double r3 = grid.rho * M_PI * std::pow(geom.radius, 3);
  const double fe_scale = grid.rho * grid.g * M_PI * geom.radius * geom.radius * geom.draft();

  HydroTable table;
  table.omegas = grid.values;
  table.added_mass.assign(nf, Eigen::MatrixXd(n, n));
  table.damping.assign(nf, Eigen::MatrixXd(n, n));
  table.excitation.assign(nf, Eigen::VectorXcd(n));

  for (std::size_t i = 0; i < nf; ++i) {
    const double w = grid.values[i];
    const double k = dispersion(w, grid.h, grid.g);
    auto& A = table.added_mass[i];
    auto& B = table.damping[i];
    auto& Fe = table.excitation[i];
    for (std::size_t p = 0; p < n; ++p) {
      A(p, p) = ev->iso.a_tilde[i] * r3;
      B(p, p) = ev->iso.b_tilde[i] * w * r3;
      cd fe = cd(ev->iso.fe_re[i], ev->iso.fe_im[i]);
      for (std::size_t q = 0; q < n; ++q) {
        if (q == p) continue;
        const double dx = layout.x[q] - layout.x[p], dy = layout.y[q] - layout.y[p];
        const double l = std::hypot(dx, dy);
        const double theta = std::abs(std::atan2(dy, dx));
        const double kl = k * l;
        A(p, q) = -ev->iso.b_tilde[i] * std::cyl_neumann(0, kl) * r3;
        B(p, q) = ev->iso.b_tilde[i] * std::cyl_bessel_j(0, kl) * w * r3;
        fe += pair_excitation_term(ev->sigma[i], k, l, theta);
      }
      Fe(p) = fe * fe_scale * std::exp(cd(0.0, -k * layout.x[p]));
    }
    A = 0.5 * (A + A.transpose()).eval();
    B = 0.5 * (B + B.transpose()).eval();
  }
  return table;
}

void write_one_body_csv(const std::string& path, const FrequencyGrid& grid,
                        const OneBodyOutputs& out) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "omega,a,b,fe_re,fe_im\n";
  f.precision(12);
  for (std::size_t i = 0; i < grid.size(); ++i)
    f << grid.values[i] << ',' << out.a_tilde[i] << ',' << out.b_tilde[i] << ',' << out.fe_re[i]
      << ',' << out.fe_im[i] << '\n';
}

void write_pair_csv(const std::string& path, const FrequencyGrid& grid, const PairOutputs& out) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "omega,a11,a12,b11,b12,fe1_re,fe1_im\n";
  f.precision(12);
  for (std::size_t i = 0; i < grid.size(); ++i)
    f << grid.values[i] << ',' << out.a11[i] << ',' << out.a12[i] << ',' << out.b11[i] << ','
      << out.b12[i] << ',' << out.fe1_re[i] << ',' << out.fe1_im[i] << '\n';
}

void write_hydro_table_csv(const std::string& path, const HydroTable& table) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  // one row per (frequency, body pair); fe columns only on the diagonal rows
  f << "omega,p,q,a_pq,b_pq,fe_p_re,fe_p_im\n";
  f.precision(12);
  const std::size_t n = table.n_bodies();
  for (std::size_t i = 0; i < table.n_freq(); ++i)
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q) {
        f << table.omegas[i] << ',' << p << ',' << q << ',' << table.added_mass[i](p, q) << ','
          << table.damping[i](p, q);
        if (p == q)
          f << ',' << table.excitation[i](p).real() << ',' << table.excitation[i](p).imag();
        else
          f << ",,";
        f << '\n';
      }
}

}  // namespace wecfarm::hydro
