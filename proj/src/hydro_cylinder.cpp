#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "wecfarm/climate.hpp"
#include "wecfarm/hydro.hpp"

// Matched-eigenfunction solution for a truncated vertical cylinder
// (radius a, draft d) heaving in water of depth h. The fluid is split at
// r = a into an exterior column with the usual propagating + evanescent
// depth modes and an interior column under the base with modes
// cos(n pi (z+h)/s), s = h - d. Continuity of potential is projected onto
// the interior modes and continuity of radial velocity onto the exterior
// modes, giving one dense system shared by the radiation and diffraction
// problems (different right-hand sides). Time factor e^{+i omega t};
// incident wave  eta = e^{-i k x}, so outgoing waves carry H0^(2).

namespace wecfarm::hydro {

namespace {

using cd = std::complex<double>;

// roots of omega^2 = -g k tan(k h) with k h in ((m-1/2) pi, m pi)
double evanescent_root(double w2, double g, double h, int m) {
  double lo = ((m - 0.5) * M_PI + 1e-12) / h;
  double hi = (m * M_PI - 1e-12) / h;
  auto f = [&](double k) { return w2 + g * k * std::tan(k * h); };
  // f(lo) -> -inf, f(hi) -> w2 > 0
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

// int_0^s cos(a u) cos(b u) du, stable near a = b
double int_coscos(double a, double b, double s) {
  auto half_term = [&](double c) {
    const double x = c * s;
    if (std::abs(x) < 1e-6) return 0.5 * s * (1.0 - x * x / 6.0);
    return 0.5 * std::sin(x) / c;
  };
  return half_term(a - b) + half_term(a + b);
}

// int_0^s cosh(a u) cos(b u) du
double int_coshcos(double a, double b, double s) {
  return (a * std::sinh(a * s) * std::cos(b * s) + b * std::cosh(a * s) * std::sin(b * s)) /
         (a * a + b * b);
}

double bessel_i_ratio(double x) {
  // I1(x)/I0(x); asymptotic branch avoids overflow for large arguments
  if (x > 300.0) {
    const double ix = 1.0 / x;
    return 1.0 - 0.5 * ix - 0.125 * ix * ix - 0.125 * ix * ix * ix;
  }
  return std::cyl_bessel_i(1, x) / std::cyl_bessel_i(0, x);
}

}  // namespace

CylinderSolution solve_cylinder(double radius, double draft, double omega, double h, double g,
                                double rho, int modes) {
  if (!(radius > 0 && draft > 0 && omega > 0 && h > draft && g > 0 && rho > 0))
    throw std::invalid_argument("solve_cylinder: invalid geometry or frequency");
  if (modes < 2) throw std::invalid_argument("solve_cylinder: modes must be >= 2");

  const double a = radius, d = draft, s = h - d;
  const double w2 = omega * omega;
  const int M = modes;  // exterior depth modes (incl. propagating)
  const int N = modes;  // interior modes

  const double k0 = climate::dispersion(omega, h, g);

  std::vector<double> km(M, 0.0);  // km[0] unused
  for (int m = 1; m < M; ++m) km[m] = evanescent_root(w2, g, h, m);

  // mode normalizations: (1/h) int Z_m^2 dz = 1
  std::vector<double> sqrtN(M);
  sqrtN[0] = std::sqrt(0.5 * (1.0 + std::sinh(2.0 * k0 * h) / (2.0 * k0 * h)));
  for (int m = 1; m < M; ++m)
    sqrtN[m] = std::sqrt(0.5 * (1.0 + std::sin(2.0 * km[m] * h) / (2.0 * km[m] * h)));

  // exterior radial log-derivatives at r = a
  const cd h0 = cd(std::cyl_bessel_j(0, k0 * a), -std::cyl_neumann(0, k0 * a));
  const cd h1 = cd(std::cyl_bessel_j(1, k0 * a), -std::cyl_neumann(1, k0 * a));
  std::vector<cd> Rp(M);
  Rp[0] = -k0 * h1 / h0;
  for (int m = 1; m < M; ++m)
    Rp[m] = -km[m] * std::cyl_bessel_k(1, km[m] * a) / std::cyl_bessel_k(0, km[m] * a);

  // interior radial log-derivatives at r = a (lambda_0 = 0 mode is constant)
  std::vector<double> lam(N), Phip(N);
  lam[0] = 0.0;
  Phip[0] = 0.0;
  for (int n = 1; n < N; ++n) {
    lam[n] = n * M_PI / s;
    Phip[n] = lam[n] * bessel_i_ratio(lam[n] * a);
  }

  // gap integrals C[m][n] = int_0^s Z_m cos(lambda_n u) du
  Eigen::MatrixXd C(M, N);
  for (int n = 0; n < N; ++n) C(0, n) = int_coshcos(k0, lam[n], s) / sqrtN[0];
  for (int m = 1; m < M; ++m)
    for (int n = 0; n < N; ++n) C(m, n) = int_coscos(km[m], lam[n], s) / sqrtN[m];

  std::vector<double> E(N, 0.5 * s);
  E[0] = s;

  // shared matching matrix
  Eigen::MatrixXcd sys(M, M);
  for (int m = 0; m < M; ++m) {
    for (int mp = 0; mp < M; ++mp) {
      double acc = 0.0;
      for (int n = 0; n < N; ++n) acc += Phip[n] / E[n] * C(m, n) * C(mp, n);
      sys(m, mp) = -acc;
    }
    sys(m, m) += Rp[m] * h;
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(sys);

  // ---- radiation problem (unit heave velocity) ----
  // particular solution phi_p = ((z+h)^2 - r^2/2) / (2 s)
  std::vector<double> P(N);
  P[0] = s * s / 6.0 - a * a / 4.0;
  for (int n = 1; n < N; ++n) P[n] = (n % 2 == 0 ? 1.0 : -1.0) / (lam[n] * lam[n]);

  Eigen::VectorXcd rhs_r(M);
  for (int m = 0; m < M; ++m) {
    double acc = 0.0;
    for (int n = 0; n < N; ++n) acc += Phip[n] / E[n] * C(m, n) * P[n];
    rhs_r(m) = -a / (2.0 * s) * C(m, 0) - acc;
  }
  const Eigen::VectorXcd amp_r = lu.solve(rhs_r);

  std::vector<cd> c(N);
  for (int n = 0; n < N; ++n) {
    cd acc = 0.0;
    for (int m = 0; m < M; ++m) acc += amp_r(m) * C(m, n);
    c[n] = (acc - P[n]) / E[n];
  }

  // base-pressure integrals: W_n = int_0^a Phi_n(r) r dr
  std::vector<double> W(N);
  W[0] = 0.5 * a * a;
  for (int n = 1; n < N; ++n) W[n] = a * bessel_i_ratio(lam[n] * a) / lam[n];

  cd base_int = (s * s * a * a / 2.0 - a * a * a * a / 8.0) / (2.0 * s);
  for (int n = 0; n < N; ++n) base_int += c[n] * (n % 2 == 0 ? 1.0 : -1.0) * W[n];
  const cd force_r = cd(0.0, -1.0) * omega * rho * 2.0 * M_PI * base_int;

  CylinderSolution out;
  // F_r = -(i omega A + B) for unit heave velocity
  out.added_mass = -force_r.imag() / omega;
  out.damping_pressure = -force_r.real();
  // radiated-energy flux of the propagating mode; exact for the converged
  // solution and nonnegative by construction
  out.damping = 4.0 * rho * omega * h * std::norm(amp_r(0)) / std::norm(h0);

  // ---- diffraction problem (m = 0 azimuthal component, unit amplitude) ----
  const cd beta = cd(0.0, 1.0) * g / omega * sqrtN[0] / std::cosh(k0 * h);
  const double j0a = std::cyl_bessel_j(0, k0 * a);
  const double j1a = std::cyl_bessel_j(1, k0 * a);

  Eigen::VectorXcd rhs_d = Eigen::VectorXcd::Zero(M);
  rhs_d(0) = beta * k0 * j1a * h;
  for (int m = 0; m < M; ++m) {
    double acc = 0.0;
    for (int n = 0; n < N; ++n) acc += Phip[n] / E[n] * C(m, n) * C(0, n);
    rhs_d(m) += beta * j0a * acc;
  }
  const Eigen::VectorXcd amp_d = lu.solve(rhs_d);

  cd base_d = 0.0;
  for (int n = 0; n < N; ++n) {
    cd acc = beta * j0a * C(0, n);
    for (int m = 0; m < M; ++m) acc += amp_d(m) * C(m, n);
    const cd dn = acc / E[n];
    base_d += dn * (n % 2 == 0 ? 1.0 : -1.0) * W[n];
  }
  out.excitation = cd(0.0, -1.0) * omega * rho * 2.0 * M_PI * base_d;

  // far-field amplitude of the scattered propagating mode, per unit
  // incident amplitude
  const cd a_s = cd(0.0, -1.0) * omega / g * amp_d(0) * std::cosh(k0 * h) / (sqrtN[0] * h0);
  out.scatter_strength = std::abs(a_s);
  return out;
}

}  // namespace wecfarm::hydro
