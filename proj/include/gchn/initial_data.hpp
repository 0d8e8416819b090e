#pragma once

// The non-uniform-dependence data: a band-limited bump phi, the high-frequency
// sequence f_n = 2^{-ns} phi(x) sin(17/12 2^n x), the low-frequency
// perturbation g_n = 12/17 2^{-n/k} phi(x), and the limiting value of
// ||g_n^k d_x f_n||_{B^s_{p,r}} as n grows.
//
// Everything is assembled from Fourier coefficients: the torus coefficient of
// the periodization of a function with transform F is F(xi_m) / (2L), so the
// spectral supports below are exact.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gchn/dynamics.hpp"
#include "gchn/littlewood_paley.hpp"
#include "gchn/spectral.hpp"

namespace gchn {

inline constexpr double kModulationRatio = 17.0 / 12.0;
inline constexpr double kBumpInner = 0.25;
inline constexpr double kBumpOuter = 0.5;
inline constexpr double kDefaultHalfLength = 512.0 * std::numbers::pi;
/// Largest tolerated |phi| on |x| >= 3L/4 (wrap-around contamination).
inline constexpr double kBumpTailTolerance = 1e-12;

/// phi-hat: even, 1 on |xi| <= 1/4, 0 on |xi| >= 1/2, smooth in between.
inline double bump_hat(double xi) { return smooth_step((kBumpOuter - std::abs(xi)) / (kBumpOuter - kBumpInner)); }

inline double modulation_frequency(int n) { return kModulationRatio * std::ldexp(1.0, n); }

/// Smallest power-of-two N >= 16 whose Nyquist exceeds (k+2)(17/12 2^n + 1/2).
inline std::size_t minimal_grid_points(double half_length, int k, int n_max) {
  const double need = (k + 2.0) * (modulation_frequency(n_max) + kBumpOuter);
  std::size_t n = 16;
  while (std::numbers::pi * static_cast<double>(n) / (2.0 * half_length) <= need) n *= 2;
  return n;
}

inline void require_resolvable(const GridSpec& grid, int k, int n) {
  const double need = (k + 2.0) * (modulation_frequency(n) + kBumpOuter);
  if (grid.nyquist() <= need)
    throw std::invalid_argument("n = " + std::to_string(n) + " with k = " + std::to_string(k) +
                                " is not resolvable on N = " + std::to_string(grid.size()) +
                                "; minimal grid is N = " +
                                std::to_string(minimal_grid_points(grid.half_length(), k, n)) +
                                " at half-length " + detail::num(grid.half_length()));
}

enum class DecayCheck { enforce, skip };

/// max |phi(x_j)| over |x_j| >= 3L/4.
inline double bump_tail(const Field& phi) {
  const GridSpec& g = phi.grid();
  double m = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    if (std::abs(g.x(j)) >= 0.75 * g.half_length()) m = std::max(m, std::abs(phi[j]));
  return m;
}

inline Spectrum phi_spectrum(const GridSpec& grid) {
  if (grid.wavenumber_step() > 0.125)
    throw std::invalid_argument("build_phi: wavenumber spacing " + detail::num(grid.wavenumber_step()) +
                                " exceeds 1/8; the bump transition band is unresolved");
  Spectrum s(grid);
  const double scale = 1.0 / grid.period();
  for (std::size_t m = 0; m + 1 < s.size(); ++m) s[m] = scale * bump_hat(s.wavenumber(m));
  return s;
}

inline Field build_phi(const GridSpec& grid, DecayCheck check = DecayCheck::enforce) {
  Field phi = from_spectral(phi_spectrum(grid));
  if (check == DecayCheck::enforce) {
    const double tail = bump_tail(phi);
    if (tail >= kBumpTailTolerance)
      throw std::invalid_argument("build_phi: |phi| = " + detail::num(tail) +
                                  " near the period boundary; increase the half-length");
  }
  return phi;
}

/// Coefficients of f_n. `planned_k` sets the dealias margin that the grid
/// must provide.
inline Spectrum fn_spectrum(int n, double s, const GridSpec& grid, int planned_k) {
  if (n < 1) throw std::invalid_argument("build_fn: n must be >= 1");
  require_resolvable(grid, planned_k, n);
  const double lambda = modulation_frequency(n);
  const double amp = std::pow(2.0, -n * s) / grid.period();
  Spectrum out(grid);
  // sin(lambda x) phi(x) has transform (phi-hat(xi - lambda) - phi-hat(xi + lambda)) / (2i).
  for (std::size_t m = 0; m + 1 < out.size(); ++m) {
    const double xi = out.wavenumber(m);
    const double diff = bump_hat(xi - lambda) - bump_hat(xi + lambda);
    out[m] = complex(0.0, -0.5 * amp * diff);
  }
  return out;
}

inline Field build_fn(int n, double s, const GridSpec& grid, int planned_k) {
  return from_spectral(fn_spectrum(n, s, grid, planned_k));
}

inline Field build_fn(int n, const BesovIndex& idx, const GridSpec& grid, int planned_k) {
  return build_fn(n, idx.s, grid, planned_k);
}

inline double gn_amplitude(int n, int k) { return (12.0 / 17.0) * std::pow(2.0, -static_cast<double>(n) / k); }

inline Spectrum gn_spectrum(int n, int k, const GridSpec& grid) {
  if (k < 1) throw std::invalid_argument("build_gn: k must be >= 1");
  return gn_amplitude(n, k) * phi_spectrum(grid);
}

inline Field build_gn(int n, int k, const GridSpec& grid) { return from_spectral(gn_spectrum(n, k, grid)); }

/// First-order Taylor coefficient of the solution at t = 0: the full
/// right-hand side evaluated at u0.
inline Field v0(const Field& u0, int k) { return rhs(u0, k); }
inline Spectrum v0(const Spectrum& u0, int k) { return rhs(u0, k, default_dealias_fraction(k)); }

/// c_p = ((1/2pi) int_0^{2pi} |cos x|^p dx)^{1/p} = (Gamma((p+1)/2) / (sqrt(pi) Gamma(p/2+1)))^{1/p}.
inline double cos_moment(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("cos_moment: p must be >= 1");
  if (std::isinf(p)) return 1.0;
  const double mean = std::exp(std::lgamma(0.5 * (p + 1.0)) - std::lgamma(0.5 * p + 1.0)) / std::sqrt(std::numbers::pi);
  return std::pow(mean, 1.0 / p);
}

struct LimitConstant {
  double value = 0.0;
  double cos_moment = 0.0;
  double phi_power_norm = 0.0;
  /// Set when p = inf and c_inf = max|cos| = 1 was used.
  bool limiting_convention = false;
};

/// (12/17)^{k-1} c_p ||phi^{k+1}||_{L^p}.
inline LimitConstant riemann_limit_constant(int k, double p, const Field& phi) {
  if (k < 1) throw std::invalid_argument("riemann_limit_constant: k must be >= 1");
  LimitConstant out;
  out.limiting_convention = std::isinf(p);
  out.cos_moment = cos_moment(p);
  out.phi_power_norm = lp_norm(pointwise_power(phi, k + 1), p);
  out.value = std::pow(12.0 / 17.0, k - 1) * out.cos_moment * out.phi_power_norm;
  return out;
}

/// g_n^k d_x f_n, the leading term of the separation.
inline Field lower_bound_term(const Field& gn, const Field& fn, int k) {
  return pointwise_product(pointwise_power(gn, k), derivative(fn, 1));
}

}  // namespace gchn
