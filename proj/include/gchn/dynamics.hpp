#pragma once

// Nonlocal evolution form of the generalized Camassa-Holm-Novikov equation
//
//   u_t = -u^k u_x + P(D)((2k-1)/2 u^{k-1} u_x^2 + u^{k+1}) + J(D)((k-1)/2 u^{k-2} u_x^3)
//
// with P(D) = -d/dx (1 - d^2/dx^2)^{-1} and J(D) = -(1 - d^2/dx^2)^{-1}, solved
// pseudospectrally on the torus with classical RK4.
//
// The integrator advances the displacement w(t) = u(t) - u0 rather than u
// itself. For the small-amplitude, high-frequency data used in the
// experiments the second-order part of u(t) - u0 sits far below the rounding
// level of u0, but well above the rounding level of w.

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gchn/quadrature.hpp"
#include "gchn/spectral.hpp"

namespace gchn {

// ---------------------------------------------------------------------------
// Linear operators

inline double helmholtz_symbol(double xi) { return 1.0 / (1.0 + xi * xi); }
inline complex p_symbol(double xi) { return complex(0.0, -xi / (1.0 + xi * xi)); }
inline double j_symbol(double xi) { return -1.0 / (1.0 + xi * xi); }

/// (1 - d^2/dx^2)^{-1}
inline Spectrum helmholtz_inverse(const Spectrum& f) { return apply_multiplier(f, helmholtz_symbol); }
inline Field helmholtz_inverse(const Field& f) { return from_spectral(helmholtz_inverse(to_spectral(f))); }

inline Spectrum p_operator(const Spectrum& f) { return apply_multiplier(f, p_symbol); }
inline Field p_operator(const Field& f) { return from_spectral(p_operator(to_spectral(f))); }

inline Spectrum j_operator(const Spectrum& f) { return apply_multiplier(f, j_symbol); }
inline Field j_operator(const Field& f) { return from_spectral(j_operator(to_spectral(f))); }

/// m = u - u_xx
inline Spectrum momentum(const Spectrum& u) {
  return apply_multiplier(u, [](double xi) { return 1.0 + xi * xi; });
}
inline Field momentum(const Field& u) { return from_spectral(momentum(to_spectral(u))); }

/// Periodized Green's function sum_{|m| <= images} exp(-|z - 2Lm|) / 2.
inline double periodized_green(double z, double half_length, int images = 20) {
  double s = 0.0;
  for (int m = -images; m <= images; ++m) s += 0.5 * std::exp(-std::abs(z - 2.0 * half_length * m));
  return s;
}

/// (G_per * f)(x_j) by composite Gauss-Legendre quadrature of
/// int_0^{2L} G_per(z) f(x_j - z) dz. The kink of G_per sits at the interval
/// ends, so each panel integrand is smooth. Independent of the transform path;
/// used to cross-check helmholtz_inverse.
template <class F>
Field helmholtz_inverse_green(const GridSpec& grid, F&& f, int images = 20, int panels = 64) {
  const auto rule = gauss_legendre(16);
  const double period = grid.period();
  const double width = period / panels;
  std::vector<double> nodes, weights;
  nodes.reserve(static_cast<std::size_t>(panels) * rule.nodes.size());
  for (int p = 0; p < panels; ++p) {
    const double a = p * width;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double z = a + 0.5 * width * (rule.nodes[q] + 1.0);
      nodes.push_back(z);
      weights.push_back(0.5 * width * rule.weights[q] * periodized_green(z, grid.half_length(), images));
    }
  }
  Field out(grid);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.x(j);
    double acc = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) acc += weights[q] * f(x - nodes[q]);
    out[j] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

enum class Integrator { rk4 };
enum class UnresolvedPolicy { error, warn };

inline double default_dealias_fraction(int k) { return 2.0 / (k + 2.0); }

struct SolverConfig {
  int k = 1;
  double dt = 1e-3;
  double horizon = 0.1;
  /// 0 selects 2/(k+2).
  double dealias_fraction = 0.0;
  Integrator integrator = Integrator::rk4;
  int record_every = 1;
  UnresolvedPolicy on_unresolved = UnresolvedPolicy::error;
  /// Largest tolerated energy fraction at or above the dealias cutoff.
  double resolution_tolerance = 1e-10;
  /// When false, trajectories keep displacements and diagnostics only.
  bool store_states = true;

  double fraction() const { return dealias_fraction > 0.0 ? dealias_fraction : default_dealias_fraction(k); }

  void validate() const {
    if (k < 1) throw std::invalid_argument("SolverConfig: k must be >= 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("SolverConfig: dt must be positive");
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
      throw std::invalid_argument("SolverConfig: horizon must be nonnegative");
    if (record_every < 1) throw std::invalid_argument("SolverConfig: record_every must be positive");
    const double f = fraction();
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("SolverConfig: dealias_fraction must lie in (0, 1]");
  }
};

/// Advective CFL heuristic 0.5 dx / max(1, max|u|^k).
inline double stability_bound(const Field& u0, int k) {
  return 0.5 * u0.grid().spacing() / std::max(1.0, std::pow(u0.max_abs(), k));
}

// ---------------------------------------------------------------------------
// Right-hand side

/// Reusable evaluator of the right-hand side; owns scratch buffers, so one
/// instance per thread.
class RightHandSide {
 public:
  RightHandSide(const GridSpec& grid, int k, double dealias_fraction)
      : grid_(grid), k_(k), fraction_(dealias_fraction), cutoff_(dealias_cutoff_index(grid, dealias_fraction)) {
    if (k < 1) throw std::invalid_argument("RightHandSide: k must be >= 1");
    const std::size_t n = grid.size();
    const std::size_t nc = grid.spectral_size();
    u_.resize(n);
    ux_.resize(n);
    adv_.resize(n);
    a_.resize(n);
    b_.resize(n);
    spec_u_.resize(nc);
    spec_ux_.resize(nc);
    spec_adv_.resize(nc);
    spec_a_.resize(nc);
    spec_b_.resize(nc);
    xi_.resize(nc);
    for (std::size_t m = 0; m < nc; ++m) xi_[m] = grid.wavenumber(static_cast<std::ptrdiff_t>(m));
  }

  int k() const { return k_; }
  double dealias_fraction() const { return fraction_; }
  const GridSpec& grid() const { return grid_; }

  void operator()(const Spectrum& u_hat, Spectrum& out) {
    require_same_grid(u_hat.grid(), grid_, "rhs");
    require_same_grid(out.grid(), grid_, "rhs");
    const std::size_t n = grid_.size();
    const std::size_t nc = grid_.spectral_size();
    const double inv_n = 1.0 / static_cast<double>(n);

    // Dealiased u and u_x, with the (-1)^m phase folded in.
    for (std::size_t m = 0; m < nc; ++m) {
      const complex c = m < cutoff_ ? u_hat[m] * detail::alternating_sign(m) : complex{};
      spec_u_[m] = c;
      spec_ux_[m] = complex(0.0, xi_[m]) * c;
    }
    detail::backward_fft(spec_u_, u_);
    detail::backward_fft(spec_ux_, ux_);

    const double c_a = (2.0 * k_ - 1.0) / 2.0;
    const double c_b = (k_ - 1.0) / 2.0;
    const bool has_b = k_ >= 2;
    for (std::size_t j = 0; j < n; ++j) {
      const double u = u_[j];
      const double ux = ux_[j];
      double pk1 = 1.0;  // u^{k-1}
      for (int i = 1; i < k_; ++i) pk1 *= u;
      adv_[j] = pk1 * u * ux;
      a_[j] = pk1 * (c_a * ux * ux + u * u);
      if (has_b) {
        double pk2 = 1.0;  // u^{k-2}
        for (int i = 2; i < k_; ++i) pk2 *= u;
        b_[j] = c_b * pk2 * ux * ux * ux;
      }
    }
    detail::forward_fft(adv_, spec_adv_);
    detail::forward_fft(a_, spec_a_);
    if (has_b) detail::forward_fft(b_, spec_b_);

    auto c = out.coeffs();
    for (std::size_t m = 0; m < nc; ++m) {
      if (m >= cutoff_) {
        c[m] = 0.0;
        continue;
      }
      const double xi = xi_[m];
      const double h = 1.0 / (1.0 + xi * xi);
      complex v = -spec_adv_[m] + complex(0.0, -xi * h) * spec_a_[m];
      if (has_b) v += -h * spec_b_[m];
      c[m] = v * (detail::alternating_sign(m) * inv_n);
    }
  }

  Spectrum operator()(const Spectrum& u_hat) {
    Spectrum out(grid_);
    (*this)(u_hat, out);
    return out;
  }

 private:
  GridSpec grid_;
  int k_;
  double fraction_;
  std::size_t cutoff_;
  std::vector<double> u_, ux_, adv_, a_, b_;
  std::vector<complex> spec_u_, spec_ux_, spec_adv_, spec_a_, spec_b_;
  std::vector<double> xi_;
};

inline Spectrum rhs(const Spectrum& u, int k, double dealias_fraction) {
  RightHandSide f(u.grid(), k, dealias_fraction);
  return f(u);
}

inline Field rhs(const Field& u, int k, double dealias_fraction) {
  return from_spectral(rhs(to_spectral(u), k, dealias_fraction));
}

inline Field rhs(const Field& u, int k) { return rhs(u, k, default_dealias_fraction(k)); }

// ---------------------------------------------------------------------------
// Diagnostics and trajectories

/// int (u^2 + u_x^2) dx over one period, via Parseval.
inline double h1_quantity(const Spectrum& u) {
  const GridSpec& g = u.grid();
  const std::size_t half = g.size() / 2;
  double s = std::norm(u[0]);
  for (std::size_t m = 1; m < half; ++m) {
    const double xi = g.wavenumber(static_cast<std::ptrdiff_t>(m));
    s += 2.0 * (1.0 + xi * xi) * std::norm(u[m]);
  }
  s += (1.0 + g.nyquist() * g.nyquist()) * std::norm(u[half]);
  return g.period() * s;
}

struct Diagnostics {
  double h1 = 0.0;
  double mean = 0.0;
  double max_abs = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> states;
  /// S_t(u0) - u0 as integrated, without the rounding of adding u0 back.
  std::vector<Spectrum> displacements;
  std::vector<Diagnostics> diagnostics;

  std::size_t size() const { return times.size(); }
};

class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double time, Field last_state, Trajectory partial)
      : std::runtime_error("non-finite state after t = " + detail::num(time)),
        time_(time),
        last_state_(std::move(last_state)),
        partial_(std::move(partial)) {}

  /// Time of the last finite state.
  double time() const { return time_; }
  const Field& last_state() const { return last_state_; }
  const Trajectory& partial() const { return partial_; }

 private:
  double time_;
  Field last_state_;
  Trajectory partial_;
};

/// Additive forcing F(t) in spectral space.
using Forcing = std::function<Spectrum(double)>;

// ---------------------------------------------------------------------------
// Time stepping

/// Classical RK4 on the displacement w = u - base.
class Rk4Stepper {
 public:
  Rk4Stepper(Spectrum base, int k, double dealias_fraction, Forcing forcing = {})
      : base_(std::move(base)),
        rhs_(base_.grid(), k, dealias_fraction),
        fraction_(dealias_fraction),
        forcing_(std::move(forcing)),
        k1_(base_.grid()),
        k2_(base_.grid()),
        k3_(base_.grid()),
        k4_(base_.grid()),
        stage_(base_.grid()),
        tmp_(base_.grid()) {}

  const Spectrum& base() const { return base_; }

  /// w <- w + RK4 increment over [t, t + dt].
  void advance(Spectrum& w, double t, double dt) {
    eval(w, nullptr, 0.0, t, k1_);
    eval(w, &k1_, 0.5 * dt, t + 0.5 * dt, k2_);
    eval(w, &k2_, 0.5 * dt, t + 0.5 * dt, k3_);
    eval(w, &k3_, dt, t + dt, k4_);
    auto wc = w.coeffs();
    const double c = dt / 6.0;
    for (std::size_t m = 0; m < wc.size(); ++m) wc[m] += c * (k1_[m] + 2.0 * k2_[m] + 2.0 * k3_[m] + k4_[m]);
  }

 private:
  void eval(const Spectrum& w, const Spectrum* dir, double scale, double t, Spectrum& out) {
    auto sc = stage_.coeffs();
    for (std::size_t m = 0; m < sc.size(); ++m) {
      complex d = w[m];
      if (dir != nullptr) d += scale * (*dir)[m];
      sc[m] = base_[m] + d;
    }
    rhs_(stage_, out);
    if (forcing_) {
      tmp_ = forcing_(t);
      dealias_in_place(tmp_, fraction_);
      out += tmp_;
    }
  }

  Spectrum base_;
  RightHandSide rhs_;
  double fraction_;
  Forcing forcing_;
  Spectrum k1_, k2_, k3_, k4_, stage_, tmp_;
};

namespace detail {

inline void check_resolved(const Spectrum& u0, const SolverConfig& cfg) {
  const double above = energy_above_cutoff(u0, cfg.fraction());
  if (above > cfg.resolution_tolerance) {
    const std::string msg = "initial data not resolved: energy fraction " + detail::num(above) +
                            " at or above the dealias cutoff (tolerance " +
                            detail::num(cfg.resolution_tolerance) + ")";
    if (cfg.on_unresolved == UnresolvedPolicy::error) throw std::invalid_argument(msg);
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
  }
}

inline void check_stable(const Field& u0, double dt, int k) {
  const double bound = stability_bound(u0, k);
  if (dt > bound * (1.0 + 1e-12))
    throw std::invalid_argument("time step " + detail::num(dt) + " exceeds stability bound " +
                                detail::num(bound));
}

inline void record(Trajectory& traj, double t, const Field& u0, const Spectrum& base, const Spectrum& w,
                   bool store_state = true) {
  Field state = u0 + from_spectral(w);
  Spectrum u_hat = base + w;
  traj.diagnostics.push_back({h1_quantity(u_hat), state.mean(), state.max_abs()});
  traj.times.push_back(t);
  if (store_state) traj.states.push_back(std::move(state));
  traj.displacements.push_back(w);
}

/// Steps w over [t0, t1] in `steps` equal substeps; throws BlowUpError.
inline void integrate_segment(Rk4Stepper& stepper, Spectrum& w, double t0, double t1, long steps, const Field& u0,
                              Trajectory& traj) {
  const double h = (t1 - t0) / static_cast<double>(steps);
  for (long i = 0; i < steps; ++i) {
    const double t = t0 + h * static_cast<double>(i);
    Spectrum previous = w;
    stepper.advance(w, t, h);
    if (!w.all_finite()) throw BlowUpError(t, u0 + from_spectral(previous), std::move(traj));
  }
}

}  // namespace detail

/// One RK4 step of size cfg.dt from u.
inline Field step(const Field& u, const SolverConfig& cfg, const Forcing& forcing = {}, double t = 0.0) {
  cfg.validate();
  detail::check_stable(u, cfg.dt, cfg.k);
  Rk4Stepper stepper(to_spectral(u), cfg.k, cfg.fraction(), forcing);
  Spectrum w(u.grid());
  stepper.advance(w, t, cfg.dt);
  if (!w.all_finite()) throw BlowUpError(t, u, Trajectory{});
  return u + from_spectral(w);
}

/// Snapshots every cfg.record_every steps of size <= cfg.dt up to cfg.horizon
/// (the final state is always recorded).
inline Trajectory evolve(const Field& u0, const SolverConfig& cfg, const Forcing& forcing = {}) {
  cfg.validate();
  detail::check_stable(u0, cfg.dt, cfg.k);
  const Spectrum base = to_spectral(u0);
  detail::check_resolved(base, cfg);

  Trajectory traj;
  Spectrum w(u0.grid());
  detail::record(traj, 0.0, u0, base, w, cfg.store_states);
  if (cfg.horizon == 0.0) return traj;

  const long steps = std::max(1L, static_cast<long>(std::ceil(cfg.horizon / cfg.dt - 1e-9)));
  const double h = cfg.horizon / static_cast<double>(steps);
  Rk4Stepper stepper(base, cfg.k, cfg.fraction(), forcing);
  for (long i = 0; i < steps; ++i) {
    const double t = h * static_cast<double>(i);
    detail::integrate_segment(stepper, w, t, t + h, 1, u0, traj);
    const bool last = i + 1 == steps;
    if (last || (i + 1) % cfg.record_every == 0) detail::record(traj, last ? cfg.horizon : t + h, u0, base, w, cfg.store_states);
  }
  return traj;
}

/// Snapshots at exactly the requested times (nondecreasing, >= 0). Each
/// interval between consecutive times is split into equal steps <= cfg.dt.
inline Trajectory evolve_at(const Field& u0, const SolverConfig& cfg, std::span<const double> times,
                            const Forcing& forcing = {}) {
  cfg.validate();
  detail::check_stable(u0, cfg.dt, cfg.k);
  const Spectrum base = to_spectral(u0);
  detail::check_resolved(base, cfg);

  Trajectory traj;
  Spectrum w(u0.grid());
  Rk4Stepper stepper(base, cfg.k, cfg.fraction(), forcing);
  double t = 0.0;
  for (double target : times) {
    if (!(target >= t) || !std::isfinite(target))
      throw std::invalid_argument("evolve_at: output times must be finite, nonnegative and nondecreasing");
    if (target > t) {
      const long steps = std::max(1L, static_cast<long>(std::ceil((target - t) / cfg.dt - 1e-9)));
      detail::integrate_segment(stepper, w, t, target, steps, u0, traj);
      t = target;
    }
    detail::record(traj, target, u0, base, w, cfg.store_states);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Manufactured solutions

struct ManufacturedSolution {
  std::function<double(double x, double t)> value;
  std::function<double(double x, double t)> time_derivative;
};

/// F(t) = d/dt u_ex - rhs(u_ex), so that u_ex solves u_t = rhs(u) + F.
inline Forcing manufactured_forcing(ManufacturedSolution exact, const GridSpec& grid, int k, double dealias_fraction) {
  auto evaluator = std::make_shared<RightHandSide>(grid, k, dealias_fraction);
  return [exact = std::move(exact), grid, evaluator](double t) {
    const Field u = Field::from_function(grid, [&](double x) { return exact.value(x, t); });
    const Field ut = Field::from_function(grid, [&](double x) { return exact.time_derivative(x, t); });
    return to_spectral(ut) - (*evaluator)(to_spectral(u));
  };
}

}  // namespace gchn
