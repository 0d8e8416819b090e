#pragma once

// Periodic grid, real-to-complex transforms, and diagonal Fourier multipliers.
//
// Conventions: the torus is [-L, L) sampled at x_j = -L + j*h, h = 2L/N.
// A real field u is represented by coefficients c_m, m = 0..N/2, with
//     u(x) = sum_{m=-N/2}^{N/2-1} c_m exp(i xi_m x),   xi_m = pi m / L,
// and c_{-m} = conj(c_m). The m = N/2 (Nyquist) entry is kept only so the
// transform round-trips; every multiplier zeroes it.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <fftw3.h>

namespace gchn {

using complex = std::complex<double>;

class GridSpec {
 public:
  GridSpec(double half_length, std::size_t num_points)
      : half_length_(half_length), num_points_(num_points) {
    if (!(half_length > 0.0) || !std::isfinite(half_length))
      throw std::invalid_argument("GridSpec: half_length must be positive and finite");
    if (num_points < 16 || (num_points & (num_points - 1)) != 0)
      throw std::invalid_argument("GridSpec: num_points must be a power of two >= 16, got " +
                                  std::to_string(num_points));
  }

  double half_length() const { return half_length_; }
  std::size_t size() const { return num_points_; }
  std::size_t spectral_size() const { return num_points_ / 2 + 1; }
  double period() const { return 2.0 * half_length_; }
  double spacing() const { return period() / static_cast<double>(num_points_); }
  double wavenumber_step() const { return std::numbers::pi / half_length_; }
  double nyquist() const { return wavenumber(static_cast<std::ptrdiff_t>(num_points_ / 2)); }
  double wavenumber(std::ptrdiff_t m) const { return std::numbers::pi * static_cast<double>(m) / half_length_; }
  double x(std::size_t j) const { return -half_length_ + static_cast<double>(j) * spacing(); }

  /// xi_m for m = -N/2 .. N/2-1, in that order.
  std::vector<double> wavenumbers() const {
    std::vector<double> out(num_points_);
    const auto half = static_cast<std::ptrdiff_t>(num_points_ / 2);
    for (std::ptrdiff_t m = -half; m < half; ++m) out[static_cast<std::size_t>(m + half)] = wavenumber(m);
    return out;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  double half_length_;
  std::size_t num_points_;
};

inline GridSpec make_grid(double half_length, std::size_t num_points) { return GridSpec(half_length, num_points); }

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

/// Physical-space samples of a real periodic field.
class Field {
 public:
  explicit Field(GridSpec grid) : grid_(grid), samples_(grid.size(), 0.0) {}
  Field(GridSpec grid, std::vector<double> samples) : grid_(grid), samples_(std::move(samples)) {
    if (samples_.size() != grid_.size()) throw std::invalid_argument("Field: sample count does not match grid");
  }

  template <class F>
  static Field from_function(const GridSpec& grid, F&& f) {
    Field out(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) out.samples_[j] = f(grid.x(j));
    return out;
  }

  static Field constant(const GridSpec& grid, double c) { return Field(grid, std::vector<double>(grid.size(), c)); }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return samples_.size(); }
  std::span<const double> samples() const { return samples_; }
  std::span<double> samples() { return samples_; }
  double operator[](std::size_t j) const { return samples_[j]; }
  double& operator[](std::size_t j) { return samples_[j]; }

  Field& operator+=(const Field& o) {
    require_same_grid(grid_, o.grid_, "Field +=");
    for (std::size_t j = 0; j < samples_.size(); ++j) samples_[j] += o.samples_[j];
    return *this;
  }
  Field& operator-=(const Field& o) {
    require_same_grid(grid_, o.grid_, "Field -=");
    for (std::size_t j = 0; j < samples_.size(); ++j) samples_[j] -= o.samples_[j];
    return *this;
  }
  Field& operator*=(double a) {
    for (double& v : samples_) v *= a;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double a, Field f) { return f *= a; }
  friend Field operator*(Field f, double a) { return f *= a; }
  friend Field operator-(Field f) { return f *= -1.0; }

  bool all_finite() const {
    for (double v : samples_)
      if (!std::isfinite(v)) return false;
    return true;
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : samples_) m = std::max(m, std::abs(v));
    return m;
  }
  double mean() const {
    double s = 0.0;
    for (double v : samples_) s += v;
    return s / static_cast<double>(samples_.size());
  }

 private:
  GridSpec grid_;
  std::vector<double> samples_;
};

/// Pointwise product, no dealiasing.
inline Field pointwise_product(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "pointwise_product");
  Field out(a.grid());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
  return out;
}

inline Field pointwise_power(const Field& a, int power) {
  if (power < 0) throw std::invalid_argument("pointwise_power: negative power");
  Field out = Field::constant(a.grid(), 1.0);
  for (int i = 0; i < power; ++i)
    for (std::size_t j = 0; j < a.size(); ++j) out[j] *= a[j];
  return out;
}

/// Spectral coefficients c_m, m = 0..N/2, of a real field.
class Spectrum {
 public:
  explicit Spectrum(GridSpec grid) : grid_(grid), coeffs_(grid.spectral_size(), complex{}) {}
  Spectrum(GridSpec grid, std::vector<complex> coeffs) : grid_(grid), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != grid_.spectral_size())
      throw std::invalid_argument("Spectrum: coefficient count does not match grid");
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return coeffs_.size(); }
  std::span<const complex> coeffs() const { return coeffs_; }
  std::span<complex> coeffs() { return coeffs_; }
  complex operator[](std::size_t m) const { return coeffs_[m]; }
  complex& operator[](std::size_t m) { return coeffs_[m]; }
  double wavenumber(std::size_t m) const { return grid_.wavenumber(static_cast<std::ptrdiff_t>(m)); }

  Spectrum& operator+=(const Spectrum& o) {
    require_same_grid(grid_, o.grid_, "Spectrum +=");
    for (std::size_t m = 0; m < coeffs_.size(); ++m) coeffs_[m] += o.coeffs_[m];
    return *this;
  }
  Spectrum& operator-=(const Spectrum& o) {
    require_same_grid(grid_, o.grid_, "Spectrum -=");
    for (std::size_t m = 0; m < coeffs_.size(); ++m) coeffs_[m] -= o.coeffs_[m];
    return *this;
  }
  Spectrum& operator*=(double a) {
    for (complex& c : coeffs_) c *= a;
    return *this;
  }
  friend Spectrum operator+(Spectrum a, const Spectrum& b) { return a += b; }
  friend Spectrum operator-(Spectrum a, const Spectrum& b) { return a -= b; }
  friend Spectrum operator*(double a, Spectrum s) { return s *= a; }
  friend Spectrum operator*(Spectrum s, double a) { return s *= a; }

  /// Adds a*other in place.
  void axpy(double a, const Spectrum& other) {
    require_same_grid(grid_, other.grid_, "Spectrum axpy");
    for (std::size_t m = 0; m < coeffs_.size(); ++m) coeffs_[m] += a * other.coeffs_[m];
  }

  bool all_finite() const {
    for (const complex& c : coeffs_)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
  }

  /// Mean-square over one period, (1/2L) int |u|^2, by Parseval.
  double mean_square() const {
    const std::size_t half = grid_.size() / 2;
    double s = std::norm(coeffs_[0]) + std::norm(coeffs_[half]);
    for (std::size_t m = 1; m < half; ++m) s += 2.0 * std::norm(coeffs_[m]);
    return s;
  }

 private:
  GridSpec grid_;
  std::vector<complex> coeffs_;
};

namespace detail {

/// Number formatting for error messages.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class FftPlanCache {
 public:
  struct Plans {
    fftw_plan forward{};
    fftw_plan backward{};
  };

  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  const Plans& get(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    // Plans are created on scratch buffers and executed with the new-array
    // interface; FFTW_UNALIGNED makes them valid for any std::vector storage.
    std::vector<double> real(n);
    std::vector<complex> spec(n / 2 + 1);
    auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
    const int ni = static_cast<int>(n);
    Plans p;
    p.forward = fftw_plan_dft_r2c_1d(ni, real.data(), cplx, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.backward = fftw_plan_dft_c2r_1d(ni, cplx, real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (p.forward == nullptr || p.backward == nullptr) throw std::runtime_error("FFTW planning failed");
    return plans_.emplace(n, p).first->second;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;
  ~FftPlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

 private:
  FftPlanCache() = default;
  std::mutex mutex_;
  std::map<std::size_t, Plans> plans_;
};

/// Unnormalized r2c: out_m = sum_j in_j exp(-2 pi i j m / N).
inline void forward_fft(std::span<const double> in, std::span<complex> out) {
  const auto& plans = FftPlanCache::instance().get(in.size());
  // r2c does not modify its input.
  fftw_execute_dft_r2c(plans.forward, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
}

/// Unnormalized c2r; destroys `in`.
inline void backward_fft(std::span<complex> in, std::span<double> out) {
  const auto& plans = FftPlanCache::instance().get(out.size());
  fftw_execute_dft_c2r(plans.backward, reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

inline double alternating_sign(std::size_t m) { return (m & 1U) != 0U ? -1.0 : 1.0; }

}  // namespace detail

/// Forward transform in the grid's coefficient convention.
/// Throws std::domain_error on non-finite samples.
inline Spectrum to_spectral(const Field& f) {
  if (!f.all_finite()) throw std::domain_error("to_spectral: field contains NaN or Inf");
  const GridSpec& g = f.grid();
  Spectrum out(g);
  detail::forward_fft(f.samples(), out.coeffs());
  // x_0 = -L shifts every mode by exp(i xi_m L) = (-1)^m.
  const double inv_n = 1.0 / static_cast<double>(g.size());
  auto c = out.coeffs();
  for (std::size_t m = 0; m < c.size(); ++m) c[m] *= detail::alternating_sign(m) * inv_n;
  return out;
}

inline Field from_spectral(const Spectrum& s) {
  if (!s.all_finite()) throw std::domain_error("from_spectral: spectrum contains NaN or Inf");
  const GridSpec& g = s.grid();
  std::vector<complex> work(s.coeffs().begin(), s.coeffs().end());
  for (std::size_t m = 0; m < work.size(); ++m) work[m] *= detail::alternating_sign(m);
  Field out(g);
  detail::backward_fft(work, out.samples());
  return out;
}

namespace detail {

template <class Symbol>
complex eval_symbol(Symbol& symbol, double xi) {
  if constexpr (std::is_convertible_v<std::invoke_result_t<Symbol&, double>, double>)
    return complex(static_cast<double>(symbol(xi)), 0.0);
  else
    return complex(symbol(xi));
}

}  // namespace detail

/// Coefficient-wise product with a(xi). The symbol must be finite on the grid
/// and Hermitian, a(-xi) = conj(a(xi)), so the result is a real field.
template <class Symbol>
Spectrum apply_multiplier(const Spectrum& s, Symbol&& symbol) {
  Spectrum out = s;
  const GridSpec& g = s.grid();
  const std::size_t half = g.size() / 2;
  auto c = out.coeffs();
  for (std::size_t m = 0; m < half; ++m) {
    const double xi = g.wavenumber(static_cast<std::ptrdiff_t>(m));
    const complex a = detail::eval_symbol(symbol, xi);
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw std::domain_error("apply_multiplier: symbol is not finite at xi = " + detail::num(xi));
    if (m > 0) {
      const complex b = detail::eval_symbol(symbol, -xi);
      if (!std::isfinite(b.real()) || !std::isfinite(b.imag()))
        throw std::domain_error("apply_multiplier: symbol is not finite at xi = " + detail::num(-xi));
      if (std::abs(b - std::conj(a)) > 1e-12 * std::max(1.0, std::abs(a)))
        throw std::invalid_argument("apply_multiplier: symbol is not Hermitian; result would not be real");
    } else if (std::abs(a.imag()) > 1e-12 * std::max(1.0, std::abs(a))) {
      throw std::invalid_argument("apply_multiplier: symbol(0) must be real");
    }
    c[m] *= (m == 0 ? complex(a.real(), 0.0) : a);
  }
  c[half] = 0.0;
  return out;
}

template <class Symbol>
Field apply_multiplier(const Field& f, Symbol&& symbol) {
  return from_spectral(apply_multiplier(to_spectral(f), std::forward<Symbol>(symbol)));
}

/// Multiplies by (i xi)^order.
inline Spectrum derivative(const Spectrum& s, int order) {
  if (order < 1) throw std::invalid_argument("derivative: order must be positive");
  Spectrum out = s;
  const GridSpec& g = s.grid();
  const std::size_t half = g.size() / 2;
  auto c = out.coeffs();
  complex unit = 1.0;
  for (int i = 0; i < order; ++i) unit *= complex(0.0, 1.0);
  for (std::size_t m = 0; m < half; ++m) c[m] *= unit * std::pow(g.wavenumber(static_cast<std::ptrdiff_t>(m)), order);
  c[half] = 0.0;
  return out;
}

inline Field derivative(const Field& f, int order) { return from_spectral(derivative(to_spectral(f), order)); }

/// Index of the first discarded mode for a dealias fraction; modes with
/// |xi| >= fraction * Nyquist are removed.
inline std::size_t dealias_cutoff_index(const GridSpec& g, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("dealias: fraction must lie in (0, 1]");
  const double limit = fraction * static_cast<double>(g.size() / 2) * (1.0 - 1e-12);
  auto m = static_cast<std::size_t>(std::ceil(limit));
  return std::min(m, g.size() / 2);
}

inline void dealias_in_place(Spectrum& s, double fraction) {
  auto c = s.coeffs();
  for (std::size_t m = dealias_cutoff_index(s.grid(), fraction); m < c.size(); ++m) c[m] = 0.0;
}

inline Spectrum dealias(Spectrum s, double fraction) {
  dealias_in_place(s, fraction);
  return s;
}

inline Field dealias(const Field& f, double fraction) { return from_spectral(dealias(to_spectral(f), fraction)); }

/// Fraction of mean-square energy carried by modes at or above the cutoff.
inline double energy_above_cutoff(const Spectrum& s, double fraction) {
  const double total = s.mean_square();
  if (total == 0.0) return 0.0;
  const std::size_t half = s.grid().size() / 2;
  double above = 0.0;
  for (std::size_t m = dealias_cutoff_index(s.grid(), fraction); m <= half; ++m)
    above += (m == half ? 1.0 : 2.0) * std::norm(s[m]);
  return above / total;
}

}  // namespace gchn
