#pragma once

// Smooth dyadic partition of unity on the grid wavenumbers and the
// Lebesgue / Besov / Lipschitz norms built on it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gchn/spectral.hpp"

namespace gchn {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, h(t) + h(1-t) = 1.
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

/// Low-frequency cutoff: 1 on |xi| <= 3/4, 0 on |xi| >= 4/3.
inline double lp_chi(double xi) {
  constexpr double inner = 3.0 / 4.0;
  constexpr double outer = 4.0 / 3.0;
  return smooth_step((outer - std::abs(xi)) / (outer - inner));
}

/// Annulus profile chi(xi/2) - chi(xi), supported in 3/4 <= |xi| <= 8/3.
inline double lp_phi(double xi) { return lp_chi(0.5 * xi) - lp_chi(xi); }

struct BesovIndex {
  double s = 0.0;
  double p = 2.0;
  double r = 2.0;

  BesovIndex() = default;
  BesovIndex(double s_, double p_, double r_) : s(s_), p(p_), r(r_) { validate(); }

  void validate() const {
    if (!std::isfinite(s)) throw std::invalid_argument("BesovIndex: s must be finite");
    if (!(p >= 1.0)) throw std::invalid_argument("BesovIndex: p must be >= 1");
    if (!(r >= 1.0)) throw std::invalid_argument("BesovIndex: r must be >= 1");
  }
  bool p_is_inf() const { return std::isinf(p); }
  bool r_is_inf() const { return std::isinf(r); }
  BesovIndex with_s(double s_new) const { return {s_new, p, r}; }
};

/// chi and phi(2^-j .) sampled on the nonnegative grid wavenumbers m = 0..N/2.
/// Each phi block also stores the index range [lo, hi) where it is nonzero.
class DyadicFilterBank {
 public:
  explicit DyadicFilterBank(const GridSpec& grid) : grid_(grid) {
    const std::size_t count = grid.spectral_size();
    chi_.resize(count);
    for (std::size_t m = 0; m < count; ++m) {
      chi_[m] = lp_chi(grid.wavenumber(static_cast<std::ptrdiff_t>(m)));
      if (chi_[m] != 0.0) chi_end_ = m + 1;
    }
    // Largest j whose annulus 2^j [3/4, 8/3] starts below Nyquist. Then
    // chi(2^-(j_max+1) xi) = 1 on the whole band, so the telescoped sum is 1.
    const double nyq = grid.nyquist();
    j_max_ = -1;
    while (0.75 * std::ldexp(1.0, j_max_ + 1) < nyq) ++j_max_;
    phi_.resize(static_cast<std::size_t>(j_max_ + 1));
    ranges_.resize(phi_.size());
    for (int j = 0; j <= j_max_; ++j) {
      auto& row = phi_[static_cast<std::size_t>(j)];
      row.resize(count);
      std::size_t lo = count, hi = 0;
      const double scale = std::ldexp(1.0, -j);
      for (std::size_t m = 0; m < count; ++m) {
        const double xi = scale * grid.wavenumber(static_cast<std::ptrdiff_t>(m));
        row[m] = lp_chi(0.5 * xi) - lp_chi(xi);
        if (row[m] != 0.0) {
          lo = std::min(lo, m);
          hi = m + 1;
        }
      }
      ranges_[static_cast<std::size_t>(j)] = {std::min(lo, hi), hi};
    }
  }

  const GridSpec& grid() const { return grid_; }
  int j_max() const { return j_max_; }
  std::span<const double> chi_symbol() const { return chi_; }
  std::span<const double> phi_symbol(int j) const {
    check_block(j);
    return phi_[static_cast<std::size_t>(j)];
  }

  /// Symbol of block j on the grid, j = -1 for chi.
  std::span<const double> block_symbol(int j) const { return j == -1 ? chi_symbol() : phi_symbol(j); }

  /// [lo, hi) index range outside which the block symbol vanishes.
  std::pair<std::size_t, std::size_t> block_support(int j) const {
    if (j == -1) return {0, chi_end_};
    check_block(j);
    return ranges_[static_cast<std::size_t>(j)];
  }

 private:
  void check_block(int j) const {
    if (j < 0 || j > j_max_)
      throw std::out_of_range("DyadicFilterBank: block " + std::to_string(j) + " not resolvable on grid (j_max = " +
                              std::to_string(j_max_) + ")");
  }

  GridSpec grid_;
  std::vector<double> chi_;
  std::vector<std::vector<double>> phi_;
  std::vector<std::pair<std::size_t, std::size_t>> ranges_;
  std::size_t chi_end_ = 0;
  int j_max_ = -1;
};

inline DyadicFilterBank build_filter_bank(const GridSpec& grid) { return DyadicFilterBank(grid); }

/// Delta_j in spectral space; zero for j <= -2.
inline Spectrum dyadic_block(const Spectrum& s, int j, const DyadicFilterBank& bank) {
  require_same_grid(s.grid(), bank.grid(), "dyadic_block");
  Spectrum out(s.grid());
  if (j <= -2) return out;
  if (j > bank.j_max())
    throw std::out_of_range("dyadic_block: block " + std::to_string(j) + " exceeds j_max " +
                            std::to_string(bank.j_max()));
  const auto symbol = bank.block_symbol(j);
  const auto [lo, hi] = bank.block_support(j);
  const std::size_t half = s.grid().size() / 2;
  for (std::size_t m = lo; m < hi && m < half; ++m) out[m] = symbol[m] * s[m];
  return out;
}

inline Field dyadic_block(const Field& f, int j, const DyadicFilterBank& bank) {
  return from_spectral(dyadic_block(to_spectral(f), j, bank));
}

/// (int |f|^p dx)^(1/p) over one period by the rectangle rule; max for p = inf.
inline double lp_norm(std::span<const double> samples, double spacing, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  double peak = 0.0;
  for (double v : samples) peak = std::max(peak, std::abs(v));
  if (std::isinf(p) || peak == 0.0) return peak;
  double acc = 0.0;
  if (p == 2.0) {
    for (double v : samples) acc += (v / peak) * (v / peak);
    return peak * std::sqrt(acc * spacing);
  }
  for (double v : samples) acc += std::pow(std::abs(v) / peak, p);
  return peak * std::pow(acc * spacing, 1.0 / p);
}

inline double lp_norm(const Field& f, double p) { return lp_norm(f.samples(), f.grid().spacing(), p); }

/// l^r norm of a nonnegative sequence; max for r = inf.
inline double lr_aggregate(std::span<const double> terms, double r) {
  double peak = 0.0;
  for (double t : terms) peak = std::max(peak, t);
  if (std::isinf(r) || peak == 0.0) return peak;
  double acc = 0.0;
  for (double t : terms) acc += std::pow(t / peak, r);
  return peak * std::pow(acc, 1.0 / r);
}

/// 2^{js} ||Delta_j f||_{L^p} for j = -1 .. j_max (index 0 holds j = -1).
inline std::vector<double> besov_terms(const Spectrum& s, const BesovIndex& idx, const DyadicFilterBank& bank) {
  require_same_grid(s.grid(), bank.grid(), "besov_terms");
  idx.validate();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(bank.j_max() + 2));
  const std::size_t half = s.grid().size() / 2;
  for (int j = -1; j <= bank.j_max(); ++j) {
    const auto [lo, hi] = bank.block_support(j);
    bool any = false;
    for (std::size_t m = lo; m < hi && m < half && !any; ++m) any = s[m] != complex{};
    if (!any) {
      terms.push_back(0.0);
      continue;
    }
    const Field block = from_spectral(dyadic_block(s, j, bank));
    terms.push_back(std::pow(2.0, j * idx.s) * lp_norm(block, idx.p));
  }
  return terms;
}

inline double besov_norm(const Spectrum& s, const BesovIndex& idx, const DyadicFilterBank& bank) {
  return lr_aggregate(besov_terms(s, idx, bank), idx.r);
}

inline double besov_norm(const Field& f, const BesovIndex& idx, const DyadicFilterBank& bank) {
  return besov_norm(to_spectral(f), idx, bank);
}

/// ||f||_inf + ||f_x||_inf.
inline double lipschitz_norm(const Field& f) { return f.max_abs() + derivative(f, 1).max_abs(); }

inline double lipschitz_norm(const Spectrum& s) {
  return from_spectral(s).max_abs() + from_spectral(derivative(s, 1)).max_abs();
}

}  // namespace gchn
