#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gchn/initial_data.hpp"
#include "gchn/spectral.hpp"

namespace {

using gchn::complex;
using gchn::Field;
using gchn::GridSpec;
using gchn::Spectrum;
constexpr double pi = std::numbers::pi;

Field random_field(const GridSpec& g, std::mt19937_64& rng, int max_mode) {
  std::normal_distribution<double> nd;
  Field f(g);
  for (int m = 0; m <= max_mode; ++m) {
    const double a = nd(rng), b = nd(rng);
    for (std::size_t j = 0; j < g.size(); ++j) f[j] += a * std::cos(g.wavenumber(m) * g.x(j)) + b * std::sin(g.wavenumber(m) * g.x(j));
  }
  return f;
}

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

TEST(GridSpec, WavenumbersForLongPeriod) {
  const GridSpec g = gchn::make_grid(32.0 * pi, 256);
  EXPECT_NEAR(g.wavenumber_step(), 1.0 / 32.0, 1e-15);
  EXPECT_NEAR(g.nyquist(), 4.0, 1e-13);
  EXPECT_NEAR(g.spacing() * 256, 2.0 * g.half_length(), 1e-12);
}

TEST(GridSpec, IntegerWavenumbersOnTwoPi) {
  const GridSpec g = gchn::make_grid(pi, 16);
  const auto xi = g.wavenumbers();
  ASSERT_EQ(xi.size(), 16U);
  for (int m = -8; m < 8; ++m) EXPECT_NEAR(xi[static_cast<std::size_t>(m + 8)], m, 1e-14);
  // antisymmetric apart from the Nyquist entry
  for (std::size_t i = 1; i < 16; ++i) EXPECT_NEAR(xi[i], -xi[16 - i], 1e-14);
}

TEST(GridSpec, RejectsBadParameters) {
  EXPECT_THROW(gchn::make_grid(32.0 * pi, 255), std::invalid_argument);
  EXPECT_THROW(gchn::make_grid(pi, 8), std::invalid_argument);
  EXPECT_THROW(gchn::make_grid(0.0, 64), std::invalid_argument);
  EXPECT_THROW(gchn::make_grid(-1.0, 64), std::invalid_argument);
}

TEST(Transform, CosineHasHalfCoefficientsAtUnitWavenumber) {
  const GridSpec g(pi, 32);
  const Spectrum s = gchn::to_spectral(Field::from_function(g, [](double x) { return std::cos(x); }));
  for (std::size_t m = 0; m < s.size(); ++m) {
    const complex expect = m == 1 ? complex(0.5, 0.0) : complex{};
    EXPECT_NEAR(std::abs(s[m] - expect), 0.0, 1e-15) << "m = " << m;
  }
}

TEST(Transform, ZeroFieldGivesZeroCoefficients) {
  const GridSpec g(pi, 16);
  const Spectrum s = gchn::to_spectral(Field(g));
  for (std::size_t m = 0; m < s.size(); ++m) EXPECT_EQ(s[m], complex{});
}

TEST(Transform, MatchesDirectSumOracle) {
  // c_m = (1/N) sum_j u_j exp(-i xi_m x_j), evaluated directly.
  const GridSpec g(3.0, 64);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  Field u(g);
  for (std::size_t j = 0; j < g.size(); ++j) u[j] = nd(rng);
  const Spectrum s = gchn::to_spectral(u);
  for (std::size_t m = 0; m < s.size(); ++m) {
    complex acc{};
    for (std::size_t j = 0; j < g.size(); ++j)
      acc += u[j] * std::exp(complex(0.0, -g.wavenumber(static_cast<std::ptrdiff_t>(m)) * g.x(j)));
    acc /= static_cast<double>(g.size());
    EXPECT_NEAR(std::abs(s[m] - acc), 0.0, 1e-13);
  }
}

TEST(Transform, RoundTripOnHundredRandomFields) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 100; ++trial) {
    const GridSpec g(1.0 + trial, std::size_t{16} << (trial % 6));
    Field u(g);
    for (std::size_t j = 0; j < g.size(); ++j) u[j] = nd(rng);
    const Field back = gchn::from_spectral(gchn::to_spectral(u));
    EXPECT_LT(max_diff(back, u), 1e-12 * u.max_abs());
  }
}

TEST(Transform, RejectsNonFinite) {
  const GridSpec g(pi, 16);
  Field u(g);
  u[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(gchn::to_spectral(u), std::domain_error);
  u[3] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(gchn::to_spectral(u), std::domain_error);
  Spectrum s(g);
  s[2] = complex(std::numeric_limits<double>::infinity(), 0.0);
  EXPECT_THROW(gchn::from_spectral(s), std::domain_error);
}

TEST(Transform, Parseval) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const GridSpec g(2.0, 128);
    const Field u = random_field(g, rng, 40);
    double direct = 0.0;
    for (double v : u.samples()) direct += v * v;
    direct /= static_cast<double>(g.size());
    EXPECT_NEAR(gchn::to_spectral(u).mean_square(), direct, 1e-12 * direct);
  }
}

TEST(Derivative, SineToCosine) {
  const GridSpec g(pi, 64);
  const Field d = gchn::derivative(Field::from_function(g, [](double x) { return std::sin(x); }), 1);
  EXPECT_LT(max_diff(d, Field::from_function(g, [](double x) { return std::cos(x); })), 1e-12);
}

TEST(Derivative, ConstantToZero) {
  const GridSpec g(pi, 32);
  for (int order = 1; order <= 3; ++order) EXPECT_LT(gchn::derivative(Field::constant(g, 4.2), order).max_abs(), 1e-14);
}

TEST(Derivative, BumpAgreesWithCentredDifferencesAtSecondOrder) {
  // Finite-difference oracle: the centred-difference error must fall ~4x when h halves.
  double errors[2];
  for (int level = 0; level < 2; ++level) {
    const GridSpec g(gchn::kDefaultHalfLength, std::size_t{2048} << level);
    const Field phi = gchn::build_phi(g);
    const Field d = gchn::derivative(phi, 1);
    double err = 0.0;
    const std::size_t n = g.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double fd = (phi[(j + 1) % n] - phi[(j + n - 1) % n]) / (2.0 * g.spacing());
      err = std::max(err, std::abs(fd - d[j]));
    }
    errors[level] = err;
  }
  const double order = std::log2(errors[0] / errors[1]);
  EXPECT_NEAR(order, 2.0, 0.1) << errors[0] << " " << errors[1];
}

TEST(Multiplier, IdentityAndHelmholtzExamples) {
  const GridSpec g(pi, 32);
  const Field c = Field::constant(g, 2.5);
  const Field cosx = Field::from_function(g, [](double x) { return std::cos(x); });
  std::mt19937_64 rng(5);
  const Field rnd = random_field(g, rng, 10);
  EXPECT_LT(max_diff(gchn::apply_multiplier(rnd, [](double) { return 1.0; }), rnd), 1e-13);
  auto helm = [](double xi) { return 1.0 / (1.0 + xi * xi); };
  EXPECT_LT(max_diff(gchn::apply_multiplier(c, helm), c), 1e-14);
  EXPECT_LT(max_diff(gchn::apply_multiplier(cosx, helm), 0.5 * cosx), 1e-15);
}

TEST(Multiplier, RejectsNonFiniteAndNonHermitianSymbols) {
  const GridSpec g(pi, 32);
  const Field u = Field::from_function(g, [](double x) { return std::sin(x); });
  EXPECT_THROW(gchn::apply_multiplier(u, [](double xi) { return 1.0 / xi; }), std::domain_error);
  EXPECT_THROW(gchn::apply_multiplier(u, [](double xi) { return complex(0.0, 1.0 + xi * xi); }), std::invalid_argument);
  EXPECT_NO_THROW(gchn::apply_multiplier(u, [](double xi) { return complex(0.0, xi); }));
}

TEST(Multiplier, LinearityAndCommutationWithDerivative) {
  std::mt19937_64 rng(17);
  const GridSpec g(5.0, 128);
  auto symbol = [](double xi) { return std::exp(-0.1 * xi * xi) + 0.5; };
  for (int trial = 0; trial < 20; ++trial) {
    const Field u = random_field(g, rng, 30);
    const Field v = random_field(g, rng, 30);
    const double a = 1.7, b = -0.3;
    const Field lhs = gchn::apply_multiplier(a * u + b * v, symbol);
    const Field rhs = a * gchn::apply_multiplier(u, symbol) + b * gchn::apply_multiplier(v, symbol);
    EXPECT_LT(max_diff(lhs, rhs), 1e-12 * std::max(1.0, lhs.max_abs()));
    const Field dm = gchn::derivative(gchn::apply_multiplier(u, symbol), 1);
    const Field md = gchn::apply_multiplier(gchn::derivative(u, 1), symbol);
    EXPECT_LT(max_diff(dm, md), 1e-12 * std::max(1.0, dm.max_abs()));
  }
}

TEST(Multiplier, NyquistAlwaysZeroed) {
  const GridSpec g(pi, 16);
  const Field alt = Field::from_function(g, [](double x) { return std::cos(8.0 * x); });
  EXPECT_GT(std::abs(gchn::to_spectral(alt)[8]), 0.5);
  const Spectrum out = gchn::apply_multiplier(gchn::to_spectral(alt), [](double) { return 1.0; });
  EXPECT_EQ(out[8], complex{});
}

TEST(Dealias, FullFractionIsIdentityOnBandLimitedFields) {
  std::mt19937_64 rng(2);
  const GridSpec g(pi, 64);
  const Field u = random_field(g, rng, 31);
  EXPECT_LT(max_diff(gchn::dealias(u, 1.0), u), 1e-13);
}

TEST(Dealias, HighModeRemovedAtTwoThirds) {
  const GridSpec g(pi, 64);  // Nyquist 32
  const double xi = 0.9 * 32.0;
  const Field u = Field::from_function(g, [&](double x) { return std::cos(std::round(xi) * x); });
  EXPECT_LT(gchn::dealias(u, 2.0 / 3.0).max_abs(), 1e-13);
}

TEST(Dealias, ProductOfBandLimitedFactorsUnaffected) {
  // Factors limited to fraction/(k+1) of Nyquist: their product stays inside the kept band.
  std::mt19937_64 rng(23);
  const GridSpec g(pi, 128);  // Nyquist 64
  for (int k = 1; k <= 3; ++k) {
    const double fraction = gchn::default_dealias_fraction(k);
    const int max_mode = static_cast<int>(std::floor(fraction * 64.0 / (k + 1))) - 1;
    Field prod = Field::constant(g, 1.0);
    for (int i = 0; i <= k; ++i) prod = gchn::pointwise_product(prod, random_field(g, rng, max_mode));
    EXPECT_LT(max_diff(gchn::dealias(prod, fraction), prod), 1e-11 * prod.max_abs()) << "k = " << k;
  }
}

TEST(Dealias, CutoffIsStrict) {
  const GridSpec g(pi, 64);
  EXPECT_EQ(gchn::dealias_cutoff_index(g, 0.5), 16U);  // mode 16 = 0.5 Nyquist is removed
  EXPECT_EQ(gchn::dealias_cutoff_index(g, 2.0 / 3.0), 22U);
  EXPECT_EQ(gchn::dealias_cutoff_index(g, 1.0), 32U);
  EXPECT_THROW(gchn::dealias_cutoff_index(g, 0.0), std::invalid_argument);
  EXPECT_THROW(gchn::dealias_cutoff_index(g, 1.5), std::invalid_argument);
}

}  // namespace
