#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include <Eigen/QR>

#include "tarifflab/demand.hpp"
#include "tarifflab/scenario_set.hpp"
#include "tarifflab/tariff.hpp"
#include "tarifflab/types.hpp"

namespace tarifflab::testing {

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Matrix i2_sensitivity() {
  Matrix G(2, 2);
  G << 2.0, -0.5, -0.5, 1.0;
  return G;
}

/// Two periods, one scenario: lambda = (1, 2), Omega = (10, 8), M = 1.
inline LinearDemandModel instance_i2(double customers = 1.0) {
  return LinearDemandModel(i2_sensitivity(), ScenarioSet({{vec({1, 2}), vec({10, 8})}}), customers);
}

/// Same means as I2 with perfectly correlated price and state deviations.
inline LinearDemandModel instance_i2_cov(double customers = 1.0) {
  return LinearDemandModel(i2_sensitivity(),
                           ScenarioSet({{vec({1.5, 2.5}), vec({11, 9})}, {vec({0.5, 1.5}), vec({9, 7})}}),
                           customers);
}

inline Tariff two_part(double A, const Vector& price) {
  return Tariff(TariffFamily::TwoPartOptimal, A, price);
}

inline Tariff linear(const Vector& price) { return Tariff(TariffFamily::LinearOptimal, 0.0, price); }

inline double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Random symmetric positive definite matrix with eigenvalues in [lo, hi].
inline Matrix random_spd(std::size_t n, std::mt19937_64& rng, double lo = 0.5, double hi = 3.0) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u(lo, hi);
  const auto N = static_cast<Eigen::Index>(n);
  Matrix a(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) a(i, j) = normal(rng);
  const Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix q = qr.householderQ();
  Vector d(N);
  for (Eigen::Index i = 0; i < N; ++i) d(i) = u(rng);
  Matrix g = q * d.asDiagonal() * q.transpose();
  return 0.5 * (g + g.transpose());
}

/// Random model whose mean demand is positive around the mean wholesale price.
/// With `independent` the scenario set is the product of separately drawn
/// price and state samples, so the empirical cross-covariance is exactly zero
/// up to rounding.
inline LinearDemandModel random_model(std::size_t n, std::size_t draws, std::mt19937_64& rng,
                                      bool independent = false, double customers = 3.0) {
  const Matrix G = random_spd(n, rng);
  std::uniform_real_distribution<double> price(0.5, 2.0), level(15.0, 25.0), noise(-1.0, 1.0);
  const auto N = static_cast<Eigen::Index>(n);
  Vector base_price(N), base_state(N);
  for (Eigen::Index k = 0; k < N; ++k) base_price(k) = price(rng), base_state(k) = level(rng);
  base_state += G * base_price;

  auto draw_price = [&] {
    Vector p = base_price;
    for (Eigen::Index k = 0; k < N; ++k) p(k) = std::max(0.0, p(k) + 0.3 * noise(rng));
    return p;
  };
  auto draw_state = [&](const Vector& p) {
    Vector s = base_state;
    for (Eigen::Index k = 0; k < N; ++k) s(k) += 2.0 * noise(rng) + 3.0 * (p(k) - base_price(k));
    return s;
  };

  std::vector<Scenario> scenarios;
  if (independent) {
    std::vector<Vector> prices, states;
    for (std::size_t j = 0; j < draws; ++j) prices.push_back(draw_price());
    for (std::size_t j = 0; j < draws; ++j) states.push_back(draw_state(base_price));
    for (const auto& p : prices)
      for (const auto& s : states) scenarios.push_back({p, s});
  } else {
    for (std::size_t j = 0; j < draws; ++j) {
      Vector p = draw_price();
      scenarios.push_back({p, draw_state(p)});
    }
  }
  return LinearDemandModel(G, ScenarioSet(std::move(scenarios)), customers);
}

inline std::filesystem::path source_dir() { return TARIFFLAB_SOURCE_DIR; }

}  // namespace tarifflab::testing
