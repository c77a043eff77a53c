#pragma once

#include <cstddef>
#include <vector>

#include "tarifflab/types.hpp"

namespace tarifflab {

/// One equiprobable realisation of the billing cycle.
struct Scenario {
  Vector price;  ///< wholesale price per period, $/kWh
  Vector state;  ///< aggregate demand state per period, kWh
};

/// Empirical joint distribution of wholesale prices and demand states.
///
/// Every scenario carries probability 1/J. Means and the price/state
/// cross-covariance are population moments of the stored scenarios
/// (normalised by 1/J), so they are exact expectations under the empirical
/// distribution.
class ScenarioSet {
 public:
  explicit ScenarioSet(std::vector<Scenario> scenarios);

  std::size_t periods() const noexcept { return static_cast<std::size_t>(mean_price_.size()); }
  std::size_t size() const noexcept { return scenarios_.size(); }

  const std::vector<Scenario>& scenarios() const noexcept { return scenarios_; }
  const Scenario& operator[](std::size_t j) const { return scenarios_.at(j); }

  const Vector& mean_price() const noexcept { return mean_price_; }
  const Vector& mean_state() const noexcept { return mean_state_; }

  /// Entry (k, t) is cov(price_k, state_t).
  const Matrix& cross_covariance() const noexcept { return cross_covariance_; }

  /// Same prices, every state shifted by `offset`.
  ScenarioSet with_shifted_states(const Vector& offset) const;

 private:
  std::vector<Scenario> scenarios_;
  Vector mean_price_;
  Vector mean_state_;
  Matrix cross_covariance_;
};

}  // namespace tarifflab
