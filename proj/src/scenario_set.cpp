#include "tarifflab/scenario_set.hpp"

#include <fmt/format.h>

#include "tarifflab/errors.hpp"

namespace tarifflab {

ScenarioSet::ScenarioSet(std::vector<Scenario> scenarios) : scenarios_(std::move(scenarios)) {
  if (scenarios_.empty()) throw InvalidModel("scenario set is empty");
  const auto n = static_cast<std::size_t>(scenarios_.front().price.size());
  if (n == 0) throw InvalidModel("scenarios have zero periods");

  for (std::size_t j = 0; j < scenarios_.size(); ++j) {
    const auto& s = scenarios_[j];
    if (static_cast<std::size_t>(s.price.size()) != n)
      throw DimensionMismatch(fmt::format("scenario {} price", j), n, s.price.size());
    if (static_cast<std::size_t>(s.state.size()) != n)
      throw DimensionMismatch(fmt::format("scenario {} state", j), n, s.state.size());
    if (!s.price.allFinite() || !s.state.allFinite())
      throw InvalidModel(fmt::format("scenario {} has non-finite entries", j));
    if ((s.price.array() < 0.0).any())
      throw InvalidModel(fmt::format("scenario {} has a negative wholesale price", j));
  }

  const auto count = static_cast<double>(scenarios_.size());
  mean_price_ = Vector::Zero(n);
  mean_state_ = Vector::Zero(n);
  for (const auto& s : scenarios_) {
    mean_price_ += s.price;
    mean_state_ += s.state;
  }
  mean_price_ /= count;
  mean_state_ /= count;

  cross_covariance_ = Matrix::Zero(n, n);
  for (const auto& s : scenarios_) {
    cross_covariance_.noalias() += (s.price - mean_price_) * (s.state - mean_state_).transpose();
  }
  cross_covariance_ /= count;
}

ScenarioSet ScenarioSet::with_shifted_states(const Vector& offset) const {
  if (offset.size() != mean_state_.size())
    throw DimensionMismatch("state offset", periods(), offset.size());
  std::vector<Scenario> shifted = scenarios_;
  for (auto& s : shifted) s.state += offset;
  return ScenarioSet(std::move(shifted));
}

}  // namespace tarifflab
