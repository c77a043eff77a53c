#include "tarifflab/demand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "tarifflab/errors.hpp"

namespace tarifflab {

namespace {

constexpr double kSymmetryTolerance = 1e-12;

}  // namespace

void DemandFunction::require_periods(const Vector& price) const {
  if (static_cast<std::size_t>(price.size()) != periods())
    throw DimensionMismatch("price vector", periods(), price.size());
  if (!price.allFinite()) throw InvalidArgument("price vector has non-finite entries");
}

Vector DemandFunction::mean_demand(const Vector& price) const {
  require_periods(price);
  const auto& set = scenarios();
  Vector total = Vector::Zero(periods());
  for (std::size_t j = 0; j < set.size(); ++j) total += demand(price, j);
  return total / static_cast<double>(set.size());
}

Matrix DemandFunction::mean_jacobian(const Vector& price) const {
  require_periods(price);
  const auto& set = scenarios();
  Matrix total = Matrix::Zero(periods(), periods());
  for (std::size_t j = 0; j < set.size(); ++j) total += jacobian(price, j);
  return total / static_cast<double>(set.size());
}

double DemandFunction::mean_margin(const Vector& price) const {
  require_periods(price);
  const auto& set = scenarios();
  double total = 0.0;
  for (std::size_t j = 0; j < set.size(); ++j) total += (price - set[j].price).dot(demand(price, j));
  return total / static_cast<double>(set.size());
}

Vector DemandFunction::mean_jacobian_price_deviation(const Vector& price) const {
  require_periods(price);
  const auto& set = scenarios();
  Vector total = Vector::Zero(periods());
  for (std::size_t j = 0; j < set.size(); ++j)
    total += jacobian(price, j) * (set[j].price - set.mean_price());
  return total / static_cast<double>(set.size());
}

Vector DemandFunction::margin_gradient_term(const Vector& price) const {
  require_periods(price);
  const auto& set = scenarios();
  Vector total = Vector::Zero(periods());
  for (std::size_t j = 0; j < set.size(); ++j) total += jacobian(price, j) * (price - set[j].price);
  return total / static_cast<double>(set.size());
}

LinearDemandModel::LinearDemandModel(Matrix sensitivity, ScenarioSet scenarios, double customers)
    : sensitivity_(std::move(sensitivity)),
      scenarios_(std::move(scenarios)),
      customers_(customers) {
  const auto n = scenarios_.periods();
  if (static_cast<std::size_t>(sensitivity_.rows()) != n ||
      static_cast<std::size_t>(sensitivity_.cols()) != n)
    throw DimensionMismatch("sensitivity matrix", n, sensitivity_.rows());
  if (!sensitivity_.allFinite()) throw InvalidModel("sensitivity matrix has non-finite entries");
  if (!std::isfinite(customers_) || customers_ < 0.0)
    throw InvalidModel(fmt::format("customer count must be non-negative, got {}", customers_));
  if (asymmetry(sensitivity_) > kSymmetryTolerance)
    throw InvalidModel(fmt::format("sensitivity matrix is not symmetric (relative asymmetry {:.3g})",
                                   asymmetry(sensitivity_)));
  factor_.compute(sensitivity_);
  if (factor_.info() != Eigen::Success || min_symmetric_eigenvalue(sensitivity_) <= 0.0)
    throw InvalidModel("sensitivity matrix is not positive definite");
  satiation_price_ = factor_.solve(scenarios_.mean_state());
}

void LinearDemandModel::check_dimension(const Vector& price, const char* what) const {
  if (static_cast<std::size_t>(price.size()) != scenarios_.periods())
    throw DimensionMismatch(what, scenarios_.periods(), price.size());
}

Vector LinearDemandModel::demand(const Vector& price, std::size_t scenario) const {
  check_dimension(price);
  return scenarios_[scenario].state - sensitivity_ * price;
}

Matrix LinearDemandModel::jacobian(const Vector& price, std::size_t) const {
  check_dimension(price);
  return -sensitivity_;
}

Vector LinearDemandModel::solve(const Vector& rhs) const {
  check_dimension(rhs, "right-hand side");
  return factor_.solve(rhs);
}

double asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

double min_symmetric_eigenvalue(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double max_symmetric_eigenvalue(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

bool is_positive_definite(const Matrix& m) {
  if (m.rows() != m.cols() || m.size() == 0) return false;
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::LLT<Matrix> llt(sym);
  return llt.info() == Eigen::Success;
}

}  // namespace tarifflab
