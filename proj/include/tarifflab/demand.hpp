#pragma once

#include <cstddef>

#include <Eigen/Cholesky>

#include "tarifflab/scenario_set.hpp"
#include "tarifflab/types.hpp"

namespace tarifflab {

/// Aggregate demand response to a volumetric price vector, scenario by scenario.
///
/// Implementations must be pure: the same (price, scenario) always yields the
/// same demand. The sample-average helpers below are what the iterative
/// solvers work from; they never look inside a concrete model.
class DemandFunction {
 public:
  virtual ~DemandFunction() = default;

  virtual const ScenarioSet& scenarios() const = 0;
  virtual double customers() const = 0;

  /// D(price, Omega_j) in kWh per period.
  virtual Vector demand(const Vector& price, std::size_t scenario) const = 0;

  /// Jacobian with entry (k, t) = dD_k / dprice_t.
  virtual Matrix jacobian(const Vector& price, std::size_t scenario) const = 0;

  std::size_t periods() const { return scenarios().periods(); }

  Vector mean_demand(const Vector& price) const;
  Matrix mean_jacobian(const Vector& price) const;

  /// E[(price - lambda)^T D(price, Omega)], the volumetric margin.
  double mean_margin(const Vector& price) const;

  /// E[grad D(price, Omega) (lambda - mean lambda)].
  Vector mean_jacobian_price_deviation(const Vector& price) const;

  /// g(price) = E[grad D(price, Omega) (price - lambda)].
  Vector margin_gradient_term(const Vector& price) const;

 protected:
  void require_periods(const Vector& price) const;
};

/// D(price, Omega) = Omega - G price with deterministic, symmetric positive
/// definite G, aggregated over M customers.
class LinearDemandModel final : public DemandFunction {
 public:
  LinearDemandModel(Matrix sensitivity, ScenarioSet scenarios, double customers);

  const ScenarioSet& scenarios() const override { return scenarios_; }
  double customers() const override { return customers_; }
  Vector demand(const Vector& price, std::size_t scenario) const override;
  Matrix jacobian(const Vector& price, std::size_t scenario) const override;

  /// G, kWh per $/kWh.
  const Matrix& sensitivity() const noexcept { return sensitivity_; }

  /// Price at which expected demand vanishes, G^{-1} E[Omega].
  const Vector& satiation_price() const noexcept { return satiation_price_; }

  /// Solves G x = rhs.
  Vector solve(const Vector& rhs) const;

  void check_dimension(const Vector& price, const char* what = "price vector") const;

 private:
  Matrix sensitivity_;
  ScenarioSet scenarios_;
  double customers_;
  Eigen::LLT<Matrix> factor_;
  Vector satiation_price_;
};

/// Relative asymmetry max|G - G^T| / max(1, max|G|).
double asymmetry(const Matrix& m);

/// Smallest eigenvalue of the symmetric part of `m`.
double min_symmetric_eigenvalue(const Matrix& m);

/// Largest eigenvalue of the symmetric part of `m`.
double max_symmetric_eigenvalue(const Matrix& m);

/// True when a Cholesky factorisation of the symmetric part succeeds.
bool is_positive_definite(const Matrix& m);

}  // namespace tarifflab
