#pragma once

#include <span>
#include <string>
#include <vector>

#include "tarifflab/demand.hpp"
#include "tarifflab/tariff.hpp"
#include "tarifflab/types.hpp"

namespace tarifflab {

struct SolverConfig {
  double fixed_point_tolerance = 1e-10;  ///< max-norm of the price update
  int max_iterations = 200;
  double damping = 1.0;                  ///< initial step fraction, halved on oscillation
  double bisection_tolerance = 1e-8;     ///< on retailer surplus, scaled by max(1, |F|)

  /// Throws InvalidArgument on non-positive tolerances or damping outside (0, 1].
  void validate() const;
  double revenue_tolerance(double target) const;
};

/// Optimal linear tariff for a revenue target.
struct RamseySolution {
  Vector price;
  double ramsey_number;  ///< rho = (gamma - 1) / gamma, in [0, 1]
  double multiplier;     ///< gamma >= 1; infinite at the monopoly price
  double achieved_rs;

  /// s = rho / (1 + rho), the position on [two-part price, monopoly price] in [0, 1/2].
  double markup_fraction() const { return ramsey_number / (1.0 + ramsey_number); }
};

/// Revenue targets a tariff family can meet.
struct RevenueRange {
  double lowest;
  double highest;
};

/// [phi(pi*), phi(pi^M)]: the targets reachable by the optimal linear tariff.
RevenueRange linear_revenue_range(const LinearDemandModel& model);

/// Targets reachable by a single flat rate (low branch, unbounded below).
RevenueRange flat_revenue_range(const LinearDemandModel& model);

/// Welfare-optimal two-part tariff. For linear demand with deterministic
/// sensitivity the price equals the mean wholesale price and
/// A = (F - phi(mean price)) / M.
Tariff solve_two_part(const LinearDemandModel& model, double target, const SolverConfig& config = {});

/// Optimal linear tariff (A = 0) raising `target`. Picks the low-markup root.
///
/// Throws InvalidRegime below phi(pi*) and InfeasibleTarget above phi(pi^M).
RamseySolution solve_linear(const LinearDemandModel& model, double target,
                            const SolverConfig& config = {});

Tariff linear_tariff(const RamseySolution& solution);

/// Price maximising the expected volumetric margin, (satiation + mean wholesale) / 2.
Vector monopoly_price(const LinearDemandModel& model, const SolverConfig& config = {});

/// True when no neighbour on the +-step axis and diagonal stencil beats `price`.
bool is_local_margin_maximum(const DemandFunction& demand, const Vector& price, double step);

/// Single flat rate with phi(1 p) = target, low-markup root, A = 0.
Tariff solve_flat_linear(const LinearDemandModel& model, double target,
                         const SolverConfig& config = {});

/// Fixed connection charge, optimal price vector for the residual target F - M A.
Tariff solve_fixed_charge_two_part(const LinearDemandModel& model, double target,
                                   double connection_charge, const SolverConfig& config = {});

/// Fixed connection charge and flat rate base_rate + delta, with the
/// low-markup delta that meets `target`.
Tariff solve_adjusted_flat(const LinearDemandModel& model, double target, double base_rate,
                           double connection_charge, const SolverConfig& config = {});

/// Per-period residual of the inverse elasticity rule,
/// sum_t -e_kt (p_t - p*_t) / p_t - rho.
Vector inverse_elasticity_residual(const LinearDemandModel& model, const RamseySolution& solution,
                                   const Vector& two_part_price);

enum class CheckStatus { Pass, Fail, Vacuous };

std::string_view status_name(CheckStatus status);

struct CurvatureSample {
  Vector price;
  Vector eigenvalues;  ///< of the symmetric part of the finite-difference Jacobian of g
  double max_eigenvalue;
};

struct Assumption1Report {
  CheckStatus status;
  std::vector<CurvatureSample> samples;
  double worst_eigenvalue;  ///< -inf when there are no samples

  bool passed() const { return status != CheckStatus::Fail; }
};

/// Central difference step used by every numerical derivative check.
double finite_difference_step(double x);

/// Step for second differences; larger to keep cancellation error down.
double second_difference_step(double x);

/// Estimates the Jacobian of g(p) = E[grad D(p, Omega) (p - lambda)] at each
/// sample and checks that its symmetric part is negative definite.
Assumption1Report check_assumption1(const DemandFunction& demand, std::span<const Vector> samples,
                                    const SolverConfig& config = {});

struct PlannerBound {
  double gain;                 ///< planner optimum under independence: price at the mean wholesale price
  double conditional_gain;     ///< planner pricing each demand state at E[lambda | Omega]
  std::size_t state_groups;    ///< distinct demand states behind conditional_gain
  double max_abs_correlation;  ///< largest |corr(lambda_k, Omega_t)|
  bool dependence_warning;     ///< true when independence looks violated
};

inline constexpr double kDefaultCorrelationThreshold = 0.3;

/// Welfare gains of the social planner over `baseline`, settled scenario by
/// scenario rather than through the closed-form surplus functionals.
///
/// `gain` is the bound the two-part tariff attains when wholesale prices and
/// demand states are independent. `conditional_gain` lets the planner see the
/// demand state, with the conditional mean taken over scenarios sharing
/// exactly the same state; it exceeds `gain` when the two are dependent.
PlannerBound planner_bound_gain(const LinearDemandModel& model, const Tariff& baseline,
                                double correlation_threshold = kDefaultCorrelationThreshold);

/// Largest absolute sample correlation between any price period and any state period.
double max_abs_cross_correlation(const ScenarioSet& scenarios);

/// Human-readable notes on negative prices or negative expected demand.
std::vector<std::string> price_warnings(const LinearDemandModel& model, const Vector& price);

/// Fixed-point solvers that only use the DemandFunction interface. They work
/// for any demand satisfying the curvature assumption and agree with the
/// closed forms above on linear demand.
namespace iterative {

Vector two_part_price(const DemandFunction& demand, const SolverConfig& config = {});

Tariff solve_two_part(const DemandFunction& demand, double target, const SolverConfig& config = {});

/// Solves p = p* - rho E[grad D(p)]^{-1} E[D(p)] from `start`.
Vector ramsey_price(const DemandFunction& demand, double ramsey_number, const Vector& two_part_price,
                    const Vector& start, const SolverConfig& config = {});

RamseySolution solve_linear(const DemandFunction& demand, double target,
                            const SolverConfig& config = {});

Vector monopoly_price(const DemandFunction& demand, const SolverConfig& config = {});

}  // namespace iterative

}  // namespace tarifflab
