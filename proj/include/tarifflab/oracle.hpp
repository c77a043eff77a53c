#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tarifflab/demand.hpp"
#include "tarifflab/tariff.hpp"
#include "tarifflab/types.hpp"

// Brute-force verifiers. Nothing here calls the solvers or the closed-form
// welfare functionals: every surplus is settled scenario by scenario.
namespace tarifflab::oracle {

struct GridAxis {
  double lo;
  double hi;
  std::size_t steps = 400;
};

struct GridSpec {
  std::vector<GridAxis> axes;

  /// Same axis on every dimension.
  static GridSpec uniform(std::size_t dims, double lo, double hi, std::size_t steps = 400);

  /// Throws InvalidArgument unless lo < hi, steps >= 2 and 1 <= dims <= 3.
  void validate() const;
  double step(std::size_t axis) const;
  double max_step() const;
};

/// Retailer-surplus constraint |rs - target| <= band, with the connection
/// charge held fixed.
struct RevenueConstraint {
  double target;
  double band;
  double connection_charge = 0.0;
};

enum class PriceShape {
  Free,  ///< every grid node
  Flat,  ///< only the diagonal (equal prices); axes must coincide
};

struct GridOptimum {
  Vector price;
  double delta_sw;
  double retailer_surplus;
  std::size_t candidates;  ///< feasible points compared
};

/// Maximises the settled welfare gain over the grid.
///
/// With a finite band the candidates are the grid nodes within the band plus
/// the points where the constraint level set crosses a grid edge (located by
/// bisection of the settled surplus along that edge). An infinite band drops
/// the constraint. Ties go to the lexicographically smallest price.
///
/// Throws EmptyFeasibleSet when nothing satisfies the constraint.
GridOptimum grid_argmax_welfare(const LinearDemandModel& model, const Tariff& baseline,
                                const std::optional<RevenueConstraint>& constraint,
                                const GridSpec& grid, PriceShape shape = PriceShape::Free);

struct SettlementEntry {
  Vector demand;         ///< Omega_j - G p
  double revenue;        ///< M A + p^T D_j
  double wholesale_cost; ///< lambda_j^T D_j
  double benefit;        ///< -1/2 p^T G p, up to the tariff-independent term
  double margin() const { return revenue - wholesale_cost; }
};

struct SettlementLedger {
  std::vector<SettlementEntry> entries;
  double mean_revenue;
  double mean_wholesale_cost;
  double mean_margin;          ///< expected retailer surplus
  double mean_consumer_surplus;///< benefit - payment, up to the tariff-independent term
  double mean_total_surplus;   ///< benefit - wholesale cost
};

SettlementLedger settle_scenarios(const LinearDemandModel& model, const Tariff& tariff);

}  // namespace tarifflab::oracle
