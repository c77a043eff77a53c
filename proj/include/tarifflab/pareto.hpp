#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tarifflab/demand.hpp"
#include "tarifflab/solvers.hpp"
#include "tarifflab/tariff.hpp"

namespace tarifflab {

struct FrontPoint {
  double target;
  bool feasible;
  double delta_cs;  ///< NaN when infeasible
  double delta_rs;
  double delta_sw;
  std::optional<Tariff> tariff;
  std::string note;  ///< reason for infeasibility, empty otherwise
};

/// Surplus gains of one tariff family over a grid of revenue targets.
struct ParetoFront {
  TariffFamily family;
  Tariff baseline;
  std::vector<FrontPoint> points;  ///< sorted by target

  std::vector<const FrontPoint*> feasible_points() const;
};

/// Solves one family at one target. Fixed-charge families take the baseline's
/// connection charge; the adjusted flat tariff starts from the baseline's mean rate.
Tariff solve_family(const LinearDemandModel& model, const Tariff& baseline, TariffFamily family,
                    double target, const SolverConfig& config = {});

struct SweepOptions {
  SolverConfig solver{};
  unsigned threads = 1;  ///< 0 means one per hardware thread
};

/// Solves every family at every target and measures gains against `baseline`.
///
/// The fixed-charge families keep the baseline's connection charge; the
/// adjusted flat tariff shifts the baseline's mean rate. Infeasible targets
/// are kept as flagged points.
std::vector<ParetoFront> sweep(const LinearDemandModel& model, const Tariff& baseline,
                               std::span<const TariffFamily> families,
                               std::span<const double> targets, const SweepOptions& options = {});

/// Evenly spaced targets over [phi(pi*), phi(pi^M)].
std::vector<double> default_target_grid(const LinearDemandModel& model, std::size_t steps = 41);

std::vector<double> linspace(double lo, double hi, std::size_t steps);

struct FrontSegment {
  double target_lo;
  double target_hi;
  double slope;  ///< d(delta_rs) / d(delta_cs)
};

struct FrontCurvature {
  double target;
  double cs_second_difference;  ///< on the target grid; <= 0 for a concave front
  double sw_second_difference;
  double slope_change;          ///< next segment slope minus previous
};

struct SlopeReport {
  std::vector<FrontSegment> segments;
  std::vector<FrontCurvature> interior;
};

/// Throws TooFewPoints with fewer than three feasible points.
SlopeReport front_slope_report(const ParetoFront& front);

}  // namespace tarifflab
