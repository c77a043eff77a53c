#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "tarifflab/demand.hpp"
#include "tarifflab/scenario_set.hpp"
#include "tarifflab/tariff.hpp"
#include "tarifflab/types.hpp"

namespace tarifflab {

enum class SeriesKind { Load, Price };

/// Hourly series arranged as one row per day.
struct RawSeries {
  SeriesKind kind;
  std::vector<long> day_labels;  ///< original day index of each dense row
  Matrix values;                 ///< days x periods; kWh for load, $/kWh for prices

  std::size_t days() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t periods() const { return static_cast<std::size_t>(values.cols()); }
};

/// Reads a `day,hour,value` CSV. Days are re-indexed densely in ascending
/// order; the number of periods is one past the largest hour seen. Every value
/// is multiplied by `scale` (1e-3 turns $/MWh into $/kWh).
RawSeries parse_csv(std::istream& in, SeriesKind kind, const std::string& source = "<stream>",
                    double scale = 1.0);
RawSeries parse_csv(const std::filesystem::path& path, SeriesKind kind, double scale = 1.0);

/// Scenario set of (price_j, load_j) day pairs plus the unbiased estimator
/// of the cross-covariance.
struct MomentEstimate {
  ScenarioSet scenarios;         ///< moments use 1/J (population) normalisation
  Matrix unbiased_cross_covariance;  ///< 1/(J-1) normalisation
};

/// Throws AlignmentMismatch when day counts, labels or periods differ and
/// SingleScenario when only one day is present.
MomentEstimate estimate_moments(const RawSeries& load, const RawSeries& prices);

struct CalibrationConfig {
  double flat_rate = 0.172;         ///< $/kWh
  double elasticity = -0.3;         ///< aggregate own-price elasticity at the flat rate
  double kernel_decay = 0.2;        ///< alpha in (0, 1)
  double customers = 2.2e6;
  double connection_charge = 0.52;  ///< $/customer/day

  /// Throws ScaleNonPositive for a non-negative elasticity and InvalidArgument otherwise.
  void validate() const;
};

/// Toeplitz matrix with entries alpha^|k - t|.
Matrix geometric_kernel(std::size_t periods, double alpha);

/// Fits G = c K(alpha) so that the aggregate elasticity at the flat rate hits
/// the target, and recovers demand states Omega_j = x_j + G 1 flat_rate.
LinearDemandModel calibrate_demand(const ScenarioSet& consumption, const CalibrationConfig& config);

struct RevenueBaseline {
  double gross;  ///< E[D(1 flat)]^T 1 flat + M A
  double net;    ///< phi(1 flat) + M A
};

/// Uses the model's customer count.
RevenueBaseline revenue_baseline(const LinearDemandModel& model, const CalibrationConfig& config);

/// Flat two-part tariff (A, 1 flat_rate).
Tariff flat_baseline_tariff(std::size_t periods, double flat_rate, double connection_charge);

}  // namespace tarifflab
