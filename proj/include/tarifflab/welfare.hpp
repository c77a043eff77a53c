#pragma once

#include "tarifflab/demand.hpp"
#include "tarifflab/tariff.hpp"
#include "tarifflab/types.hpp"

namespace tarifflab {

/// Surplus gains of a tariff relative to a baseline, all in $/cycle.
///
/// The consumer benefit carries an unknown additive term that does not
/// depend on the tariff; it cancels in every difference reported here.
struct WelfareReport {
  Tariff baseline;
  double delta_cs;
  double delta_rs;
  double delta_sw;
  double rs_absolute;
};

/// Own/cross price elasticities evaluated at `price`.
struct ElasticityMatrix {
  Matrix values;  ///< (k, t): elasticity of period-k demand w.r.t. price t
  Vector price;
  Vector expected_demand;

  /// Demand-weighted row sums: the elasticity of total consumption under a
  /// uniform proportional price change.
  double aggregate() const;
};

/// E[D(price, Omega)] = E[Omega] - G price.
Vector expected_demand(const LinearDemandModel& model, const Vector& price);

/// Expected volumetric margin (price - E lambda)^T E[D] - tr cov(lambda, Omega).
double phi_bar(const LinearDemandModel& model, const Vector& price);

/// phi_bar + M A.
double retailer_surplus(const LinearDemandModel& model, const Tariff& tariff);

/// Consumer surplus up to the tariff-independent benefit term:
/// 1/2 price^T G price - price^T E[Omega] - M A.
double consumer_surplus_offset(const LinearDemandModel& model, const Tariff& tariff);

WelfareReport welfare_gains(const LinearDemandModel& model, const Tariff& tariff,
                            const Tariff& baseline);

/// Throws ZeroExpectedDemand when some E[D_k] is not positive.
ElasticityMatrix elasticity_matrix(const LinearDemandModel& model, const Vector& price);

}  // namespace tarifflab
