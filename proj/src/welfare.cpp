#include "tarifflab/welfare.hpp"

#include <algorithm>
#include <cmath>

#include "tarifflab/errors.hpp"

namespace tarifflab {

namespace {

void check_tariff(const LinearDemandModel& model, const Tariff& tariff) {
  model.check_dimension(tariff.price(), "tariff price");
}

}  // namespace

double ElasticityMatrix::aggregate() const {
  const double total = expected_demand.sum();
  return expected_demand.dot(values.rowwise().sum()) / total;
}

Vector expected_demand(const LinearDemandModel& model, const Vector& price) {
  model.check_dimension(price);
  return model.scenarios().mean_state() - model.sensitivity() * price;
}

double phi_bar(const LinearDemandModel& model, const Vector& price) {
  const Vector margin = price - model.scenarios().mean_price();
  return margin.dot(expected_demand(model, price)) - model.scenarios().cross_covariance().trace();
}

double retailer_surplus(const LinearDemandModel& model, const Tariff& tariff) {
  check_tariff(model, tariff);
  return phi_bar(model, tariff.price()) + model.customers() * tariff.connection_charge();
}

double consumer_surplus_offset(const LinearDemandModel& model, const Tariff& tariff) {
  check_tariff(model, tariff);
  const Vector& p = tariff.price();
  return 0.5 * p.dot(model.sensitivity() * p) - p.dot(model.scenarios().mean_state()) -
         model.customers() * tariff.connection_charge();
}

WelfareReport welfare_gains(const LinearDemandModel& model, const Tariff& tariff,
                            const Tariff& baseline) {
  const double rs = retailer_surplus(model, tariff);
  const double delta_cs = consumer_surplus_offset(model, tariff) -
                          consumer_surplus_offset(model, baseline);
  const double delta_rs = rs - retailer_surplus(model, baseline);
  return WelfareReport{baseline, delta_cs, delta_rs, delta_cs + delta_rs, rs};
}

ElasticityMatrix elasticity_matrix(const LinearDemandModel& model, const Vector& price) {
  const Vector demand = expected_demand(model, price);
  const double scale = std::max(1.0, model.scenarios().mean_state().cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < demand.size(); ++k) {
    if (!(demand(k) > 1e-12 * scale))
      throw ZeroExpectedDemand(static_cast<std::size_t>(k), demand(k));
  }
  const auto n = demand.size();
  Matrix values(n, n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index t = 0; t < n; ++t)
      values(k, t) = -model.sensitivity()(k, t) * price(t) / demand(k);
  return ElasticityMatrix{std::move(values), price, demand};
}

}  // namespace tarifflab
