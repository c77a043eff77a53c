#include "tarifflab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "tarifflab/errors.hpp"

namespace tarifflab::oracle {

namespace {

struct Evaluation {
  double total_surplus;
  double retailer_surplus;
};

// Settled expectations for a price vector, accumulated scenario by scenario.
class Settler {
 public:
  Settler(const LinearDemandModel& model, double connection_charge)
      : model_(model), lump_(model.customers() * connection_charge) {}

  Evaluation operator()(const Vector& price) const {
    const auto& set = model_.scenarios();
    const Vector load_shift = model_.sensitivity() * price;
    const double benefit = -0.5 * price.dot(load_shift);
    double total = 0.0, retailer = 0.0;
    for (const auto& s : set.scenarios()) {
      const Vector d = s.state - load_shift;
      const double cost = s.price.dot(d);
      total += benefit - cost;
      retailer += lump_ + price.dot(d) - cost;
    }
    const double count = static_cast<double>(set.size());
    return Evaluation{total / count, retailer / count};
  }

 private:
  const LinearDemandModel& model_;
  double lump_;
};

bool lexicographically_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

struct Best {
  std::optional<Vector> price;
  double value = -std::numeric_limits<double>::infinity();
  double retailer = 0.0;
  std::size_t candidates = 0;

  void offer(const Vector& p, const Evaluation& e) {
    ++candidates;
    if (!price || e.total_surplus > value ||
        (e.total_surplus == value && lexicographically_less(p, *price))) {
      price = p;
      value = e.total_surplus;
      retailer = e.retailer_surplus;
    }
  }
};

}  // namespace

GridSpec GridSpec::uniform(std::size_t dims, double lo, double hi, std::size_t steps) {
  return GridSpec{std::vector<GridAxis>(dims, GridAxis{lo, hi, steps})};
}

void GridSpec::validate() const {
  if (axes.empty() || axes.size() > 3)
    throw InvalidArgument(fmt::format("grid oracle supports 1 to 3 dimensions, got {}", axes.size()));
  for (const auto& a : axes) {
    if (!(a.lo < a.hi)) throw InvalidArgument("grid axis needs lo < hi");
    if (a.steps < 2) throw InvalidArgument("grid axis needs at least 2 steps");
  }
}

double GridSpec::step(std::size_t axis) const {
  const auto& a = axes.at(axis);
  return (a.hi - a.lo) / static_cast<double>(a.steps - 1);
}

double GridSpec::max_step() const {
  double s = 0.0;
  for (std::size_t i = 0; i < axes.size(); ++i) s = std::max(s, step(i));
  return s;
}

GridOptimum grid_argmax_welfare(const LinearDemandModel& model, const Tariff& baseline,
                                const std::optional<RevenueConstraint>& constraint,
                                const GridSpec& grid, PriceShape shape) {
  grid.validate();
  const auto n = model.scenarios().periods();
  if (grid.axes.size() != n) throw DimensionMismatch("grid", n, grid.axes.size());
  model.check_dimension(baseline.price(), "baseline price");

  const double charge = constraint ? constraint->connection_charge : 0.0;
  const Settler settle(model, charge);
  const bool constrained = constraint && std::isfinite(constraint->band);
  if (constrained && !(constraint->band >= 0.0)) throw InvalidArgument("band must be non-negative");

  auto node = [&](const std::vector<std::size_t>& idx) {
    Vector p(static_cast<Eigen::Index>(n));
    for (std::size_t d = 0; d < n; ++d)
      p(static_cast<Eigen::Index>(d)) =
          grid.axes[d].lo + grid.step(d) * static_cast<double>(idx[d]);
    return p;
  };

  Best best;
  auto visit_node = [&](const Vector& p) {
    const Evaluation e = settle(p);
    if (!constrained || std::abs(e.retailer_surplus - constraint->target) <= constraint->band)
      best.offer(p, e);
  };

  // Crossing of rs = target on the edge [a, b], refined by bisection.
  auto visit_edge = [&](const Vector& a, const Vector& b) {
    const double fa = settle(a).retailer_surplus - constraint->target;
    const double fb = settle(b).retailer_surplus - constraint->target;
    if (fa == 0.0 || fb == 0.0 || (fa < 0.0) == (fb < 0.0)) return;
    double lo = 0.0, hi = 1.0, flo = fa;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = settle(a + mid * (b - a)).retailer_surplus - constraint->target;
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    const Vector p = a + 0.5 * (lo + hi) * (b - a);
    best.offer(p, settle(p));
  };

  if (shape == PriceShape::Flat) {
    for (const auto& a : grid.axes)
      if (a.lo != grid.axes[0].lo || a.hi != grid.axes[0].hi || a.steps != grid.axes[0].steps)
        throw InvalidArgument("flat grid search needs identical axes");
    const std::size_t steps = grid.axes[0].steps;
    Vector prev;
    for (std::size_t i = 0; i < steps; ++i) {
      const Vector p = node(std::vector<std::size_t>(n, i));
      visit_node(p);
      if (constrained && i > 0) visit_edge(prev, p);
      prev = p;
    }
  } else {
    std::vector<std::size_t> idx(n, 0);
    while (true) {
      const Vector p = node(idx);
      visit_node(p);
      if (constrained) {
        for (std::size_t d = 0; d < n; ++d) {
          if (idx[d] + 1 < grid.axes[d].steps) {
            auto next = idx;
            ++next[d];
            visit_edge(p, node(next));
          }
        }
      }
      // Last axis fastest, so visiting order is lexicographic.
      std::size_t d = n;
      while (d > 0) {
        --d;
        if (++idx[d] < grid.axes[d].steps) break;
        idx[d] = 0;
        if (d == 0) {
          d = n + 1;
          break;
        }
      }
      if (d == n + 1) break;
    }
  }

  if (!best.price)
    throw EmptyFeasibleSet(fmt::format("no grid point meets revenue target {:.6g} within band {:.3g}",
                                       constraint ? constraint->target : 0.0,
                                       constraint ? constraint->band : 0.0));
  const Evaluation base = Settler(model, baseline.connection_charge())(baseline.price());
  return GridOptimum{*best.price, best.value - base.total_surplus, best.retailer, best.candidates};
}

SettlementLedger settle_scenarios(const LinearDemandModel& model, const Tariff& tariff) {
  model.check_dimension(tariff.price(), "tariff price");
  const auto& set = model.scenarios();
  const Vector& p = tariff.price();
  const Vector load_shift = model.sensitivity() * p;
  const double benefit = -0.5 * p.dot(load_shift);
  const double lump = model.customers() * tariff.connection_charge();

  SettlementLedger ledger{{}, 0.0, 0.0, 0.0, 0.0, 0.0};
  ledger.entries.reserve(set.size());
  for (const auto& s : set.scenarios()) {
    Vector d = s.state - load_shift;
    const double revenue = lump + p.dot(d);
    const double cost = s.price.dot(d);
    ledger.mean_revenue += revenue;
    ledger.mean_wholesale_cost += cost;
    ledger.mean_consumer_surplus += benefit - revenue;
    ledger.mean_total_surplus += benefit - cost;
    ledger.entries.push_back(SettlementEntry{std::move(d), revenue, cost, benefit});
  }
  const double count = static_cast<double>(set.size());
  ledger.mean_revenue /= count;
  ledger.mean_wholesale_cost /= count;
  ledger.mean_consumer_surplus /= count;
  ledger.mean_total_surplus /= count;
  ledger.mean_margin = ledger.mean_revenue - ledger.mean_wholesale_cost;
  return ledger;
}

}  // namespace tarifflab::oracle
