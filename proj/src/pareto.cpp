#include "tarifflab/pareto.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "tarifflab/errors.hpp"
#include "tarifflab/welfare.hpp"

namespace tarifflab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// A flat baseline keeps its rate bit for bit; the mean of equal entries need not.
double base_rate(const Tariff& baseline) {
  const Vector& p = baseline.price();
  return (p.array() == p(0)).all() ? p(0) : p.mean();
}

}  // namespace

Tariff solve_family(const LinearDemandModel& model, const Tariff& baseline, TariffFamily family,
                    double target, const SolverConfig& config) {
  switch (family) {
    case TariffFamily::TwoPartOptimal: return solve_two_part(model, target, config);
    case TariffFamily::LinearOptimal: return linear_tariff(solve_linear(model, target, config));
    case TariffFamily::FlatLinear: return solve_flat_linear(model, target, config);
    case TariffFamily::FixedChargeTwoPart:
      return solve_fixed_charge_two_part(model, target, baseline.connection_charge(), config);
    case TariffFamily::AdjustedFlat:
      return solve_adjusted_flat(model, target, base_rate(baseline), baseline.connection_charge(),
                                 config);
  }
  throw InvalidArgument("unknown tariff family");
}

namespace {

FrontPoint evaluate(const LinearDemandModel& model, const Tariff& baseline, TariffFamily family,
                    double target, const SolverConfig& config) {
  try {
    Tariff tariff = solve_family(model, baseline, family, target, config);
    const WelfareReport r = welfare_gains(model, tariff, baseline);
    return FrontPoint{target, true, r.delta_cs, r.delta_rs, r.delta_sw, std::move(tariff), {}};
  } catch (const InfeasibleTarget& e) {
    return FrontPoint{target, false, kNaN, kNaN, kNaN, std::nullopt, e.what()};
  } catch (const InvalidRegime& e) {
    return FrontPoint{target, false, kNaN, kNaN, kNaN, std::nullopt, e.what()};
  }
}

}  // namespace

std::vector<const FrontPoint*> ParetoFront::feasible_points() const {
  std::vector<const FrontPoint*> out;
  for (const auto& p : points)
    if (p.feasible) out.push_back(&p);
  return out;
}

std::vector<ParetoFront> sweep(const LinearDemandModel& model, const Tariff& baseline,
                               std::span<const TariffFamily> families,
                               std::span<const double> targets, const SweepOptions& options) {
  options.solver.validate();
  model.check_dimension(baseline.price(), "baseline price");
  std::vector<double> grid(targets.begin(), targets.end());
  std::sort(grid.begin(), grid.end());

  const std::size_t per_family = grid.size();
  const std::size_t total = families.size() * per_family;
  std::vector<std::optional<FrontPoint>> slots(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      slots[i] = evaluate(model, baseline, families[i / per_family], grid[i % per_family],
                          options.solver);
    }
  };
  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<ParetoFront> fronts;
  fronts.reserve(families.size());
  for (std::size_t f = 0; f < families.size(); ++f) {
    ParetoFront front{families[f], baseline, {}};
    front.points.reserve(per_family);
    for (std::size_t i = 0; i < per_family; ++i) front.points.push_back(std::move(*slots[f * per_family + i]));
    fronts.push_back(std::move(front));
  }
  return fronts;
}

std::vector<double> linspace(double lo, double hi, std::size_t steps) {
  if (steps == 0) return {};
  if (steps == 1) return {lo};
  std::vector<double> out(steps);
  const double width = hi - lo;
  for (std::size_t i = 0; i < steps; ++i)
    out[i] = lo + width * static_cast<double>(i) / static_cast<double>(steps - 1);
  out.back() = hi;
  return out;
}

std::vector<double> default_target_grid(const LinearDemandModel& model, std::size_t steps) {
  const RevenueRange range = linear_revenue_range(model);
  return linspace(range.lowest, range.highest, steps);
}

SlopeReport front_slope_report(const ParetoFront& front) {
  const auto pts = front.feasible_points();
  if (pts.size() < 3) throw TooFewPoints(pts.size(), 3);
  SlopeReport report;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double dcs = pts[i + 1]->delta_cs - pts[i]->delta_cs;
    const double drs = pts[i + 1]->delta_rs - pts[i]->delta_rs;
    report.segments.push_back(FrontSegment{pts[i]->target, pts[i + 1]->target, drs / dcs});
  }
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    report.interior.push_back(FrontCurvature{
        pts[i]->target,
        pts[i + 1]->delta_cs - 2.0 * pts[i]->delta_cs + pts[i - 1]->delta_cs,
        pts[i + 1]->delta_sw - 2.0 * pts[i]->delta_sw + pts[i - 1]->delta_sw,
        report.segments[i].slope - report.segments[i - 1].slope});
  }
  return report;
}

}  // namespace tarifflab
