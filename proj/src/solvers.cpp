#include "tarifflab/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <fmt/format.h>

#include "tarifflab/errors.hpp"
#include "tarifflab/welfare.hpp"

namespace tarifflab {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr double kSingularRcond = 1e-13;

double multiplier_from_ramsey(double rho) {
  return rho >= 1.0 ? kInfinity : 1.0 / (1.0 - rho);
}

void require_customers(const DemandFunction& demand) {
  if (!(demand.customers() > 0.0))
    throw InvalidArgument("connection charge needs a positive customer count");
}

Vector solve_jacobian(const Matrix& jacobian, const Vector& rhs) {
  Eigen::PartialPivLU<Matrix> lu(jacobian);
  if (!(lu.rcond() > kSingularRcond))
    throw SingularJacobian(fmt::format("expected demand Jacobian is singular (rcond {:.3g})",
                                       lu.rcond()));
  return lu.solve(rhs);
}

// Damped iteration x <- x + theta (map(x) - x). The step fraction is halved
// whenever consecutive updates point against each other or grow.
Vector damped_fixed_point(const std::function<Vector(const Vector&)>& map, Vector x,
                          const SolverConfig& config, const char* what) {
  double theta = config.damping;
  Vector previous_step;
  double previous_norm = kInfinity;
  for (int it = 0; it < config.max_iterations; ++it) {
    const Vector step = map(x) - x;
    const double norm = step.cwiseAbs().maxCoeff();
    if (!std::isfinite(norm)) break;
    if (norm <= config.fixed_point_tolerance) return x + step;
    if (previous_step.size() > 0 && (step.dot(previous_step) < 0.0 || norm >= previous_norm))
      theta *= 0.5;
    x += theta * step;
    previous_step = step;
    previous_norm = norm;
  }
  throw NonConvergence(fmt::format("{} did not converge in {} iterations", what,
                                   config.max_iterations));
}

// Coefficients of phi(1 p) = -curvature p^2 + slope p + offset.
struct FlatMargin {
  double curvature;
  double slope;
  double offset;

  double at(double p) const { return (-curvature * p + slope) * p + offset; }
  double peak_rate() const { return slope / (2.0 * curvature); }
  double peak() const { return at(peak_rate()); }
};

FlatMargin flat_margin(const LinearDemandModel& model) {
  const auto& set = model.scenarios();
  const Vector ones = Vector::Ones(set.periods());
  const Vector g_ones = model.sensitivity() * ones;
  return FlatMargin{ones.dot(g_ones), ones.dot(set.mean_state()) + set.mean_price().dot(g_ones),
                    -set.mean_price().dot(set.mean_state()) - set.cross_covariance().trace()};
}

}  // namespace

void SolverConfig::validate() const {
  if (!(fixed_point_tolerance > 0.0)) throw InvalidArgument("fixed-point tolerance must be > 0");
  if (!(bisection_tolerance > 0.0)) throw InvalidArgument("bisection tolerance must be > 0");
  if (max_iterations < 1) throw InvalidArgument("max iterations must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw InvalidArgument("damping must lie in (0, 1]");
}

double SolverConfig::revenue_tolerance(double target) const {
  return bisection_tolerance * std::max(1.0, std::abs(target));
}

RevenueRange linear_revenue_range(const LinearDemandModel& model) {
  const auto& set = model.scenarios();
  return RevenueRange{phi_bar(model, set.mean_price()), phi_bar(model, monopoly_price(model))};
}

RevenueRange flat_revenue_range(const LinearDemandModel& model) {
  return RevenueRange{-kInfinity, flat_margin(model).peak()};
}

Tariff solve_two_part(const LinearDemandModel& model, double target, const SolverConfig& config) {
  config.validate();
  require_customers(model);
  const Vector& price = model.scenarios().mean_price();
  const double charge = (target - phi_bar(model, price)) / model.customers();
  return Tariff(TariffFamily::TwoPartOptimal, charge, price);
}

RamseySolution solve_linear(const LinearDemandModel& model, double target,
                            const SolverConfig& config) {
  config.validate();
  const auto& set = model.scenarios();
  const Vector& mean_price = set.mean_price();
  const Vector direction = model.satiation_price() - mean_price;
  // Along p(s) = mean_price + s direction, phi(s) = s (1 - s) Q - tr(Sigma).
  const double spread = direction.dot(model.sensitivity() * direction);
  const double lowest = phi_bar(model, mean_price);
  const double highest = phi_bar(model, monopoly_price(model, config));
  const double tol = config.revenue_tolerance(target);
  if (target > highest + tol) throw InfeasibleTarget(target, lowest, highest);
  if (target < lowest - tol) throw InvalidRegime(target, lowest);

  double s = 0.0;
  if (spread > 0.0) {
    const double headroom = std::clamp(highest - target, 0.0, 0.25 * spread);
    s = 0.5 - std::sqrt(headroom / spread);
  }
  s = std::clamp(s, 0.0, 0.5);
  const double rho = s / (1.0 - s);
  Vector price = mean_price + s * direction;
  const double achieved = phi_bar(model, price);
  return RamseySolution{std::move(price), rho, multiplier_from_ramsey(rho), achieved};
}

Tariff linear_tariff(const RamseySolution& solution) {
  return Tariff(TariffFamily::LinearOptimal, 0.0, solution.price);
}

Vector monopoly_price(const LinearDemandModel& model, const SolverConfig& config) {
  config.validate();
  return 0.5 * (model.satiation_price() + model.scenarios().mean_price());
}

bool is_local_margin_maximum(const DemandFunction& demand, const Vector& price, double step) {
  const double centre = demand.mean_margin(price);
  const double slack = 1e-12 * std::max(1.0, std::abs(centre));
  const auto n = price.size();
  for (Eigen::Index k = 0; k <= n; ++k) {
    // k == n is the all-ones diagonal.
    const Vector dir = k < n ? Vector(Vector::Unit(n, k)) : Vector(Vector::Ones(n));
    for (const double sign : {-1.0, 1.0}) {
      if (demand.mean_margin(price + sign * step * dir) > centre + slack) return false;
    }
  }
  return true;
}

Tariff solve_flat_linear(const LinearDemandModel& model, double target,
                         const SolverConfig& config) {
  config.validate();
  const FlatMargin margin = flat_margin(model);
  const double peak = margin.peak();
  if (target > peak + config.revenue_tolerance(target))
    throw InfeasibleTarget(target, -kInfinity, peak);
  const double rate =
      margin.peak_rate() - std::sqrt(std::max(0.0, peak - target) / margin.curvature);
  return Tariff(TariffFamily::FlatLinear, 0.0, Vector::Constant(model.scenarios().periods(), rate));
}

Tariff solve_fixed_charge_two_part(const LinearDemandModel& model, double target,
                                   double connection_charge, const SolverConfig& config) {
  const double lump = model.customers() * connection_charge;
  try {
    const RamseySolution solution = solve_linear(model, target - lump, config);
    return Tariff(TariffFamily::FixedChargeTwoPart, connection_charge, solution.price);
  } catch (const InfeasibleTarget& e) {
    throw InfeasibleTarget(target, e.lowest() + lump, e.highest() + lump);
  } catch (const InvalidRegime& e) {
    throw InvalidRegime(target, e.lowest() + lump);
  }
}

Tariff solve_adjusted_flat(const LinearDemandModel& model, double target, double base_rate,
                           double connection_charge, const SolverConfig& config) {
  config.validate();
  const auto n = model.scenarios().periods();
  const Tariff base(TariffFamily::AdjustedFlat, connection_charge, Vector::Constant(n, base_rate));
  // Work in the shift delta: phi(base + delta) - phi(base) = slope delta - curvature delta^2.
  const FlatMargin margin = flat_margin(model);
  const double residual = target - retailer_surplus(model, base);
  const double slope = margin.slope - 2.0 * margin.curvature * base_rate;
  const double discriminant = slope * slope - 4.0 * margin.curvature * residual;
  if (discriminant < 0.0) {
    const double highest = margin.peak() + model.customers() * connection_charge;
    if (target > highest + config.revenue_tolerance(target))
      throw InfeasibleTarget(target, -kInfinity, highest);
  }
  const double root = std::sqrt(std::max(0.0, discriminant));
  const double delta = slope > 0.0 ? 2.0 * residual / (slope + root)
                                   : (slope - root) / (2.0 * margin.curvature);
  return Tariff(TariffFamily::AdjustedFlat, connection_charge, Vector::Constant(n, base_rate + delta));
}

Vector inverse_elasticity_residual(const LinearDemandModel& model, const RamseySolution& solution,
                                   const Vector& two_part_price) {
  const ElasticityMatrix e = elasticity_matrix(model, solution.price);
  const Vector& p = solution.price;
  const Vector markup = (p - two_part_price).cwiseQuotient(p);
  return (-e.values * markup).array() - solution.ramsey_number;
}

std::string_view status_name(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Vacuous: return "PASS (vacuous)";
  }
  return "?";
}

double finite_difference_step(double x) { return 1e-5 * std::max(1.0, std::abs(x)); }

double second_difference_step(double x) { return 1e-3 * std::max(1.0, std::abs(x)); }

Assumption1Report check_assumption1(const DemandFunction& demand, std::span<const Vector> samples,
                                    const SolverConfig& config) {
  config.validate();
  Assumption1Report report{CheckStatus::Vacuous, {}, -kInfinity};
  if (samples.empty()) return report;
  report.status = CheckStatus::Pass;
  const auto n = static_cast<Eigen::Index>(demand.periods());
  for (const Vector& price : samples) {
    Matrix jac(n, n);
    for (Eigen::Index t = 0; t < n; ++t) {
      const double h = finite_difference_step(price(t));
      Vector up = price, down = price;
      up(t) += h;
      down(t) -= h;
      jac.col(t) = (demand.margin_gradient_term(up) - demand.margin_gradient_term(down)) / (2.0 * h);
    }
    const Matrix sym = 0.5 * (jac + jac.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    const Vector eig = solver.eigenvalues();
    const double top = eig.maxCoeff();
    report.worst_eigenvalue = std::max(report.worst_eigenvalue, top);
    if (!(top < 0.0)) report.status = CheckStatus::Fail;
    report.samples.push_back(CurvatureSample{price, eig, top});
  }
  return report;
}

double max_abs_cross_correlation(const ScenarioSet& scenarios) {
  const auto n = scenarios.periods();
  Vector price_sd = Vector::Zero(n), state_sd = Vector::Zero(n);
  for (const auto& s : scenarios.scenarios()) {
    price_sd += (s.price - scenarios.mean_price()).cwiseAbs2();
    state_sd += (s.state - scenarios.mean_state()).cwiseAbs2();
  }
  const double count = static_cast<double>(scenarios.size());
  price_sd = (price_sd / count).cwiseSqrt();
  state_sd = (state_sd / count).cwiseSqrt();
  double worst = 0.0;
  const Matrix& cov = scenarios.cross_covariance();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t t = 0; t < n; ++t) {
      const double denom = price_sd(k) * state_sd(t);
      if (denom > 0.0) worst = std::max(worst, std::abs(cov(k, t)) / denom);
    }
  }
  return std::min(worst, 1.0);
}

PlannerBound planner_bound_gain(const LinearDemandModel& model, const Tariff& baseline,
                                double correlation_threshold) {
  model.check_dimension(baseline.price(), "baseline price");
  const auto& set = model.scenarios();
  const Matrix& G = model.sensitivity();

  // Welfare in scenario j at price p, up to the tariff-independent benefit term.
  auto welfare = [&](std::size_t j, const Vector& p) {
    return -0.5 * p.dot(G * p) - set[j].price.dot(set[j].state - G * p);
  };

  auto less = [](const Vector* a, const Vector* b) {
    return std::lexicographical_compare(a->data(), a->data() + a->size(), b->data(),
                                        b->data() + b->size());
  };
  std::map<const Vector*, std::vector<std::size_t>, decltype(less)> groups(less);
  for (std::size_t j = 0; j < set.size(); ++j) groups[&set[j].state].push_back(j);

  const Vector& base = baseline.price();
  const Vector& mean = set.mean_price();
  double gain = 0.0, conditional_gain = 0.0;
  for (const auto& [state, members] : groups) {
    Vector conditional = Vector::Zero(base.size());
    for (std::size_t j : members) conditional += set[j].price;
    conditional /= static_cast<double>(members.size());
    for (std::size_t j : members) {
      const double w0 = welfare(j, base);
      gain += welfare(j, mean) - w0;
      conditional_gain += welfare(j, conditional) - w0;
    }
  }
  const double J = static_cast<double>(set.size());
  const double corr = max_abs_cross_correlation(set);
  return PlannerBound{gain / J, conditional_gain / J, groups.size(), corr, corr > correlation_threshold};
}

std::vector<std::string> price_warnings(const LinearDemandModel& model, const Vector& price) {
  std::vector<std::string> out;
  const Vector demand = expected_demand(model, price);
  for (Eigen::Index k = 0; k < price.size(); ++k) {
    if (price(k) < 0.0) out.push_back(fmt::format("price in period {} is negative ({:.6g})", k, price(k)));
    if (demand(k) < 0.0)
      out.push_back(fmt::format("expected demand in period {} is negative ({:.6g})", k, demand(k)));
  }
  return out;
}

namespace iterative {

Vector two_part_price(const DemandFunction& demand, const SolverConfig& config) {
  config.validate();
  const Vector& mean_price = demand.scenarios().mean_price();
  auto map = [&](const Vector& p) -> Vector {
    return mean_price +
           solve_jacobian(demand.mean_jacobian(p), demand.mean_jacobian_price_deviation(p));
  };
  return damped_fixed_point(map, mean_price, config, "two-part price iteration");
}

Tariff solve_two_part(const DemandFunction& demand, double target, const SolverConfig& config) {
  require_customers(demand);
  const Vector price = two_part_price(demand, config);
  const double charge = (target - demand.mean_margin(price)) / demand.customers();
  return Tariff(TariffFamily::TwoPartOptimal, charge, price);
}

Vector ramsey_price(const DemandFunction& demand, double ramsey_number, const Vector& two_part,
                    const Vector& start, const SolverConfig& config) {
  config.validate();
  if (!(ramsey_number >= 0.0 && ramsey_number <= 1.0))
    throw InvalidArgument(fmt::format("Ramsey number {} outside [0, 1]", ramsey_number));
  auto map = [&](const Vector& p) -> Vector {
    return two_part - ramsey_number * solve_jacobian(demand.mean_jacobian(p), demand.mean_demand(p));
  };
  return damped_fixed_point(map, start, config, "Ramsey price iteration");
}

Vector monopoly_price(const DemandFunction& demand, const SolverConfig& config) {
  const Vector two_part = two_part_price(demand, config);
  Vector price = ramsey_price(demand, 1.0, two_part, two_part, config);
  const double step = finite_difference_step(price.cwiseAbs().maxCoeff());
  if (!is_local_margin_maximum(demand, price, step))
    throw NonConvergence("monopoly price is not a local maximum of the expected margin");
  return price;
}

RamseySolution solve_linear(const DemandFunction& demand, double target,
                            const SolverConfig& config) {
  config.validate();
  const Vector two_part = two_part_price(demand, config);
  const Vector monopoly = ramsey_price(demand, 1.0, two_part, two_part, config);
  const double lowest = demand.mean_margin(two_part);
  const double highest = demand.mean_margin(monopoly);
  const double tol = config.revenue_tolerance(target);
  if (target > highest + tol) throw InfeasibleTarget(target, lowest, highest);
  if (target < lowest - tol) throw InvalidRegime(target, lowest);

  // Outer bisection on s = rho / (1 + rho) in [0, 1/2]; the margin increases
  // along the low-markup branch. Runs to full precision in s.
  double lo = 0.0, hi = 0.5;
  double s = 0.0;
  Vector price = two_part;
  double achieved = lowest;
  if (std::abs(target - highest) <= std::abs(target - lowest) && std::abs(target - highest) <= tol) {
    s = 0.5;
    price = monopoly;
    achieved = highest;
  } else if (std::abs(target - lowest) > tol) {
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      s = 0.5 * (lo + hi);
      price = ramsey_price(demand, s / (1.0 - s), two_part, price, config);
      achieved = demand.mean_margin(price);
      if (achieved == target) break;
      (achieved < target ? lo : hi) = s;
    }
    if (std::abs(achieved - target) > tol)
      throw NonConvergence(fmt::format("Ramsey bisection stalled at surplus {:.10g} for target {:.10g}",
                                       achieved, target));
  }
  const double rho = s / (1.0 - s);
  return RamseySolution{std::move(price), rho, multiplier_from_ramsey(rho), achieved};
}

}  // namespace iterative

}  // namespace tarifflab
