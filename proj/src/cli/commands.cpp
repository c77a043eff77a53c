#include "tarifflab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "output.hpp"
#include "tarifflab/errors.hpp"
#include "tarifflab/ingest.hpp"
#include "tarifflab/model_file.hpp"
#include "tarifflab/oracle.hpp"
#include "tarifflab/pareto.hpp"
#include "tarifflab/solvers.hpp"
#include "tarifflab/welfare.hpp"

namespace tarifflab {

namespace {

using cli::Json;
using cli::RunManifest;

struct BaselineFlags {
  std::optional<double> flat_rate;
  std::optional<double> connection_charge;

  void attach(CLI::App* cmd) {
    cmd->add_option("--flat-rate", flat_rate, "Baseline flat rate, $/kWh");
    cmd->add_option("--connection-charge", connection_charge,
                    "Baseline connection charge, $/customer/day");
  }
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string money(double v) { return fmt::format("{:.4g}", v); }

/// Flags win over the model's provenance. Without any flat rate the baseline
/// prices at the mean wholesale price.
Tariff resolve_baseline(const ModelFile& file, const ScenarioSet& set, const BaselineFlags& flags) {
  const auto rate = flags.flat_rate ? flags.flat_rate : provenance_number(file, "flat_rate");
  const double charge = flags.connection_charge
                            ? *flags.connection_charge
                            : provenance_number(file, "connection_charge").value_or(0.0);
  if (rate) {
    if (!(*rate > 0.0)) throw InvalidArgument("--flat-rate must be positive");
    return flat_baseline_tariff(set.periods(), *rate, charge);
  }
  return Tariff(TariffFamily::TwoPartOptimal, charge, set.mean_price());
}

std::string describe(const Tariff& t) {
  const Vector& p = t.price();
  if (p.size() > 0 && (p.array() == p(0)).all())
    return fmt::format("{} A={} flat rate={}", family_name(t.family()), money(t.connection_charge()),
                       money(p(0)));
  return fmt::format("{} A={} mean price={}", family_name(t.family()), money(t.connection_charge()),
                     money(p.mean()));
}

unsigned sweep_threads() {
  const char* env = std::getenv("TARIFFLAB_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw InvalidArgument(fmt::format("TARIFFLAB_THREADS must be a positive integer, got `{}`", env));
  return static_cast<unsigned>(v);
}

Json baseline_json(const Tariff& baseline) {
  return Json{{"family", std::string(family_name(baseline.family()))},
              {"connection_charge", baseline.connection_charge()},
              {"mean_price", baseline.price().mean()}};
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string load, prices, price_unit = "kwh", out;
  CalibrationConfig config;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  if (a.price_unit != "kwh" && a.price_unit != "mwh")
    throw InvalidArgument(fmt::format("--price-unit must be kwh or mwh, got `{}`", a.price_unit));
  a.config.validate();
  const double scale = a.price_unit == "mwh" ? 1e-3 : 1.0;
  const RawSeries load = parse_csv(a.load, SeriesKind::Load);
  const RawSeries prices = parse_csv(a.prices, SeriesKind::Price, scale);
  const MomentEstimate moments = estimate_moments(load, prices);
  const LinearDemandModel model = calibrate_demand(moments.scenarios, a.config);

  const auto n = static_cast<Eigen::Index>(model.scenarios().periods());
  const Vector flat = Vector::Constant(n, a.config.flat_rate);
  const double realized = elasticity_matrix(model, flat).aggregate();
  const RevenueBaseline revenue = revenue_baseline(model, a.config);
  const double trace = model.scenarios().cross_covariance().trace();

  Provenance prov{{"flat_rate", num(a.config.flat_rate)},
                  {"elasticity", num(a.config.elasticity)},
                  {"kernel", "geometric"},
                  {"kernel_decay", num(a.config.kernel_decay)},
                  {"connection_charge", num(a.config.connection_charge)},
                  {"price_unit", a.price_unit},
                  {"days", std::to_string(load.days())},
                  {"load_sha256", cli::sha256_file(a.load)},
                  {"prices_sha256", cli::sha256_file(a.prices)},
                  {"realized_elasticity", num(realized)},
                  {"unbiased_cross_covariance_trace", num(moments.unbiased_cross_covariance.trace())}};
  std::ostringstream payload;
  write_model(payload, to_model_file(model, std::move(prov)));

  RunManifest manifest{"fit",
                       Json{{"price_unit", a.price_unit},
                            {"flat_rate", a.config.flat_rate},
                            {"elasticity", a.config.elasticity},
                            {"alpha", a.config.kernel_decay},
                            {"customers", a.config.customers},
                            {"connection_charge", a.config.connection_charge}},
                       {{"load", a.load}, {"prices", a.prices}}};
  cli::write_with_manifest(a.out, payload.str(), manifest);

  const Tariff baseline = flat_baseline_tariff(model.scenarios().periods(), a.config.flat_rate,
                                               a.config.connection_charge);
  const Tariff two_part = solve_two_part(model, revenue.net);
  fmt::print(out, "days                  {}\n", load.days());
  fmt::print(out, "periods               {}\n", load.periods());
  fmt::print(out, "realized elasticity   {:.10g} (target {:.10g})\n", realized, a.config.elasticity);
  fmt::print(out, "G eigenvalues         [{:.4g}, {:.4g}]\n", min_symmetric_eigenvalue(model.sensitivity()),
             max_symmetric_eigenvalue(model.sensitivity()));
  fmt::print(out, "tr cov(lambda, Omega) {} (1/J), {} (1/(J-1))\n", money(trace),
             money(moments.unbiased_cross_covariance.trace()));
  fmt::print(out, "baseline revenue      gross {} net {} $/day\n", money(revenue.gross), money(revenue.net));
  fmt::print(out, "baseline tariff       {}\n", describe(baseline));
  fmt::print(out, "two-part A*           {} $/customer/day\n", money(two_part.connection_charge()));
  fmt::print(out, "wrote                 {}\n", a.out);
  return kExitOk;
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string model, family, target, out;
  BaselineFlags baseline;
};

double parse_target(const std::string& text, const LinearDemandModel& model, const Tariff& baseline) {
  if (text == "baseline") return retailer_surplus(model, baseline);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || !std::isfinite(v))
    throw InvalidArgument(fmt::format("--target-rs must be a number or `baseline`, got `{}`", text));
  return v;
}

std::string solve_report(const LinearDemandModel& model, TariffFamily family, double target,
                         const Tariff& baseline) {
  const Tariff tariff = solve_family(model, baseline, family, target);
  const WelfareReport r = welfare_gains(model, tariff, baseline);
  std::string s;
  s += fmt::format("family             {}\n", family_name(family));
  s += fmt::format("target_rs          {}\n", money(target));
  s += fmt::format("baseline           {}\n", describe(baseline));
  s += fmt::format("connection_charge  {}\n", money(tariff.connection_charge()));
  s += "period  price\n";
  for (Eigen::Index k = 0; k < tariff.price().size(); ++k)
    s += fmt::format("{:<7} {}\n", k, money(tariff.price()(k)));
  if (family == TariffFamily::LinearOptimal) {
    const RamseySolution sol = solve_linear(model, target);
    s += fmt::format("ramsey_number      {}\n", money(sol.ramsey_number));
    s += fmt::format("multiplier         {}\n", money(sol.multiplier));
    s += fmt::format("markup_fraction    {}\n", money(sol.markup_fraction()));
    try {
      const Vector res = inverse_elasticity_residual(model, sol, model.scenarios().mean_price());
      s += fmt::format("inverse_elasticity_residual_max  {:.3g}\n", res.cwiseAbs().maxCoeff());
    } catch (const ZeroExpectedDemand& e) {
      s += fmt::format("inverse_elasticity_residual_max  n/a ({})\n", e.what());
    }
  }
  s += fmt::format("delta_cs           {}\n", money(r.delta_cs));
  s += fmt::format("delta_rs           {}\n", money(r.delta_rs));
  s += fmt::format("delta_sw           {}\n", money(r.delta_sw));
  s += fmt::format("rs                 {}\n", money(r.rs_absolute));
  for (const auto& w : price_warnings(model, tariff.price())) s += fmt::format("warning: {}\n", w);
  return s;
}

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const auto family = parse_family(a.family);
  if (!family) throw InvalidArgument(fmt::format("unknown tariff family `{}`", a.family));
  const ModelFile file = load_model(a.model);
  const LinearDemandModel model = build_model(file);
  const Tariff baseline = resolve_baseline(file, model.scenarios(), a.baseline);
  const double target = parse_target(a.target, model, baseline);
  const std::string report = solve_report(model, *family, target, baseline);
  out << report;
  if (!a.out.empty()) {
    RunManifest manifest{"solve",
                         Json{{"family", std::string(family_name(*family))},
                              {"target_rs", a.target},
                              {"resolved_target_rs", target},
                              {"baseline", baseline_json(baseline)}},
                         {{"model", a.model}}};
    cli::write_with_manifest(a.out, report, manifest);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- pareto

struct ParetoArgs {
  std::string model, out, svg;
  std::vector<std::string> families;
  std::optional<double> f_min, f_max;
  std::size_t steps = 41;
  BaselineFlags baseline;
};

std::vector<TariffFamily> parse_families(const std::vector<std::string>& names) {
  if (names.empty()) return {kAllFamilies.begin(), kAllFamilies.end()};
  std::vector<TariffFamily> out;
  for (const auto& name : names) {
    if (name == "all") return {kAllFamilies.begin(), kAllFamilies.end()};
    if (name == "none" || name.empty()) throw InvalidArgument("--families selects no tariff family");
    const auto f = parse_family(name);
    if (!f) throw InvalidArgument(fmt::format("unknown tariff family `{}`", name));
    if (std::find(out.begin(), out.end(), *f) == out.end()) out.push_back(*f);
  }
  return out;
}

int cmd_pareto(const ParetoArgs& a, std::ostream& out) {
  const auto families = parse_families(a.families);
  if (a.steps < 2) throw InvalidArgument("--steps must be at least 2");
  const ModelFile file = load_model(a.model);
  const LinearDemandModel model = build_model(file);
  const Tariff baseline = resolve_baseline(file, model.scenarios(), a.baseline);
  const RevenueRange range = linear_revenue_range(model);
  const double lo = a.f_min.value_or(range.lowest), hi = a.f_max.value_or(range.highest);
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw InvalidArgument(fmt::format("need --f-min < --f-max, got [{:.6g}, {:.6g}]", lo, hi));

  const auto targets = linspace(lo, hi, a.steps);
  SweepOptions options;
  options.threads = sweep_threads();
  const auto fronts = sweep(model, baseline, families, targets, options);
  const std::string csv = cli::fronts_csv(fronts, model.scenarios().periods());

  Json config{{"families", Json::array()}, {"f_min", lo}, {"f_max", hi}, {"steps", a.steps},
              {"baseline", baseline_json(baseline)}};
  for (auto f : families) config["families"].push_back(std::string(family_name(f)));
  const RunManifest manifest{"pareto", config, {{"model", a.model}}};

  if (a.out.empty()) {
    out << csv;
  } else {
    cli::write_with_manifest(a.out, csv, manifest);
    for (const auto& front : fronts)
      fmt::print(out, "{:<18} {} targets, {} feasible\n", family_name(front.family),
                 front.points.size(), front.feasible_points().size());
    fmt::print(out, "wrote {}\n", a.out);
  }
  if (!a.svg.empty()) {
    cli::write_with_manifest(a.svg, cli::fronts_svg(fronts, retailer_surplus(model, baseline)), manifest);
    if (!a.out.empty()) fmt::print(out, "wrote {}\n", a.svg);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- check

enum class Verdict { Pass, Fail, Warn, Skip };

struct CheckLine {
  Verdict verdict;
  std::string name;
  std::string detail;
};

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Warn: return "WARN";
    case Verdict::Skip: return "SKIP";
  }
  return "?";
}

Verdict pass_if(bool ok) { return ok ? Verdict::Pass : Verdict::Fail; }

double max_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

std::vector<Vector> sample_prices(const LinearDemandModel& model) {
  const Vector& mean = model.scenarios().mean_price();
  const Vector monopoly = monopoly_price(model);
  const Vector& satiation = model.satiation_price();
  std::vector<Vector> out{mean, monopoly, 0.5 * (mean + monopoly)};
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 7; ++i) {
    Vector p(mean.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) p(k) = mean(k) + u(rng) * (satiation(k) - mean(k));
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<CheckLine> structural_checks(const ModelFile& file, std::optional<ScenarioSet>& set) {
  std::vector<CheckLine> lines;
  const Matrix& G = file.sensitivity;
  const double asym = asymmetry(G);
  lines.push_back({pass_if(asym <= 1e-12), "G-symmetric", fmt::format("relative asymmetry {:.3g}", asym)});
  const double min_eig = min_symmetric_eigenvalue(G);
  lines.push_back({pass_if(is_positive_definite(G) && min_eig > 0.0), "G-positive-definite",
                   fmt::format("smallest eigenvalue {:.6g}", min_eig)});
  try {
    set.emplace(file.scenarios);
    const double scale = std::max(1.0, max_norm(set->mean_state()));
    const double err = std::max({max_norm(set->mean_price() - file.mean_price),
                                 max_norm(set->mean_state() - file.mean_state),
                                 (set->cross_covariance() - file.cross_covariance).cwiseAbs().maxCoeff()});
    lines.push_back({pass_if(err <= 1e-9 * scale), "moments-consistent",
                     fmt::format("largest deviation from recomputed moments {:.3g}", err)});
  } catch (const InputError& e) {
    lines.push_back({Verdict::Fail, "scenarios-valid", e.what()});
  }
  return lines;
}

oracle::GridSpec oracle_grid(const LinearDemandModel& model, const std::vector<Vector>& must_contain) {
  const auto n = model.scenarios().periods();
  const std::size_t steps = n <= 2 ? 400 : 60;
  oracle::GridSpec grid;
  for (std::size_t k = 0; k < n; ++k) {
    double lo = 0.0, hi = 0.0;
    for (const auto& p : must_contain) {
      lo = std::min(lo, p(static_cast<Eigen::Index>(k)));
      hi = std::max(hi, p(static_cast<Eigen::Index>(k)));
    }
    const double pad = 0.1 * std::max(hi - lo, 1e-6);
    grid.axes.push_back({lo - pad, hi + pad, steps});
  }
  return grid;
}

bool within_one_step(const Vector& a, const Vector& b, const oracle::GridSpec& grid) {
  for (Eigen::Index k = 0; k < a.size(); ++k)
    if (std::abs(a(k) - b(k)) > grid.step(static_cast<std::size_t>(k)) * (1.0 + 1e-9)) return false;
  return true;
}

std::vector<CheckLine> model_checks(const ModelFile& file, const LinearDemandModel& model,
                                    const Tariff& baseline) {
  std::vector<CheckLine> lines;
  const Matrix& G = model.sensitivity();
  const Vector& mean = model.scenarios().mean_price();
  const auto samples = sample_prices(model);
  const double gscale = std::max(1.0, G.cwiseAbs().maxCoeff());

  const Assumption1Report a1 = check_assumption1(model, samples);
  lines.push_back({a1.passed() ? Verdict::Pass : Verdict::Fail, "assumption-1",
                   fmt::format("{} samples, largest eigenvalue {:.6g} ({})", a1.samples.size(),
                               a1.worst_eigenvalue, status_name(a1.status))});

  double grad_err = 0.0;
  for (const auto& p : samples) {
    const Vector exact = -expected_demand(model, p);
    Vector fd(p.size());
    for (Eigen::Index t = 0; t < p.size(); ++t) {
      const double h = finite_difference_step(p(t));
      Vector up = p, down = p;
      up(t) += h;
      down(t) -= h;
      fd(t) = (consumer_surplus_offset(model, Tariff(TariffFamily::TwoPartOptimal, 0.0, up)) -
               consumer_surplus_offset(model, Tariff(TariffFamily::TwoPartOptimal, 0.0, down))) /
              (2.0 * h);
    }
    grad_err = std::max(grad_err, max_norm(fd - exact) / std::max(1.0, max_norm(exact)));
  }
  lines.push_back({pass_if(grad_err <= 1e-6), "cs-gradient",
                   fmt::format("finite-difference gradient vs -E[D], relative error {:.3g}", grad_err)});

  double hess_err = 0.0, hess_top = -std::numeric_limits<double>::infinity();
  for (const auto& p : samples) {
    const auto n = p.size();
    Matrix H(n, n);
    auto rs = [&](const Vector& x) { return phi_bar(model, x); };
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const double hi = second_difference_step(p(i)), hj = second_difference_step(p(j));
        Vector pp = p, pm = p, mp = p, mm = p;
        pp(i) += hi, pp(j) += hj;
        pm(i) += hi, pm(j) -= hj;
        mp(i) -= hi, mp(j) += hj;
        mm(i) -= hi, mm(j) -= hj;
        H(i, j) = (rs(pp) - rs(pm) - rs(mp) + rs(mm)) / (4.0 * hi * hj);
      }
    hess_err = std::max(hess_err, (H + 2.0 * G).cwiseAbs().maxCoeff() / gscale);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
    hess_top = std::max(hess_top, eig.eigenvalues().maxCoeff());
  }
  lines.push_back({pass_if(hess_err <= 1e-5 && hess_top < 0.0), "rs-hessian",
                   fmt::format("finite-difference Hessian vs -2G, relative error {:.3g}, largest "
                               "eigenvalue {:.6g}",
                               hess_err, hess_top)});

  double settle_err = 0.0;
  for (const Tariff& t : {baseline, Tariff(TariffFamily::TwoPartOptimal, 0.0, mean),
                          Tariff(TariffFamily::TwoPartOptimal, 0.0, samples[1])}) {
    const auto ledger = oracle::settle_scenarios(model, t);
    const double scale = std::max({1.0, std::abs(ledger.mean_revenue), std::abs(ledger.mean_wholesale_cost)});
    settle_err = std::max(settle_err, std::abs(ledger.mean_margin - retailer_surplus(model, t)) / scale);
  }
  lines.push_back({pass_if(settle_err <= 1e-12), "settlement-identity",
                   fmt::format("settled margin vs expected surplus, relative error {:.3g}", settle_err)});

  const double pscale = std::max(1.0, max_norm(model.satiation_price()));
  const Vector it_two_part = iterative::two_part_price(model);
  const double tp_err = max_norm(it_two_part - mean) / pscale;
  lines.push_back({pass_if(tp_err <= 1e-8), "two-part-price",
                   fmt::format("iterative solver vs mean wholesale price, relative error {:.3g}", tp_err)});

  const RevenueRange range = linear_revenue_range(model);
  const double mid = 0.5 * (range.lowest + range.highest);
  const RamseySolution closed = solve_linear(model, mid);
  const RamseySolution iter = iterative::solve_linear(model, mid);
  const double lin_err = max_norm(closed.price - iter.price) / pscale;
  lines.push_back({pass_if(lin_err <= 1e-6), "linear-solver-agreement",
                   fmt::format("F={}: closed form vs iterative, relative error {:.3g}", money(mid), lin_err)});
  try {
    const double res = max_norm(inverse_elasticity_residual(model, closed, mean));
    lines.push_back({pass_if(res <= 1e-6), "inverse-elasticity-rule",
                     fmt::format("F={}: largest residual {:.3g}", money(mid), res)});
  } catch (const ZeroExpectedDemand& e) {
    lines.push_back({Verdict::Skip, "inverse-elasticity-rule", e.what()});
  }

  if (model.scenarios().periods() <= 3) {
    const auto grid = oracle_grid(model, {mean, samples[1], closed.price});
    const auto free = oracle::grid_argmax_welfare(model, baseline, std::nullopt, grid);
    lines.push_back({pass_if(within_one_step(free.price, mean, grid)), "oracle-two-part",
                     fmt::format("grid argmax ({:.6g}) vs price ({:.6g}), grid step {:.3g}",
                                 fmt::join(free.price, ", "), fmt::join(mean, ", "), grid.max_step())});
    const auto constrained = oracle::grid_argmax_welfare(
        model, baseline, oracle::RevenueConstraint{mid, 0.0, 0.0}, grid);
    lines.push_back({pass_if(within_one_step(constrained.price, closed.price, grid)), "oracle-linear",
                     fmt::format("F={}: grid argmax ({:.6g}) vs solver ({:.6g}), grid step {:.3g}", money(mid),
                                 fmt::join(constrained.price, ", "), fmt::join(closed.price, ", "),
                                 grid.max_step())});
  } else {
    lines.push_back({Verdict::Skip, "oracle-two-part", "grid oracle needs at most 3 periods"});
    lines.push_back({Verdict::Skip, "oracle-linear", "grid oracle needs at most 3 periods"});
  }

  const PlannerBound bound = planner_bound_gain(model, baseline);
  const double tp_gain =
      welfare_gains(model, solve_two_part(model, retailer_surplus(model, baseline)), baseline).delta_sw;
  const double gap = bound.gain - tp_gain;
  lines.push_back({pass_if(std::abs(gap) <= 1e-9 * std::max(1.0, std::abs(bound.gain))), "planner-bound",
                   fmt::format("settled planner gain {} vs two-part gain {}, gap {:.3g}", money(bound.gain),
                               money(tp_gain), gap)});
  const double state_gap = bound.conditional_gain - tp_gain;
  if (bound.dependence_warning)
    lines.push_back({Verdict::Warn, "independence",
                     fmt::format("largest |corr(lambda, Omega)| is {:.3g}; a planner seeing the demand "
                                 "state gains {} more than the two-part tariff",
                                 bound.max_abs_correlation, money(state_gap))});
  else
    lines.push_back({Verdict::Pass, "independence",
                     fmt::format("largest |corr(lambda, Omega)| is {:.3g}; state-aware planner gap {}",
                                 bound.max_abs_correlation, money(state_gap))});

  const auto rate = provenance_number(file, "flat_rate");
  const auto target = provenance_number(file, "elasticity");
  if (rate && target) {
    const Vector flat = Vector::Constant(mean.size(), *rate);
    const double realized = elasticity_matrix(model, flat).aggregate();
    lines.push_back({pass_if(std::abs(realized - *target) <= 1e-9), "elasticity-round-trip",
                     fmt::format("realized {:.12g}, target {:.12g}", realized, *target)});
  }
  return lines;
}

struct CheckArgs {
  std::string model;
  BaselineFlags baseline;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  const ModelFile file = load_model(a.model);
  std::optional<ScenarioSet> set;
  auto lines = structural_checks(file, set);
  const bool structural_ok =
      std::none_of(lines.begin(), lines.end(), [](const auto& l) { return l.verdict == Verdict::Fail; });
  if (structural_ok) {
    const LinearDemandModel model = build_model(file);
    const Tariff baseline = resolve_baseline(file, model.scenarios(), a.baseline);
    auto more = model_checks(file, model, baseline);
    lines.insert(lines.end(), more.begin(), more.end());
  } else {
    lines.push_back({Verdict::Skip, "model-checks", "model invariants failed; nothing else was run"});
  }
  std::size_t failed = 0;
  for (const auto& l : lines) {
    fmt::print(out, "{}  {:<24} {}\n", verdict_name(l.verdict), l.name, l.detail);
    if (l.verdict == Verdict::Fail) ++failed;
  }
  fmt::print(out, "{} checks, {} failed\n", lines.size(), failed);
  return failed == 0 ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Retail electricity tariff design under demand and price uncertainty", "tarifflab"};
  app.set_version_flag("--version", TARIFFLAB_VERSION_STRING);
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Calibrate a demand model from hourly load and prices");
  fit_cmd->add_option("--load", fit.load, "Load CSV (day,hour,value in kWh)")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--prices", fit.prices, "Wholesale price CSV (day,hour,value)")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--price-unit", fit.price_unit, "kwh or mwh")->capture_default_str();
  fit_cmd->add_option("--flat-rate", fit.config.flat_rate, "Flat retail rate, $/kWh")->capture_default_str();
  fit_cmd->add_option("--elasticity", fit.config.elasticity, "Target aggregate own-price elasticity")->capture_default_str();
  fit_cmd->add_option("--alpha", fit.config.kernel_decay, "Kernel decay in (0, 1)")->capture_default_str();
  fit_cmd->add_option("--customers", fit.config.customers, "Number of customers")->capture_default_str();
  fit_cmd->add_option("--connection-charge", fit.config.connection_charge, "Baseline connection charge, $/customer/day")->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Model file to write")->required();

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Optimal tariff of one family for a revenue target");
  solve_cmd->add_option("--model", solve.model, "Model file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--family", solve.family, "two-part, linear, flat-linear, fixed-a-two-part or adjusted-flat")->required();
  solve_cmd->add_option("--target-rs", solve.target, "Retailer surplus target F in $/day, or `baseline`")->required();
  solve_cmd->add_option("--out", solve.out, "Also write the report to this file");
  solve.baseline.attach(solve_cmd);

  ParetoArgs pareto;
  auto* pareto_cmd = app.add_subcommand("pareto", "Sweep revenue targets and tabulate surplus gains");
  pareto_cmd->add_option("--model", pareto.model, "Model file")->required()->check(CLI::ExistingFile);
  pareto_cmd->add_option("--families", pareto.families, "Comma-separated families (default all)")->delimiter(',');
  pareto_cmd->add_option("--f-min", pareto.f_min, "Lowest target");
  pareto_cmd->add_option("--f-max", pareto.f_max, "Highest target");
  pareto_cmd->add_option("--steps", pareto.steps, "Number of targets")->capture_default_str();
  pareto_cmd->add_option("--out", pareto.out, "CSV file (default stdout)");
  pareto_cmd->add_option("--svg", pareto.svg, "SVG plot file");
  pareto.baseline.attach(pareto_cmd);

  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check", "Run model diagnostics");
  check_cmd->add_option("--model", check.model, "Model file")->required()->check(CLI::ExistingFile);
  check.baseline.attach(check_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out);
    if (solve_cmd->parsed()) return cmd_solve(solve, out);
    if (pareto_cmd->parsed()) return cmd_pareto(pareto, out);
    if (check_cmd->parsed()) return cmd_check(check, out);
  } catch (const InfeasibleTarget& e) {
    fmt::print(err, "infeasible: {}\n", e.what());
    return kExitInfeasible;
  } catch (const InvalidRegime& e) {
    fmt::print(err, "infeasible: {}\n", e.what());
    fmt::print(err, "feasible range starts at {:.6g}\n", e.lowest());
    return kExitInfeasible;
  } catch (const InputError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    fmt::print(err, "internal error: {}\n", e.what());
    return kExitInternal;
  }
  return kExitInput;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"tarifflab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace tarifflab
