#include "tarifflab/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

#include <fmt/format.h>

#include "tarifflab/errors.hpp"
#include "tarifflab/welfare.hpp"

namespace tarifflab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

// strtod also accepts "nan" and "inf", which are then reported as non-finite.
bool parse_value(std::string_view text, double& out) {
  if (text.empty()) return false;
  const std::string copy(text);
  char* end = nullptr;
  out = std::strtod(copy.c_str(), &end);
  return end == copy.c_str() + copy.size();
}

}  // namespace

RawSeries parse_csv(std::istream& in, SeriesKind kind, const std::string& source, double scale) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::map<long, std::map<long, double>> by_day;
  long max_hour = -1;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split(view);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "day" || fields[1] != "hour" || fields[2] != "value")
        throw MalformedRow(source, line_no, "expected header `day,hour,value`");
      header_seen = true;
      continue;
    }
    if (fields.size() != 3)
      throw MalformedRow(source, line_no, fmt::format("expected 3 fields, got {}", fields.size()));
    long day = 0, hour = 0;
    if (!parse_number(fields[0], day)) throw MalformedRow(source, line_no, "day is not an integer");
    if (!parse_number(fields[1], hour) || hour < 0)
      throw MalformedRow(source, line_no, "hour is not a non-negative integer");
    double value = 0.0;
    if (!parse_value(fields[2], value)) throw MalformedRow(source, line_no, "value is not a number");
    if (!std::isfinite(value)) throw NonFiniteValue(source, line_no);
    if (kind == SeriesKind::Load && value < 0.0)
      throw MalformedRow(source, line_no, "load must be non-negative");
    auto [it, inserted] = by_day[day].emplace(hour, value * scale);
    if (!inserted)
      throw MalformedRow(source, line_no, fmt::format("duplicate day {} hour {}", day, hour));
    max_hour = std::max(max_hour, hour);
  }
  if (!header_seen) throw MalformedRow(source, line_no + 1, "file is empty");
  if (by_day.empty()) throw MalformedRow(source, line_no + 1, "file has no data rows");

  const auto periods = static_cast<std::size_t>(max_hour + 1);
  RawSeries series{kind, {}, Matrix(static_cast<Eigen::Index>(by_day.size()),
                                    static_cast<Eigen::Index>(periods))};
  Eigen::Index row = 0;
  for (const auto& [day, hours] : by_day) {
    for (long h = 0; h <= max_hour; ++h) {
      const auto it = hours.find(h);
      if (it == hours.end()) throw MissingHour(source, day, h);
      series.values(row, h) = it->second;
    }
    series.day_labels.push_back(day);
    ++row;
  }
  return series;
}

RawSeries parse_csv(const std::filesystem::path& path, SeriesKind kind, double scale) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  return parse_csv(in, kind, path.string(), scale);
}

MomentEstimate estimate_moments(const RawSeries& load, const RawSeries& prices) {
  if (load.kind != SeriesKind::Load || prices.kind != SeriesKind::Price)
    throw AlignmentMismatch("expected a load series and a price series");
  if (load.days() != prices.days())
    throw AlignmentMismatch(
        fmt::format("load has {} days, prices have {}", load.days(), prices.days()));
  if (load.periods() != prices.periods())
    throw AlignmentMismatch(fmt::format("load has {} periods per day, prices have {}",
                                        load.periods(), prices.periods()));
  if (load.day_labels != prices.day_labels)
    throw AlignmentMismatch("load and price files cover different days");
  if (load.days() < 2) throw SingleScenario();

  std::vector<Scenario> scenarios;
  scenarios.reserve(load.days());
  for (std::size_t j = 0; j < load.days(); ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    scenarios.push_back(Scenario{prices.values.row(r).transpose(), load.values.row(r).transpose()});
  }
  ScenarioSet set(std::move(scenarios));
  const double count = static_cast<double>(set.size());
  Matrix unbiased = set.cross_covariance() * (count / (count - 1.0));
  return MomentEstimate{std::move(set), std::move(unbiased)};
}

void CalibrationConfig::validate() const {
  if (!(elasticity < 0.0)) throw ScaleNonPositive(elasticity);
  if (!(kernel_decay > 0.0 && kernel_decay < 1.0))
    throw InvalidArgument(fmt::format("kernel decay alpha must lie in (0, 1), got {}", kernel_decay));
  if (!(flat_rate > 0.0)) throw InvalidArgument("flat rate must be positive");
  if (!(customers >= 1.0) || !std::isfinite(customers))
    throw InvalidArgument("customer count must be at least 1");
  if (!std::isfinite(connection_charge))
    throw InvalidArgument("connection charge must be finite");
}

Matrix geometric_kernel(std::size_t periods, double alpha) {
  const auto n = static_cast<Eigen::Index>(periods);
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = std::pow(alpha, std::abs(i - j));
  return k;
}

LinearDemandModel calibrate_demand(const ScenarioSet& consumption, const CalibrationConfig& config) {
  config.validate();
  const auto n = consumption.periods();
  const Vector ones = Vector::Ones(static_cast<Eigen::Index>(n));
  const double total_load = consumption.mean_state().sum();
  if (!(total_load > 0.0))
    throw NonPositiveLoad(fmt::format("mean daily consumption must be positive, got {}", total_load));

  const Matrix kernel = geometric_kernel(n, config.kernel_decay);
  const double scale = -config.elasticity * total_load / (config.flat_rate * ones.dot(kernel * ones));
  Matrix g = scale * kernel;
  const Vector shift = g * ones * config.flat_rate;
  LinearDemandModel model(std::move(g), consumption.with_shifted_states(shift), config.customers);

  const double realised = elasticity_matrix(model, Vector::Constant(n, config.flat_rate)).aggregate();
  if (std::abs(realised - config.elasticity) > 1e-9 * std::max(1.0, std::abs(config.elasticity)))
    throw Error(fmt::format("calibration missed the elasticity target: {} vs {}", realised,
                            config.elasticity));
  return model;
}

RevenueBaseline revenue_baseline(const LinearDemandModel& model, const CalibrationConfig& config) {
  const auto n = model.scenarios().periods();
  const Vector flat = Vector::Constant(static_cast<Eigen::Index>(n), config.flat_rate);
  const double lump = model.customers() * config.connection_charge;
  return RevenueBaseline{expected_demand(model, flat).dot(flat) + lump, phi_bar(model, flat) + lump};
}

Tariff flat_baseline_tariff(std::size_t periods, double flat_rate, double connection_charge) {
  return Tariff(TariffFamily::AdjustedFlat, connection_charge,
                Vector::Constant(static_cast<Eigen::Index>(periods), flat_rate));
}

}  // namespace tarifflab
