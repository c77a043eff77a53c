// Generates the bundled synthetic summer dataset: hourly aggregate load (kWh)
// and day-ahead prices ($/MWh) for a utility with about 2.2 million
// residential customers.
//
// A daily weather index follows an AR(1) process and drives both load and
// prices, so the two are positively correlated. After sampling, load is
// scaled to a mean daily total of 35.15 GWh and prices to a load-weighted
// mean of 38.7 $/MWh.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

namespace {

constexpr int kHours = 24;

double load_shape(int h) {
  const double x = 2.0 * std::numbers::pi * (h - 17) / kHours;
  return 1.0 + 0.26 * std::cos(x) + 0.05 * std::cos(2.0 * x);
}

double price_shape(int h) {
  const double x = 2.0 * std::numbers::pi * (h - 16) / kHours;
  return 1.0 + 0.45 * std::max(0.0, std::cos(x)) - 0.1 * std::max(0.0, -std::cos(x));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Write synthetic load.csv and prices.csv"};
  std::uint64_t seed = 20130601;
  int days = 92;
  std::filesystem::path out_dir = "data/synthetic";
  double daily_load = 35.15e6;
  double mean_price = 38.7;
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--days", days)->capture_default_str()->check(CLI::Range(2, 10000));
  app.add_option("--out-dir", out_dir)->capture_default_str();
  app.add_option("--daily-load", daily_load, "Mean daily total, kWh")->capture_default_str();
  app.add_option("--mean-price", mean_price, "Load-weighted mean, $/MWh")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> load(static_cast<std::size_t>(days) * kHours), price(load.size());
  double weather = 0.0;
  for (int d = 0; d < days; ++d) {
    weather = 0.7 * weather + std::sqrt(1.0 - 0.49) * normal(rng);
    const bool weekend = d % 7 == 5 || d % 7 == 6;
    const double day_noise = 0.05 * normal(rng);
    for (int h = 0; h < kHours; ++h) {
      const double peakness = std::max(0.0, load_shape(h) - 1.0) / 0.31;
      const std::size_t i = static_cast<std::size_t>(d) * kHours + h;
      load[i] = load_shape(h) * (1.0 + 0.09 * weather * (0.5 + 0.5 * peakness) -
                                 (weekend ? 0.04 : 0.0) + 0.012 * normal(rng));
      price[i] = price_shape(h) * std::exp(0.22 * weather + day_noise + 0.07 * normal(rng));
    }
  }

  double load_sum = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < load.size(); ++i) load_sum += load[i];
  const double load_scale = daily_load * days / load_sum;
  for (auto& v : load) v *= load_scale;
  for (std::size_t i = 0; i < load.size(); ++i) weighted += load[i] * price[i];
  const double price_scale = mean_price * (daily_load * days) / weighted;
  for (auto& v : price) v *= price_scale;

  std::filesystem::create_directories(out_dir);
  std::ofstream lf(out_dir / "load.csv"), pf(out_dir / "prices.csv");
  lf << "day,hour,value\n";
  pf << "day,hour,value\n";
  for (int d = 0; d < days; ++d)
    for (int h = 0; h < kHours; ++h) {
      const std::size_t i = static_cast<std::size_t>(d) * kHours + h;
      lf << fmt::format("{},{},{:.1f}\n", d, h, load[i]);
      pf << fmt::format("{},{},{:.2f}\n", d, h, price[i]);
    }
  fmt::print("wrote {} days to {}\n", days, out_dir.string());
  return 0;
}
