#include "output.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "tarifflab/errors.hpp"

namespace tarifflab::cli {

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1)
    throw Error("sha256 failed");
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return sha256_hex(bytes);
}

std::string timestamp_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    if (end != epoch && *end == '\0') t = static_cast<std::time_t>(v);
  }
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(t));
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  return output.string() + ".manifest.json";
}

void write_with_manifest(const std::filesystem::path& path, std::string_view content,
                         const RunManifest& manifest) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
    out << content;
  }
  Json inputs = Json::object();
  for (const auto& [name, file] : manifest.inputs)
    inputs[name] = Json{{"path", file.string()}, {"sha256", sha256_file(file)}};
  const Json doc{{"tool", "tarifflab"},
                 {"version", TARIFFLAB_VERSION_STRING},
                 {"command", manifest.command},
                 {"config", manifest.config},
                 {"inputs", inputs},
                 {"output", Json{{"path", path.string()}, {"sha256", sha256_hex(content)}}},
                 {"timestamp", timestamp_now()}};
  std::ofstream out(manifest_path(path), std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", manifest_path(path).string()));
  out << doc.dump(2) << '\n';
}

std::string fronts_csv(std::span<const ParetoFront> fronts, std::size_t periods) {
  std::string out = "family,F,delta_cs,delta_rs,delta_sw,feasible,A";
  for (std::size_t k = 0; k < periods; ++k) out += fmt::format(",pi_{}", k);
  out += '\n';
  for (const auto& front : fronts) {
    for (const auto& p : front.points) {
      out += fmt::format("{},{:.17g}", family_name(front.family), p.target);
      if (!p.feasible) {
        out += ",nan,nan,nan,0,nan";
        for (std::size_t k = 0; k < periods; ++k) out += ",nan";
      } else {
        out += fmt::format(",{:.17g},{:.17g},{:.17g},1,{:.17g}", p.delta_cs, p.delta_rs, p.delta_sw,
                           p.tariff->connection_charge());
        for (Eigen::Index k = 0; k < p.tariff->price().size(); ++k)
          out += fmt::format(",{:.17g}", p.tariff->price()(k));
      }
      out += '\n';
    }
  }
  return out;
}

namespace {

constexpr std::array<const char*, 5> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                  "#ff7f0e"};
constexpr double kWidth = 760, kHeight = 520;
constexpr double kLeft = 90, kRight = 190, kTop = 30, kBottom = 60;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) lo = -1, hi = 1;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      const double pad = std::max(1.0, std::abs(hi)) * 0.05;
      lo -= pad;
      hi += pad;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

std::vector<double> ticks(const Range& r) {
  const double raw = (r.hi - r.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-9 * step; v += step)
    out.push_back(std::abs(v) < 1e-9 * step ? 0.0 : v);
  return out;
}

}  // namespace

std::string fronts_svg(std::span<const ParetoFront> fronts, double baseline_rs) {
  Range xr, yr;
  for (const auto& front : fronts)
    for (const auto& p : front.points) {
      xr.add(p.delta_cs);
      yr.add(p.feasible ? p.delta_rs : p.target - baseline_rs);
    }
  xr.settle();
  yr.settle();
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto x = [&](double v) { return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto y = [&](double v) { return kTop + (yr.hi - v) / (yr.hi - yr.lo) * ph; };

  std::ostringstream s;
  s << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight);
  s << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n",
                   kLeft, kTop, pw, ph);
  for (double t : ticks(xr)) {
    s << fmt::format("<line x1=\"{0:.6g}\" y1=\"{1}\" x2=\"{0:.6g}\" y2=\"{2}\" stroke=\"#ddd\"/>\n",
                     x(t), kTop, kTop + ph);
    s << fmt::format("<text x=\"{:.6g}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", x(t),
                     kTop + ph + 18, t);
  }
  for (double t : ticks(yr)) {
    s << fmt::format("<line x1=\"{1}\" y1=\"{0:.6g}\" x2=\"{2}\" y2=\"{0:.6g}\" stroke=\"#ddd\"/>\n",
                     y(t), kLeft, kLeft + pw);
    s << fmt::format("<text x=\"{}\" y=\"{:.6g}\" text-anchor=\"end\">{:.4g}</text>\n", kLeft - 6,
                     y(t) + 4, t);
  }
  s << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">consumer surplus gain ($/day)</text>\n",
                   kLeft + pw / 2, kHeight - 15);
  s << fmt::format(
      "<text x=\"20\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0})\">retailer "
      "surplus gain ($/day)</text>\n",
      kTop + ph / 2);

  for (std::size_t f = 0; f < fronts.size(); ++f) {
    const auto& front = fronts[f];
    const char* colour = kPalette[f % kPalette.size()];
    std::string points;
    for (const auto* p : front.feasible_points())
      points += fmt::format("{}{:.6g},{:.6g}", points.empty() ? "" : " ", x(p->delta_cs), y(p->delta_rs));
    s << fmt::format("<g class=\"front\" data-family=\"{}\">\n", family_name(front.family));
    if (!points.empty())
      s << fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                       points, colour);
    for (const auto& p : front.points) {
      // Infeasible targets have no consumer surplus; pin them to the left edge.
      const double px = p.feasible ? x(p.delta_cs) : kLeft;
      const double py = y(p.feasible ? p.delta_rs : p.target - baseline_rs);
      if (p.feasible)
        s << fmt::format("<circle cx=\"{:.6g}\" cy=\"{:.6g}\" r=\"3\" fill=\"{}\"/>\n", px, py, colour);
      else
        s << fmt::format(
            "<circle class=\"infeasible\" cx=\"{:.6g}\" cy=\"{:.6g}\" r=\"3.5\" fill=\"none\" "
            "stroke=\"{}\"/>\n",
            px, py, colour);
    }
    const double ly = kTop + 16 + 20 * static_cast<double>(f);
    s << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                     kLeft + pw + 15, ly, kLeft + pw + 40, colour);
    s << fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kLeft + pw + 46, ly + 4,
                     family_name(front.family));
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace tarifflab::cli
