#include "tarifflab/model_file.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include <fmt/format.h>

#include "tarifflab/errors.hpp"

namespace tarifflab {

namespace {

constexpr std::string_view kMagic = "tarifflab-model";
constexpr double kMomentTolerance = 1e-9;

void append_values(std::ostream& out, std::string_view key, const double* data, Eigen::Index count) {
  out << key;
  for (Eigen::Index i = 0; i < count; ++i) out << ' ' << fmt::format("{:.17g}", data[i]);
}

void write_values(std::ostream& out, std::string_view key, const double* data, Eigen::Index count) {
  append_values(out, key, data, count);
  out << '\n';
}

void write_vector(std::ostream& out, std::string_view key, const Vector& v) {
  write_values(out, key, v.data(), v.size());
}

void write_matrix(std::ostream& out, std::string_view key, const Matrix& m) {
  // Row-major on disk; Eigen stores column-major.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  write_values(out, key, rm.data(), rm.size());
}

class LineReader {
 public:
  LineReader(std::string source, std::size_t line, std::istringstream tokens)
      : source_(std::move(source)), line_(line), tokens_(std::move(tokens)) {}

  [[noreturn]] void fail(const std::string& reason) const {
    throw ModelFormatError(source_, line_, reason);
  }

  std::string word() {
    std::string w;
    if (!(tokens_ >> w)) fail("unexpected end of line");
    return w;
  }

  double number() {
    const std::string w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end != w.c_str() + w.size() || !std::isfinite(v)) fail(fmt::format("bad number `{}`", w));
    return v;
  }

  std::size_t count() {
    const double v = number();
    if (v < 0.0 || v != std::floor(v)) fail("expected a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  Vector vector(std::size_t n) {
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = number();
    return v;
  }

  Matrix matrix(std::size_t n) {
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = number();
    return m;
  }

  std::string rest() {
    std::string r;
    std::getline(tokens_ >> std::ws, r);
    return r;
  }

  void finish() {
    std::string extra;
    if (tokens_ >> extra) fail(fmt::format("unexpected trailing token `{}`", extra));
  }

 private:
  std::string source_;
  std::size_t line_;
  std::istringstream tokens_;
};

bool close(const Matrix& a, const Matrix& b) {
  const double scale = std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
  return (a - b).cwiseAbs().maxCoeff() <= kMomentTolerance * scale;
}

}  // namespace

ModelFile to_model_file(const LinearDemandModel& model, Provenance provenance) {
  const auto& set = model.scenarios();
  return ModelFile{set.periods(),
                   model.customers(),
                   model.sensitivity(),
                   set.mean_price(),
                   set.mean_state(),
                   "population",
                   set.cross_covariance(),
                   set.scenarios(),
                   std::move(provenance)};
}

LinearDemandModel build_model(const ModelFile& file) {
  if (file.covariance_convention != "population")
    throw InvalidModel(fmt::format("unsupported covariance convention `{}`",
                                   file.covariance_convention));
  ScenarioSet set(file.scenarios);
  if (set.periods() != file.periods) throw DimensionMismatch("scenarios", file.periods, set.periods());
  if (!close(set.mean_price(), file.mean_price))
    throw InvalidModel("stored mean price does not match the scenario list");
  if (!close(set.mean_state(), file.mean_state))
    throw InvalidModel("stored mean state does not match the scenario list");
  if (!close(set.cross_covariance(), file.cross_covariance))
    throw InvalidModel("stored cross-covariance does not match the scenario list");
  return LinearDemandModel(file.sensitivity, std::move(set), file.customers);
}

void write_model(std::ostream& out, const ModelFile& file) {
  out << kMagic << ' ' << kModelFormatVersion << '\n';
  out << "periods " << file.periods << '\n';
  out << "customers " << fmt::format("{:.17g}", file.customers) << '\n';
  out << "scenario_count " << file.scenarios.size() << '\n';
  write_matrix(out, "sensitivity", file.sensitivity);
  write_vector(out, "mean_price", file.mean_price);
  write_vector(out, "mean_state", file.mean_state);
  out << "covariance_convention " << file.covariance_convention << '\n';
  write_matrix(out, "cross_covariance", file.cross_covariance);
  for (std::size_t j = 0; j < file.scenarios.size(); ++j) {
    const auto& s = file.scenarios[j];
    out << "scenario " << j;
    append_values(out, " price", s.price.data(), s.price.size());
    append_values(out, " state", s.state.data(), s.state.size());
    out << '\n';
  }
  for (const auto& [key, value] : file.provenance) out << "provenance." << key << ' ' << value << '\n';
  out << "end\n";
}

ModelFile read_model(std::istream& in, const std::string& source) {
  ModelFile file;
  std::string line;
  std::size_t line_no = 0;
  bool magic_seen = false, ended = false;
  std::optional<std::size_t> scenario_count;
  std::map<std::string, std::size_t> seen;

  auto need_periods = [&](LineReader& r) {
    if (file.periods == 0) r.fail("`periods` must come before array fields");
    return file.periods;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    LineReader r(source, line_no, std::istringstream(line));
    if (ended) r.fail("content after `end`");
    const std::string key = r.word();

    if (!magic_seen) {
      if (key != kMagic) r.fail(fmt::format("expected `{}` header", kMagic));
      const auto version = r.count();
      if (version != static_cast<std::size_t>(kModelFormatVersion))
        r.fail(fmt::format("unsupported format version {}", version));
      r.finish();
      magic_seen = true;
      continue;
    }
    if (key != "scenario" && key.rfind("provenance.", 0) != 0 && seen[key]++ > 0)
      r.fail(fmt::format("duplicate key `{}`", key));

    if (key == "periods") {
      file.periods = r.count();
      if (file.periods == 0) r.fail("periods must be positive");
    } else if (key == "customers") {
      file.customers = r.number();
    } else if (key == "scenario_count") {
      scenario_count = r.count();
    } else if (key == "sensitivity") {
      file.sensitivity = r.matrix(need_periods(r));
    } else if (key == "mean_price") {
      file.mean_price = r.vector(need_periods(r));
    } else if (key == "mean_state") {
      file.mean_state = r.vector(need_periods(r));
    } else if (key == "covariance_convention") {
      file.covariance_convention = r.word();
    } else if (key == "cross_covariance") {
      file.cross_covariance = r.matrix(need_periods(r));
    } else if (key == "scenario") {
      const auto n = need_periods(r);
      if (r.count() != file.scenarios.size()) r.fail("scenarios must be numbered 0, 1, 2, ...");
      if (r.word() != "price") r.fail("expected `price`");
      Vector price = r.vector(n);
      if (r.word() != "state") r.fail("expected `state`");
      Vector state = r.vector(n);
      file.scenarios.push_back(Scenario{std::move(price), std::move(state)});
    } else if (key.rfind("provenance.", 0) == 0) {
      file.provenance[key.substr(std::string_view("provenance.").size())] = r.rest();
      continue;
    } else if (key == "end") {
      ended = true;
    } else {
      r.fail(fmt::format("unknown key `{}`", key));
    }
    r.finish();
  }

  auto missing = [&](const std::string& what) {
    throw ModelFormatError(source, line_no, fmt::format("missing `{}`", what));
  };
  if (!magic_seen) missing(std::string(kMagic));
  if (!ended) missing("end");
  for (const char* key : {"periods", "customers", "scenario_count", "sensitivity", "mean_price",
                          "mean_state", "cross_covariance"})
    if (!seen.count(key)) missing(key);
  if (*scenario_count != file.scenarios.size())
    throw ModelFormatError(source, line_no,
                           fmt::format("scenario_count is {} but {} scenarios are listed",
                                       *scenario_count, file.scenarios.size()));
  return file;
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  std::ostringstream buffer;
  write_model(buffer, file);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << buffer.str();
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  return read_model(in, path.string());
}

std::optional<double> provenance_number(const ModelFile& file, const std::string& key) {
  const auto it = file.provenance.find(key);
  if (it == file.provenance.end()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0' || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace tarifflab
