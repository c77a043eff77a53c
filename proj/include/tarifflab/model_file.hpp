#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tarifflab/demand.hpp"
#include "tarifflab/scenario_set.hpp"
#include "tarifflab/types.hpp"

namespace tarifflab {

/// How a calibrated model was produced. Free-form string values.
using Provenance = std::map<std::string, std::string>;

/// Raw contents of a model file, before any invariant is enforced.
///
/// Reading never rejects a non-symmetric or indefinite sensitivity matrix so
/// that `check` can name the failure; `build_model` enforces everything.
struct ModelFile {
  std::size_t periods = 0;
  double customers = 0.0;
  Matrix sensitivity;
  Vector mean_price;
  Vector mean_state;
  std::string covariance_convention = "population";
  Matrix cross_covariance;
  std::vector<Scenario> scenarios;
  Provenance provenance;
};

inline constexpr int kModelFormatVersion = 1;

ModelFile to_model_file(const LinearDemandModel& model, Provenance provenance = {});

/// Validates the stored moments against the scenario list and builds the model.
LinearDemandModel build_model(const ModelFile& file);

void write_model(std::ostream& out, const ModelFile& file);
ModelFile read_model(std::istream& in, const std::string& source = "<stream>");

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

std::optional<double> provenance_number(const ModelFile& file, const std::string& key);

}  // namespace tarifflab
