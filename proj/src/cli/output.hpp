#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tarifflab/pareto.hpp"

namespace tarifflab::cli {

using Json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// UTC ISO-8601. Honours SOURCE_DATE_EPOCH for reproducible manifests.
std::string timestamp_now();

struct RunManifest {
  std::string command;
  Json config = Json::object();
  std::map<std::string, std::filesystem::path> inputs;
};

/// Writes `content` to `path` and `<path>.manifest.json` beside it.
void write_with_manifest(const std::filesystem::path& path, std::string_view content,
                         const RunManifest& manifest);

std::filesystem::path manifest_path(const std::filesystem::path& output);

std::string fronts_csv(std::span<const ParetoFront> fronts, std::size_t periods);
std::string fronts_svg(std::span<const ParetoFront> fronts, double baseline_rs);

}  // namespace tarifflab::cli
