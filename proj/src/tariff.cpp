#include "tarifflab/tariff.hpp"

#include <cmath>

#include <fmt/format.h>

#include "tarifflab/errors.hpp"

namespace tarifflab {

std::string_view family_name(TariffFamily family) {
  switch (family) {
    case TariffFamily::TwoPartOptimal: return "two-part";
    case TariffFamily::LinearOptimal: return "linear";
    case TariffFamily::FlatLinear: return "flat-linear";
    case TariffFamily::FixedChargeTwoPart: return "fixed-a-two-part";
    case TariffFamily::AdjustedFlat: return "adjusted-flat";
  }
  return "unknown";
}

std::optional<TariffFamily> parse_family(std::string_view name) {
  if (name == "two-part" || name == "two-part-optimal") return TariffFamily::TwoPartOptimal;
  if (name == "linear" || name == "linear-optimal") return TariffFamily::LinearOptimal;
  if (name == "flat-linear") return TariffFamily::FlatLinear;
  if (name == "fixed-a-two-part" || name == "fixed-a") return TariffFamily::FixedChargeTwoPart;
  if (name == "adjusted-flat") return TariffFamily::AdjustedFlat;
  return std::nullopt;
}

bool is_flat_family(TariffFamily family) {
  return family == TariffFamily::FlatLinear || family == TariffFamily::AdjustedFlat;
}

bool has_no_connection_charge(TariffFamily family) {
  return family == TariffFamily::LinearOptimal || family == TariffFamily::FlatLinear;
}

Tariff::Tariff(TariffFamily family, double connection_charge, Vector price)
    : family_(family), connection_charge_(connection_charge), price_(std::move(price)) {
  if (price_.size() == 0) throw InvalidModel("tariff has an empty price vector");
  if (!price_.allFinite() || !std::isfinite(connection_charge_))
    throw InvalidModel("tariff has non-finite entries");
  if (is_flat_family(family_) && (price_.array() != price_(0)).any())
    throw InvalidModel(fmt::format("{} tariff must have equal prices", family_name(family_)));
  if (has_no_connection_charge(family_) && connection_charge_ != 0.0)
    throw InvalidModel(
        fmt::format("{} tariff cannot carry a connection charge", family_name(family_)));
}

}  // namespace tarifflab
