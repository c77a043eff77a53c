#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "tarifflab/types.hpp"

namespace tarifflab {

enum class TariffFamily {
  TwoPartOptimal,
  LinearOptimal,
  FlatLinear,
  FixedChargeTwoPart,
  AdjustedFlat,
};

inline constexpr std::array<TariffFamily, 5> kAllFamilies = {
    TariffFamily::TwoPartOptimal, TariffFamily::LinearOptimal, TariffFamily::FlatLinear,
    TariffFamily::FixedChargeTwoPart, TariffFamily::AdjustedFlat};

/// Canonical command-line name, e.g. "two-part" or "flat-linear".
std::string_view family_name(TariffFamily family);

/// Accepts canonical names and the long forms ("two-part-optimal", ...).
std::optional<TariffFamily> parse_family(std::string_view name);

bool is_flat_family(TariffFamily family);
bool has_no_connection_charge(TariffFamily family);

/// Affine ex-ante tariff T(q) = A + price^T q.
class Tariff {
 public:
  /// Throws InvalidModel when the price is not finite or the family's shape is violated.
  Tariff(TariffFamily family, double connection_charge, Vector price);

  TariffFamily family() const noexcept { return family_; }
  double connection_charge() const noexcept { return connection_charge_; }  ///< $/customer/cycle
  const Vector& price() const noexcept { return price_; }                    ///< $/kWh

 private:
  TariffFamily family_;
  double connection_charge_;
  Vector price_;
};

}  // namespace tarifflab
