#include "tarifflab/errors.hpp"

#include <fmt/format.h>

namespace tarifflab {

DimensionMismatch::DimensionMismatch(const std::string& what, std::size_t expected,
                                     std::size_t actual)
    : InputError(fmt::format("{}: expected dimension {}, got {}", what, expected, actual)) {}

ZeroExpectedDemand::ZeroExpectedDemand(std::size_t period, double value)
    : Error(fmt::format("expected demand in period {} is not positive ({:.6g})", period, value)),
      period_(period) {}

InfeasibleTarget::InfeasibleTarget(double target, double lowest, double highest)
    : Error(fmt::format("revenue target {:.6g} is infeasible; feasible range is [{:.6g}, {:.6g}]",
                        target, lowest, highest)),
      target_(target),
      lowest_(lowest),
      highest_(highest) {}

InvalidRegime::InvalidRegime(double target, double lowest)
    : Error(fmt::format("revenue target {:.6g} is below the two-part surplus {:.6g}", target,
                        lowest)),
      target_(target),
      lowest_(lowest) {}

TooFewPoints::TooFewPoints(std::size_t have, std::size_t need)
    : Error(fmt::format("front has {} feasible points, need at least {}", have, need)) {}

MalformedRow::MalformedRow(const std::string& source, std::size_t line, const std::string& reason)
    : InputError(fmt::format("{}:{}: malformed row: {}", source, line, reason)), line_(line) {}

MissingHour::MissingHour(const std::string& source, long day, long hour)
    : InputError(fmt::format("{}: day {} is missing hour {}", source, day, hour)),
      day_(day),
      hour_(hour) {}

NonFiniteValue::NonFiniteValue(const std::string& source, std::size_t line)
    : InputError(fmt::format("{}:{}: value is not finite", source, line)), line_(line) {}

SingleScenario::SingleScenario()
    : InputError("cross-covariance needs at least two days; got one") {}

ScaleNonPositive::ScaleNonPositive(double elasticity)
    : InputError(fmt::format("target elasticity must be negative, got {:.6g}", elasticity)) {}

ModelFormatError::ModelFormatError(const std::string& source, std::size_t line,
                                   const std::string& reason)
    : InputError(fmt::format("{}:{}: {}", source, line, reason)) {}

}  // namespace tarifflab
