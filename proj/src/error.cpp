#include "rcfolio/error.hpp"

#include <fmt/format.h>

namespace rcfolio {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::ParseError: return "ParseError";
    case Errc::MisalignedDates: return "MisalignedDates";
    case Errc::NonPositivePrice: return "NonPositivePrice";
    case Errc::UnknownAssetClass: return "UnknownAssetClass";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::PanelTooShort: return "PanelTooShort";
    case Errc::InvalidRange: return "InvalidRange";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::TapeMismatch: return "TapeMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NotOnSimplex: return "NotOnSimplex";
    case Errc::RangeOutOfBounds: return "RangeOutOfBounds";
    case Errc::DegenerateConcentration: return "DegenerateConcentration";
    case Errc::EpisodeTooShort: return "EpisodeTooShort";
    case Errc::DataTooShort: return "DataTooShort";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::DegenerateSeries: return "DegenerateSeries";
    case Errc::NoDownside: return "NoDownside";
    case Errc::TooFewRebalances: return "TooFewRebalances";
    case Errc::EmptyUniverse: return "EmptyUniverse";
    case Errc::MissingClass: return "MissingClass";
    case Errc::PortfolioWipedOut: return "PortfolioWipedOut";
    case Errc::ScheduleOutOfRange: return "ScheduleOutOfRange";
    case Errc::StrategyFailure: return "StrategyFailure";
    case Errc::MismatchedRanges: return "MismatchedRanges";
    case Errc::UntaggedAsset: return "UntaggedAsset";
    case Errc::UnknownAsset: return "UnknownAsset";
    case Errc::MissingCheckpoint: return "MissingCheckpoint";
    case Errc::CheckpointMismatch: return "CheckpointMismatch";
    case Errc::NotTrainable: return "NotTrainable";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), message)), code_(code) {}

}  // namespace rcfolio
