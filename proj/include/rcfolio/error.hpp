#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rcfolio {

// Every failure raised by the library carries one of these codes.
enum class Errc {
  FileNotFound,
  ParseError,
  MisalignedDates,
  NonPositivePrice,
  UnknownAssetClass,
  InvalidSpec,
  PanelTooShort,
  InvalidRange,
  DimensionMismatch,
  TapeMismatch,
  ShapeMismatch,
  NotOnSimplex,
  RangeOutOfBounds,
  DegenerateConcentration,
  EpisodeTooShort,
  DataTooShort,
  EmptySeries,
  DegenerateSeries,
  NoDownside,
  TooFewRebalances,
  EmptyUniverse,
  MissingClass,
  PortfolioWipedOut,
  ScheduleOutOfRange,
  StrategyFailure,
  MismatchedRanges,
  UntaggedAsset,
  UnknownAsset,
  MissingCheckpoint,
  CheckpointMismatch,
  NotTrainable,
  ConfigError,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace rcfolio
