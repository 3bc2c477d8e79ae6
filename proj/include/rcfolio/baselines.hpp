#pragma once

#include <array>
#include <utility>
#include <vector>

#include "rcfolio/data.hpp"
#include "rcfolio/types.hpp"

namespace rcfolio::baselines {

/// Target fraction per asset class, split equally among the assets of each
/// class.
struct ClassAllocation {
  std::vector<std::pair<data::AssetClass, double>> targets;

  void validate() const;
};

// 30% equity, 40% long-term bonds, 15% intermediate bonds, 7.5% gold,
// 7.5% commodities.
ClassAllocation all_weather_allocation();

Vector equal_weight(const std::vector<data::Asset>& assets);

// 60% across equities, 40% across both bond classes pooled.
Vector sixty_forty(const std::vector<data::Asset>& assets);

Vector all_weather(const std::vector<data::Asset>& assets,
                   const ClassAllocation& allocation = all_weather_allocation());

// Every class in the allocation must be represented in the universe.
Vector allocate_by_class(const std::vector<data::Asset>& assets,
                         const ClassAllocation& allocation);

}  // namespace rcfolio::baselines
