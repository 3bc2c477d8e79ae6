#include "rcfolio/baselines.hpp"

#include <cmath>

#include <fmt/format.h>

#include "rcfolio/error.hpp"

namespace rcfolio::baselines {

using data::AssetClass;

void ClassAllocation::validate() const {
  double total = 0.0;
  for (const auto& [cls, frac] : targets) {
    if (!(frac >= 0.0)) throw Error(Errc::InvalidSpec, "class fractions must be non-negative");
    total += frac;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(Errc::InvalidSpec, fmt::format("class fractions sum to {}", total));
  }
}

ClassAllocation all_weather_allocation() {
  return ClassAllocation{{{AssetClass::Equity, 0.30},
                          {AssetClass::BondLong, 0.40},
                          {AssetClass::BondIntermediate, 0.15},
                          {AssetClass::Gold, 0.075},
                          {AssetClass::Commodity, 0.075}}};
}

Vector equal_weight(const std::vector<data::Asset>& assets) {
  if (assets.empty()) throw Error(Errc::EmptyUniverse, "no assets");
  const auto n = static_cast<Eigen::Index>(assets.size());
  return Vector::Constant(n, 1.0 / static_cast<double>(n));
}

Vector sixty_forty(const std::vector<data::Asset>& assets) {
  if (assets.empty()) throw Error(Errc::EmptyUniverse, "no assets");
  std::size_t equities = 0;
  std::size_t bonds = 0;
  for (const auto& a : assets) {
    if (a.asset_class == AssetClass::Equity) ++equities;
    if (data::is_bond(a.asset_class)) ++bonds;
  }
  if (equities == 0) throw Error(Errc::MissingClass, "60/40 needs at least one equity");
  if (bonds == 0) throw Error(Errc::MissingClass, "60/40 needs at least one bond");
  Vector w = Vector::Zero(static_cast<Eigen::Index>(assets.size()));
  for (std::size_t i = 0; i < assets.size(); ++i) {
    const auto cls = assets[i].asset_class;
    const auto k = static_cast<Eigen::Index>(i);
    if (cls == AssetClass::Equity) w[k] = 0.6 / static_cast<double>(equities);
    if (data::is_bond(cls)) w[k] = 0.4 / static_cast<double>(bonds);
  }
  return w;
}

Vector allocate_by_class(const std::vector<data::Asset>& assets,
                         const ClassAllocation& allocation) {
  if (assets.empty()) throw Error(Errc::EmptyUniverse, "no assets");
  allocation.validate();
  Vector w = Vector::Zero(static_cast<Eigen::Index>(assets.size()));
  for (const auto& [cls, frac] : allocation.targets) {
    std::size_t members = 0;
    for (const auto& a : assets) members += a.asset_class == cls ? 1 : 0;
    if (members == 0) {
      throw Error(Errc::MissingClass, fmt::format("no {} asset in the universe", data::to_string(cls)));
    }
    for (std::size_t i = 0; i < assets.size(); ++i) {
      if (assets[i].asset_class == cls) {
        w[static_cast<Eigen::Index>(i)] = frac / static_cast<double>(members);
      }
    }
  }
  return w;
}

Vector all_weather(const std::vector<data::Asset>& assets, const ClassAllocation& allocation) {
  return allocate_by_class(assets, allocation);
}

}  // namespace rcfolio::baselines
