#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rcfolio/date.hpp"
#include "rcfolio/types.hpp"

namespace rcfolio::data {

enum class AssetClass { Equity, BondIntermediate, BondLong, Commodity, Gold };

inline constexpr AssetClass kAllAssetClasses[] = {AssetClass::Equity, AssetClass::BondIntermediate,
                                                  AssetClass::BondLong, AssetClass::Commodity,
                                                  AssetClass::Gold};

std::string_view to_string(AssetClass cls);
std::optional<AssetClass> parse_asset_class(std::string_view text);

inline bool is_bond(AssetClass cls) {
  return cls == AssetClass::BondIntermediate || cls == AssetClass::BondLong;
}

struct Asset {
  std::string id;
  AssetClass asset_class = AssetClass::Equity;

  bool operator==(const Asset&) const = default;
};

using ClassMap = std::map<std::string, AssetClass, std::less<>>;

/// Date x asset market universe. Rows are trading dates, columns are assets.
///
/// Immutable once constructed; the constructor enforces strictly increasing
/// dates, unique asset ids and finite positive closes. Volume cells that are
/// NaN mean "not reported".
class AssetPanel {
 public:
  AssetPanel(std::vector<Date> dates, std::vector<Asset> assets, Matrix close,
             std::optional<Matrix> volume = std::nullopt);

  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<Asset>& assets() const { return assets_; }
  const Matrix& close() const { return close_; }
  const Matrix& volume() const { return volume_; }

  std::size_t num_days() const { return dates_.size(); }
  std::size_t num_assets() const { return assets_.size(); }

  std::optional<std::size_t> date_index(const Date& date) const;
  std::optional<std::size_t> asset_index(std::string_view id) const;

  // Rows [begin, end).
  AssetPanel slice(std::size_t begin, std::size_t end) const;

  bool operator==(const AssetPanel& other) const;

 private:
  std::vector<Date> dates_;
  std::vector<Asset> assets_;
  Matrix close_;
  Matrix volume_;
};

ClassMap load_class_map(const std::string& path);
void write_class_map(const AssetPanel& panel, const std::string& path);

/// Long-format CSV: `date,asset,close,volume`, one row per (date, asset).
/// Every asset must be present on every date.
AssetPanel load_panel_csv(const std::string& path, const ClassMap& class_map);
void write_panel_csv(const AssetPanel& panel, const std::string& path);

struct ReturnsMatrix {
  std::vector<Date> dates;  // panel dates from index 1
  Matrix values;            // (T-1) x N, values(k, i) = close(k+1, i) / close(k, i) - 1
};

ReturnsMatrix compute_returns(const AssetPanel& panel);

struct WindowSpec {
  std::size_t length = 20;
  bool use_volume = false;

  std::size_t features_per_asset() const { return use_volume ? 2 : 1; }
};

/// Model input for the decision taken on day `t`, flattened day-major:
/// tensor[(d * N + i) * F + f] for window day d, asset i, feature f.
struct FeatureWindow {
  std::size_t t = 0;
  std::size_t features_per_asset = 1;  // feature 0 is the daily return
  Vector tensor;
};

// Window for decision day t; reads only rows < t. Valid for length <= t < T.
FeatureWindow window_at(const AssetPanel& panel, std::size_t t, const WindowSpec& spec);

// One window per decision day in [length, T-2].
std::vector<FeatureWindow> build_windows(const AssetPanel& panel, const WindowSpec& spec);

std::pair<AssetPanel, AssetPanel> split_panel(const AssetPanel& panel, const Date& train_end,
                                              const Date& test_start);

struct Regime {
  std::size_t start_day = 0;
  double drift_multiplier = 1.0;
  double volatility_multiplier = 1.0;
};

/// Geometric Brownian motion with piecewise-constant regime multipliers.
/// `n_days` is the number of daily increments; the panel has n_days + 1 rows.
struct SyntheticSpec {
  std::size_t n_assets = 2;
  std::size_t n_days = 252;
  std::vector<double> drift;       // per asset, daily log drift
  std::vector<double> volatility;  // per asset, daily log volatility
  std::vector<Regime> regimes;     // sorted by start_day, each active until the next
  std::uint64_t seed = 0;
  std::vector<std::string> ids;           // optional, defaults to A0, A1, ...
  std::vector<AssetClass> classes;        // optional, defaults to equity
  Date start_date{std::chrono::year{2010}, std::chrono::January, std::chrono::day{4}};

  void validate() const;
};

AssetPanel generate_synthetic(const SyntheticSpec& spec);

}  // namespace rcfolio::data
