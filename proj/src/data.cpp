#include "rcfolio/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "rcfolio/error.hpp"
#include "rcfolio/rng.hpp"

namespace rcfolio::data {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, path);
  return in;
}

}  // namespace

std::string_view to_string(AssetClass cls) {
  switch (cls) {
    case AssetClass::Equity: return "equity";
    case AssetClass::BondIntermediate: return "bond_intermediate";
    case AssetClass::BondLong: return "bond_long";
    case AssetClass::Commodity: return "commodity";
    case AssetClass::Gold: return "gold";
  }
  return "equity";
}

std::optional<AssetClass> parse_asset_class(std::string_view text) {
  for (AssetClass cls : kAllAssetClasses) {
    if (to_string(cls) == text) return cls;
  }
  return std::nullopt;
}

AssetPanel::AssetPanel(std::vector<Date> dates, std::vector<Asset> assets, Matrix close,
                       std::optional<Matrix> volume)
    : dates_(std::move(dates)), assets_(std::move(assets)), close_(std::move(close)) {
  const auto T = static_cast<Eigen::Index>(dates_.size());
  const auto N = static_cast<Eigen::Index>(assets_.size());
  if (N == 0) throw Error(Errc::InvalidSpec, "panel has no assets");
  if (close_.rows() != T || close_.cols() != N) {
    throw Error(Errc::InvalidSpec, fmt::format("close matrix is {}x{}, expected {}x{}",
                                               close_.rows(), close_.cols(), T, N));
  }
  for (std::size_t k = 1; k < dates_.size(); ++k) {
    if (!(dates_[k - 1] < dates_[k])) {
      throw Error(Errc::InvalidSpec,
                  fmt::format("dates not strictly increasing at {}", format_date(dates_[k])));
    }
  }
  std::set<std::string_view> seen;
  for (const auto& a : assets_) {
    if (!seen.insert(a.id).second) throw Error(Errc::InvalidSpec, "duplicate asset " + a.id);
  }
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index i = 0; i < N; ++i) {
      const double c = close_(t, i);
      if (!std::isfinite(c) || c <= 0.0) {
        throw Error(Errc::NonPositivePrice,
                    fmt::format("{} on {}: {}", assets_[i].id, format_date(dates_[t]), c));
      }
    }
  }
  if (volume) {
    if (volume->rows() != T || volume->cols() != N) {
      throw Error(Errc::InvalidSpec, "volume matrix shape does not match close");
    }
    for (Eigen::Index t = 0; t < T; ++t) {
      for (Eigen::Index i = 0; i < N; ++i) {
        const double v = (*volume)(t, i);
        if (!std::isnan(v) && !(v >= 0.0 && std::isfinite(v))) {
          throw Error(Errc::InvalidSpec,
                      fmt::format("invalid volume for {} on {}", assets_[i].id,
                                  format_date(dates_[t])));
        }
      }
    }
    volume_ = std::move(*volume);
  } else {
    volume_ = Matrix::Constant(T, N, kNaN);
  }
}

std::optional<std::size_t> AssetPanel::date_index(const Date& date) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), date);
  if (it == dates_.end() || *it != date) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

std::optional<std::size_t> AssetPanel::asset_index(std::string_view id) const {
  for (std::size_t i = 0; i < assets_.size(); ++i) {
    if (assets_[i].id == id) return i;
  }
  return std::nullopt;
}

AssetPanel AssetPanel::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > dates_.size()) {
    throw Error(Errc::InvalidRange, fmt::format("slice [{}, {}) of {} rows", begin, end,
                                                dates_.size()));
  }
  const auto b = static_cast<Eigen::Index>(begin);
  const auto n = static_cast<Eigen::Index>(end - begin);
  return AssetPanel(std::vector<Date>(dates_.begin() + b, dates_.begin() + b + n), assets_,
                    close_.middleRows(b, n), Matrix(volume_.middleRows(b, n)));
}

bool AssetPanel::operator==(const AssetPanel& other) const {
  if (dates_ != other.dates_ || assets_ != other.assets_) return false;
  if (close_ != other.close_) return false;
  // NaN-aware volume comparison
  for (Eigen::Index t = 0; t < volume_.rows(); ++t) {
    for (Eigen::Index i = 0; i < volume_.cols(); ++i) {
      const double a = volume_(t, i);
      const double b = other.volume_(t, i);
      if (std::isnan(a) != std::isnan(b)) return false;
      if (!std::isnan(a) && a != b) return false;
    }
  }
  return true;
}

ClassMap load_class_map(const std::string& path) {
  auto in = open_input(path);
  ClassMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (line_no == 1) {
      if (text != "asset,class") {
        throw Error(Errc::ParseError, fmt::format("{}:1: expected header 'asset,class'", path));
      }
      continue;
    }
    if (text.empty()) continue;
    const auto fields = split(text, ',');
    if (fields.size() != 2) {
      throw Error(Errc::ParseError, fmt::format("{}:{}: expected 2 fields", path, line_no));
    }
    const auto cls = parse_asset_class(trim(fields[1]));
    if (!cls) {
      throw Error(Errc::UnknownAssetClass,
                  fmt::format("{}:{}: unknown class '{}'", path, line_no, trim(fields[1])));
    }
    out.emplace(std::string(trim(fields[0])), *cls);
  }
  if (line_no == 0) throw Error(Errc::ParseError, path + ": empty file");
  return out;
}

void write_class_map(const AssetPanel& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, path);
  out << "asset,class\n";
  for (const auto& a : panel.assets()) out << a.id << ',' << to_string(a.asset_class) << '\n';
}

AssetPanel load_panel_csv(const std::string& path, const ClassMap& class_map) {
  auto in = open_input(path);

  struct Cell {
    double close;
    double volume;
  };
  std::vector<std::string> ids;
  std::map<std::string, std::size_t, std::less<>> id_index;
  std::map<Date, std::map<std::size_t, Cell>> rows;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (line_no == 1) {
      if (text != "date,asset,close,volume") {
        throw Error(Errc::ParseError,
                    fmt::format("{}:1: expected header 'date,asset,close,volume'", path));
      }
      continue;
    }
    if (text.empty()) continue;
    const auto fields = split(text, ',');
    if (fields.size() != 4) {
      throw Error(Errc::ParseError,
                  fmt::format("{}:{}: expected 4 fields, got {}", path, line_no, fields.size()));
    }
    Date date;
    try {
      date = parse_date(trim(fields[0]));
    } catch (const Error& e) {
      throw Error(Errc::ParseError, fmt::format("{}:{}: {}", path, line_no, e.what()));
    }
    const auto asset = trim(fields[1]);
    if (asset.empty()) throw Error(Errc::ParseError, fmt::format("{}:{}: empty asset", path, line_no));
    const auto close = parse_double(trim(fields[2]));
    if (!close) {
      throw Error(Errc::ParseError, fmt::format("{}:{}: bad close '{}'", path, line_no, fields[2]));
    }
    if (!std::isfinite(*close) || *close <= 0.0) {
      throw Error(Errc::NonPositivePrice,
                  fmt::format("{}:{}: {} on {}: {}", path, line_no, asset, format_date(date), *close));
    }
    double volume = kNaN;
    if (const auto vtext = trim(fields[3]); !vtext.empty()) {
      const auto v = parse_double(vtext);
      if (!v || !std::isfinite(*v) || *v < 0.0) {
        throw Error(Errc::ParseError, fmt::format("{}:{}: bad volume '{}'", path, line_no, vtext));
      }
      volume = *v;
    }
    auto it = id_index.find(asset);
    if (it == id_index.end()) {
      it = id_index.emplace(std::string(asset), ids.size()).first;
      ids.emplace_back(asset);
    }
    if (!rows[date].emplace(it->second, Cell{*close, volume}).second) {
      throw Error(Errc::ParseError, fmt::format("{}:{}: duplicate row for {} on {}", path, line_no,
                                                asset, format_date(date)));
    }
  }
  if (line_no == 0) throw Error(Errc::ParseError, path + ": empty file");
  if (rows.empty()) throw Error(Errc::ParseError, path + ": no data rows");

  std::vector<Asset> assets;
  for (const auto& id : ids) {
    auto cls = class_map.find(id);
    if (cls == class_map.end()) throw Error(Errc::UnknownAssetClass, id);
    assets.push_back(Asset{id, cls->second});
  }

  const auto T = static_cast<Eigen::Index>(rows.size());
  const auto N = static_cast<Eigen::Index>(ids.size());
  Matrix close(T, N);
  Matrix volume(T, N);
  std::vector<Date> dates;
  dates.reserve(rows.size());
  Eigen::Index t = 0;
  for (const auto& [date, cells] : rows) {
    for (Eigen::Index i = 0; i < N; ++i) {
      auto cell = cells.find(static_cast<std::size_t>(i));
      if (cell == cells.end()) {
        throw Error(Errc::MisalignedDates,
                    fmt::format("{} has no row on {}", ids[i], format_date(date)));
      }
      close(t, i) = cell->second.close;
      volume(t, i) = cell->second.volume;
    }
    dates.push_back(date);
    ++t;
  }
  return AssetPanel(std::move(dates), std::move(assets), std::move(close), std::move(volume));
}

void write_panel_csv(const AssetPanel& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, path);
  out << "date,asset,close,volume\n";
  for (std::size_t t = 0; t < panel.num_days(); ++t) {
    const auto date = format_date(panel.dates()[t]);
    for (std::size_t i = 0; i < panel.num_assets(); ++i) {
      const auto ti = static_cast<Eigen::Index>(t);
      const auto ii = static_cast<Eigen::Index>(i);
      const double v = panel.volume()(ti, ii);
      out << fmt::format("{},{},{},{}\n", date, panel.assets()[i].id, panel.close()(ti, ii),
                         std::isnan(v) ? std::string() : fmt::format("{}", v));
    }
  }
}

ReturnsMatrix compute_returns(const AssetPanel& panel) {
  if (panel.num_days() < 2) {
    throw Error(Errc::PanelTooShort, fmt::format("{} rows, need at least 2", panel.num_days()));
  }
  const Matrix& close = panel.close();
  const auto T = close.rows();
  ReturnsMatrix out;
  out.dates.assign(panel.dates().begin() + 1, panel.dates().end());
  out.values.resize(T - 1, close.cols());
  for (Eigen::Index k = 0; k + 1 < T; ++k) {
    for (Eigen::Index i = 0; i < close.cols(); ++i) {
      out.values(k, i) = close(k + 1, i) / close(k, i) - 1.0;
    }
  }
  return out;
}

FeatureWindow window_at(const AssetPanel& panel, std::size_t t, const WindowSpec& spec) {
  if (spec.length == 0) throw Error(Errc::InvalidSpec, "window length must be positive");
  if (t < spec.length || t >= panel.num_days()) {
    throw Error(Errc::RangeOutOfBounds,
                fmt::format("decision day {} outside [{}, {})", t, spec.length, panel.num_days()));
  }
  const Matrix& close = panel.close();
  const Matrix& volume = panel.volume();
  const auto L = static_cast<Eigen::Index>(spec.length);
  const auto N = close.cols();
  const auto F = static_cast<Eigen::Index>(spec.features_per_asset());
  const auto first = static_cast<Eigen::Index>(t) - L;

  FeatureWindow w;
  w.t = t;
  w.features_per_asset = spec.features_per_asset();
  w.tensor = Vector::Zero(L * N * F);
  for (Eigen::Index d = 0; d < L; ++d) {
    const Eigen::Index k = first + d;
    for (Eigen::Index i = 0; i < N; ++i) {
      // the first panel row has no prior close; its return is taken as 0
      w.tensor[(d * N + i) * F] = k == 0 ? 0.0 : close(k, i) / close(k - 1, i) - 1.0;
    }
  }
  if (spec.use_volume) {
    for (Eigen::Index i = 0; i < N; ++i) {
      const auto vols = volume.col(i).segment(first, L);
      if (vols.hasNaN()) continue;
      const double mean = vols.mean();
      const double var = (vols.array() - mean).square().mean();
      if (!(var > 0.0)) continue;
      const double sd = std::sqrt(var);
      for (Eigen::Index d = 0; d < L; ++d) {
        w.tensor[(d * N + i) * F + 1] = (vols[d] - mean) / sd;
      }
    }
  }
  return w;
}

std::vector<FeatureWindow> build_windows(const AssetPanel& panel, const WindowSpec& spec) {
  if (spec.length == 0) throw Error(Errc::InvalidSpec, "window length must be positive");
  if (panel.num_days() < spec.length + 2) {
    throw Error(Errc::PanelTooShort, fmt::format("{} rows, window length {} needs at least {}",
                                                 panel.num_days(), spec.length, spec.length + 2));
  }
  std::vector<FeatureWindow> out;
  out.reserve(panel.num_days() - 1 - spec.length);
  for (std::size_t t = spec.length; t + 2 <= panel.num_days(); ++t) {
    out.push_back(window_at(panel, t, spec));
  }
  return out;
}

std::pair<AssetPanel, AssetPanel> split_panel(const AssetPanel& panel, const Date& train_end,
                                              const Date& test_start) {
  const auto& dates = panel.dates();
  if (!(train_end < test_start)) {
    throw Error(Errc::InvalidRange, fmt::format("train end {} is not before test start {}",
                                                format_date(train_end), format_date(test_start)));
  }
  if (train_end < dates.front() || dates.back() < test_start) {
    throw Error(Errc::InvalidRange, "split dates outside the panel range");
  }
  const auto train_rows = static_cast<std::size_t>(
      std::upper_bound(dates.begin(), dates.end(), train_end) - dates.begin());
  const auto test_begin = static_cast<std::size_t>(
      std::lower_bound(dates.begin(), dates.end(), test_start) - dates.begin());
  if (train_rows == 0 || test_begin >= dates.size()) {
    throw Error(Errc::InvalidRange, "split leaves an empty side");
  }
  return {panel.slice(0, train_rows), panel.slice(test_begin, dates.size())};
}

void SyntheticSpec::validate() const {
  if (n_assets == 0) throw Error(Errc::InvalidSpec, "n_assets must be positive");
  if (n_days < 2) throw Error(Errc::InvalidSpec, "n_days must be at least 2");
  if (drift.size() != n_assets || volatility.size() != n_assets) {
    throw Error(Errc::InvalidSpec, "drift and volatility need one entry per asset");
  }
  for (std::size_t i = 0; i < n_assets; ++i) {
    if (!std::isfinite(drift[i])) throw Error(Errc::InvalidSpec, "non-finite drift");
    if (!(volatility[i] >= 0.0) || !std::isfinite(volatility[i])) {
      throw Error(Errc::InvalidSpec, "volatility must be finite and non-negative");
    }
  }
  for (std::size_t r = 0; r < regimes.size(); ++r) {
    const auto& g = regimes[r];
    if (!std::isfinite(g.drift_multiplier) || !std::isfinite(g.volatility_multiplier) ||
        g.volatility_multiplier < 0.0) {
      throw Error(Errc::InvalidSpec, "invalid regime multipliers");
    }
    if (r > 0 && g.start_day <= regimes[r - 1].start_day) {
      throw Error(Errc::InvalidSpec, "regimes must be sorted and non-overlapping");
    }
  }
  if (!ids.empty() && ids.size() != n_assets) throw Error(Errc::InvalidSpec, "ids size mismatch");
  if (!classes.empty() && classes.size() != n_assets) {
    throw Error(Errc::InvalidSpec, "classes size mismatch");
  }
  if (!start_date.ok()) throw Error(Errc::InvalidSpec, "invalid start date");
}

AssetPanel generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  auto rng = make_stream(spec.seed, "data");
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto N = static_cast<Eigen::Index>(spec.n_assets);
  const auto T = static_cast<Eigen::Index>(spec.n_days + 1);
  Matrix close(T, N);
  std::vector<double> log_level(spec.n_assets, 0.0);
  close.row(0).setConstant(100.0);

  std::size_t regime = 0;
  double drift_mult = 1.0;
  double vol_mult = 1.0;
  for (Eigen::Index t = 1; t < T; ++t) {
    while (regime < spec.regimes.size() &&
           spec.regimes[regime].start_day <= static_cast<std::size_t>(t)) {
      drift_mult = spec.regimes[regime].drift_multiplier;
      vol_mult = spec.regimes[regime].volatility_multiplier;
      ++regime;
    }
    for (Eigen::Index i = 0; i < N; ++i) {
      const double z = normal(rng);
      log_level[i] += spec.drift[i] * drift_mult + spec.volatility[i] * vol_mult * z;
      close(t, i) = 100.0 * std::exp(log_level[i]);
    }
  }

  std::vector<Asset> assets;
  for (std::size_t i = 0; i < spec.n_assets; ++i) {
    assets.push_back(Asset{spec.ids.empty() ? fmt::format("A{}", i) : spec.ids[i],
                           spec.classes.empty() ? AssetClass::Equity : spec.classes[i]});
  }
  return AssetPanel(business_days(spec.start_date, spec.n_days + 1), std::move(assets),
                    std::move(close));
}

}  // namespace rcfolio::data
