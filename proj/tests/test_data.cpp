#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "rcfolio/data.hpp"
#include "test_util.hpp"

using namespace rcfolio;
using namespace rcfolio::test;

namespace {

const data::ClassMap kTwoEquities = {{"A", data::AssetClass::Equity},
                                     {"B", data::AssetClass::Equity}};

std::string write_csv(const std::string& body) {
  auto path = scratch_dir() / "panel.csv";
  write_text(path, "date,asset,close,volume\n" + body);
  return path.string();
}

data::SyntheticSpec flat_spec(double drift, double vol, std::size_t days) {
  data::SyntheticSpec s;
  s.n_assets = 2;
  s.n_days = days;
  s.drift = {drift, drift};
  s.volatility = {vol, vol};
  return s;
}

}  // namespace

TEST(LoadPanelCsv, ThreeRowsTwoAssets) {
  auto path = write_csv(
      "2020-01-02,A,100,10\n2020-01-02,B,50,\n"
      "2020-01-03,A,101,11\n2020-01-03,B,51,\n"
      "2020-01-06,A,102,12\n2020-01-06,B,52,\n");
  auto panel = data::load_panel_csv(path, kTwoEquities);
  EXPECT_EQ(panel.num_days(), 3u);
  EXPECT_EQ(panel.num_assets(), 2u);
  EXPECT_EQ(panel.close()(2, 1), 52.0);
  EXPECT_EQ(panel.volume()(1, 0), 11.0);
  EXPECT_TRUE(std::isnan(panel.volume()(0, 1)));
}

TEST(LoadPanelCsv, ZeroPriceRejected) {
  auto path = write_csv("2020-01-02,A,100,\n2020-01-02,B,50,\n2020-01-03,A,0,\n2020-01-03,B,51,\n");
  EXPECT_ERRC(data::load_panel_csv(path, kTwoEquities), NonPositivePrice);
}

TEST(LoadPanelCsv, MissingRowRejected) {
  auto path = write_csv(
      "2020-01-02,A,100,\n2020-01-02,B,50,\n2020-01-03,A,101,\n"
      "2020-01-06,A,102,\n2020-01-06,B,52,\n");
  EXPECT_ERRC(data::load_panel_csv(path, kTwoEquities), MisalignedDates);
}

TEST(LoadPanelCsv, Errors) {
  EXPECT_ERRC(data::load_panel_csv("/nonexistent/panel.csv", kTwoEquities), FileNotFound);
  auto bad_header = scratch_dir() / "bad.csv";
  write_text(bad_header, "date,asset,price\n");
  EXPECT_ERRC(data::load_panel_csv(bad_header.string(), kTwoEquities), ParseError);
  auto path = write_csv("2020-01-02,C,100,\n");
  EXPECT_ERRC(data::load_panel_csv(path, kTwoEquities), UnknownAssetClass);
  auto bad_date = write_csv("2020-13-02,A,100,\n");
  EXPECT_ERRC(data::load_panel_csv(bad_date, kTwoEquities), ParseError);
}

TEST(LoadPanelCsv, RoundTrip) {
  auto panel = random_panel(3, 30, 7);
  auto dir = scratch_dir();
  data::write_panel_csv(panel, (dir / "p.csv").string());
  data::write_class_map(panel, (dir / "c.csv").string());
  auto back = data::load_panel_csv((dir / "p.csv").string(),
                                   data::load_class_map((dir / "c.csv").string()));
  EXPECT_EQ(back.dates(), panel.dates());
  EXPECT_EQ(back.close(), panel.close());
  data::write_panel_csv(back, (dir / "q.csv").string());
  EXPECT_EQ(read_text(dir / "p.csv"), read_text(dir / "q.csv"));
}

TEST(ClassMap, ParsesAllClasses) {
  auto path = scratch_dir() / "classes.csv";
  write_text(path,
             "asset,class\nE,equity\nI,bond_intermediate\nL,bond_long\nC,commodity\nG,gold\n");
  auto map = data::load_class_map(path.string());
  ASSERT_EQ(map.size(), 5u);
  EXPECT_EQ(map.at("I"), data::AssetClass::BondIntermediate);
  EXPECT_EQ(map.at("G"), data::AssetClass::Gold);
  write_text(path, "asset,class\nX,crypto\n");
  EXPECT_ERRC(data::load_class_map(path.string()), UnknownAssetClass);
}

TEST(Synthetic, ZeroNoiseIsFlatAtHundred) {
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    auto s = flat_spec(0.0, 0.0, 50);
    s.seed = seed;
    auto panel = data::generate_synthetic(s);
    EXPECT_EQ(panel.num_days(), 51u);
    EXPECT_TRUE((panel.close().array() == 100.0).all());
  }
}

TEST(Synthetic, Deterministic) {
  auto s = flat_spec(0.0003, 0.01, 200);
  s.seed = 42;
  EXPECT_EQ(data::generate_synthetic(s), data::generate_synthetic(s));
  auto other = s;
  other.seed = 43;
  EXPECT_NE(data::generate_synthetic(s).close(), data::generate_synthetic(other).close());
}

TEST(Synthetic, ZeroNoiseDriftCompounds) {
  auto panel = data::generate_synthetic(flat_spec(0.001, 0.0, 252));
  const double expected = 100.0 * std::exp(0.252);
  EXPECT_NEAR(panel.close()(252, 0), expected, 1e-9 * expected);
}

TEST(Synthetic, RegimeMultipliesDriftFromStartDay) {
  auto s = flat_spec(0.001, 0.0, 20);
  s.regimes = {{10, -2.0, 1.0}};
  auto panel = data::generate_synthetic(s);
  const auto& c = panel.close();
  // increment t produces row t
  EXPECT_NEAR(std::log(c(9, 0) / c(8, 0)), 0.001, 1e-12);
  EXPECT_NEAR(std::log(c(10, 0) / c(9, 0)), -0.002, 1e-12);
  EXPECT_NEAR(c(20, 0), 100.0 * std::exp(9 * 0.001 - 11 * 0.002), 1e-9);
}

TEST(Synthetic, InvalidSpecs) {
  auto s = flat_spec(0.0, 0.01, 1);
  EXPECT_ERRC(data::generate_synthetic(s), InvalidSpec);
  s = flat_spec(0.0, -0.01, 10);
  EXPECT_ERRC(data::generate_synthetic(s), InvalidSpec);
  s = flat_spec(0.0, 0.01, 10);
  s.regimes = {{5, 1, 1}, {3, 1, 1}};
  EXPECT_ERRC(data::generate_synthetic(s), InvalidSpec);
  s = flat_spec(0.0, 0.01, 10);
  s.drift = {0.0};
  EXPECT_ERRC(data::generate_synthetic(s), InvalidSpec);
}

TEST(Returns, HandValues) {
  Matrix close(3, 1);
  close << 100, 110, 99;
  auto r = data::compute_returns(make_panel(close));
  ASSERT_EQ(r.values.rows(), 2);
  EXPECT_NEAR(r.values(0, 0), 0.10, 1e-15);
  EXPECT_NEAR(r.values(1, 0), -0.10, 1e-15);
  EXPECT_EQ(r.dates.size(), 2u);
}

TEST(Returns, ConstantPricesGiveZeros) {
  Matrix close = Matrix::Constant(6, 3, 42.0);
  auto r = data::compute_returns(make_panel(close));
  EXPECT_TRUE((r.values.array() == 0.0).all());
}

TEST(Returns, ExactFormulaOnRandomPanel) {
  auto panel = random_panel(4, 100, 3);
  auto r = data::compute_returns(panel);
  const auto& c = panel.close();
  for (Eigen::Index t = 0; t + 1 < c.rows(); ++t)
    for (Eigen::Index i = 0; i < c.cols(); ++i) EXPECT_EQ(r.values(t, i), c(t + 1, i) / c(t, i) - 1.0);
}

TEST(Returns, TooShort) {
  Matrix close = Matrix::Constant(1, 2, 1.0);
  EXPECT_ERRC(data::compute_returns(make_panel(close)), PanelTooShort);
}

TEST(Windows, CountFromIndexArithmetic) {
  Matrix close = Matrix::Constant(10, 2, 50.0);
  auto windows = data::build_windows(make_panel(close), {5, false});
  ASSERT_EQ(windows.size(), 4u);
  EXPECT_EQ(windows.front().t, 5u);
  EXPECT_EQ(windows.back().t, 8u);
  for (const auto& w : windows) EXPECT_TRUE((w.tensor.array() == 0.0).all());
}

TEST(Windows, TooShortPanel) {
  Matrix close = Matrix::Constant(6, 2, 50.0);
  EXPECT_ERRC(data::build_windows(make_panel(close), {5, false}), PanelTooShort);
}

// Perturbing close[t..] must leave the window at t bit-identical.
TEST(Windows, NoLookAheadProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto panel = random_panel(3, 40, rng());
    const bool use_volume = trial % 2 == 0;
    Matrix volume = Matrix::Constant(panel.num_days(), 3, 1000.0);
    for (Eigen::Index t = 0; t < volume.rows(); ++t) volume(t, t % 3) += static_cast<double>(t);
    panel = data::AssetPanel(panel.dates(), panel.assets(), panel.close(), volume);
    data::WindowSpec spec{1 + rng() % 8, use_volume};
    const std::size_t t = spec.length + rng() % (panel.num_days() - spec.length - 1);
    auto before = data::window_at(panel, t, spec);
    Matrix close = panel.close();
    Matrix vol2 = volume;
    for (Eigen::Index k = static_cast<Eigen::Index>(t); k < close.rows(); ++k) {
      close.row(k) *= 1.5 + 0.01 * static_cast<double>(k);
      vol2.row(k) *= 3.0;
    }
    data::AssetPanel perturbed(panel.dates(), panel.assets(), close, vol2);
    auto after = data::window_at(perturbed, t, spec);
    EXPECT_EQ(before.tensor, after.tensor) << "t=" << t;
  }
}

TEST(Windows, VolumeFeaturesAreZScores) {
  Matrix close = Matrix::Constant(8, 1, 10.0);
  Matrix volume(8, 1);
  volume << 1, 2, 3, 4, 5, 6, 7, 8;
  data::AssetPanel panel(make_panel(close).dates(), make_panel(close).assets(), close, volume);
  auto w = data::window_at(panel, 4, {4, true});
  ASSERT_EQ(w.tensor.size(), 8);
  EXPECT_EQ(w.features_per_asset, 2u);
  // volumes 1..4: mean 2.5, population sd sqrt(1.25)
  EXPECT_NEAR(w.tensor[1], -1.5 / std::sqrt(1.25), 1e-12);
  EXPECT_NEAR(w.tensor[7], 1.5 / std::sqrt(1.25), 1e-12);
}

TEST(Split, DisjointAtMidpoint) {
  auto panel = random_panel(2, 99, 5);
  const auto& d = panel.dates();
  auto [train, test] = data::split_panel(panel, d[49], d[50]);
  EXPECT_EQ(train.num_days(), 50u);
  EXPECT_EQ(test.num_days(), 50u);
  std::set<Date> seen(train.dates().begin(), train.dates().end());
  for (const auto& date : test.dates()) EXPECT_EQ(seen.count(date), 0u);
}

TEST(Split, EqualBoundariesRejected) {
  auto panel = random_panel(2, 99, 5);
  EXPECT_ERRC(data::split_panel(panel, panel.dates()[40], panel.dates()[40]), InvalidRange);
  EXPECT_ERRC(data::split_panel(panel, panel.dates()[41], panel.dates()[40]), InvalidRange);
}

TEST(Split, GapDaysInNeitherPanel) {
  data::SyntheticSpec s = flat_spec(0.0, 0.01, 200);
  s.start_date = day("2019-01-02");
  auto panel = data::generate_synthetic(s);
  auto [train, test] = data::split_panel(panel, day("2019-06-10"), day("2019-07-18"));
  EXPECT_EQ(train.dates().back(), day("2019-06-10"));
  EXPECT_EQ(test.dates().front(), day("2019-07-18"));
  const std::size_t gap = panel.num_days() - train.num_days() - test.num_days();
  EXPECT_EQ(gap, 27u);  // business days 2019-06-11 .. 2019-07-17
  for (const auto& date : panel.dates()) {
    if (day("2019-06-10") < date && date < day("2019-07-18")) {
      EXPECT_FALSE(train.date_index(date).has_value());
      EXPECT_FALSE(test.date_index(date).has_value());
    }
  }
}

TEST(Dates, BusinessDaysSkipWeekends) {
  auto days = business_days(day("2021-01-01"), 3);  // Friday
  EXPECT_EQ(format_date(days[0]), "2021-01-01");
  EXPECT_EQ(format_date(days[1]), "2021-01-04");
  EXPECT_EQ(format_date(days[2]), "2021-01-05");
  EXPECT_ERRC(parse_date("2021-1-5"), ParseError);
  EXPECT_ERRC(parse_date("2021-02-30"), ParseError);
}
