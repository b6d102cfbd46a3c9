#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "scedex/error.hpp"
#include "scedex/scedasis.hpp"
#include "test_util.hpp"

namespace scedex {
namespace {

const PanelSample kSmall = PanelSample::from_rows({{1, 2}, {4, 3}, {5, 6}});

TEST(ScedasisCurve, HandExample) {
  const auto set = scedasis_all(kSmall, IntermediateK{2});
  ASSERT_EQ(set.curves.size(), 2u);
  EXPECT_DOUBLE_EQ(set.threshold, 4.0);
  EXPECT_DOUBLE_EQ(set.curves[0].c1, 0.5);
  EXPECT_DOUBLE_EQ(set.curves[1].c1, 0.5);
  EXPECT_EQ(set.curves[0].jump_rows, (std::vector<std::size_t>{3}));
  EXPECT_DOUBLE_EQ(set.curves[0](0.0), 0.0);
  EXPECT_DOUBLE_EQ(set.curves[0](2.0 / 3.0), 0.0);
  EXPECT_DOUBLE_EQ(set.curves[0](1.0), 0.5);
}

TEST(ScedasisCurve, FlatWhenNothingExceeds) {
  const auto panel = PanelSample::from_rows({{1, 10}, {2, 11}, {3, 12}});
  const auto c = scedasis_curve(panel, IntermediateK{3}, 0);
  EXPECT_EQ(c.exceedances(), 0u);
  EXPECT_DOUBLE_EQ(c(1.0), 0.0);
}

TEST(ScedasisCurve, StationOutOfRange) {
  EXPECT_THROW(scedasis_curve(kSmall, IntermediateK{2}, 2), RangeError);
}

TEST(ScedasisCurve, MissingCellsNeverExceed) {
  const auto panel = PanelSample::from_rows({{1, 2}, {NAN, 3}, {5, 6}});
  const auto set = scedasis_all(panel, IntermediateK{2});
  EXPECT_DOUBLE_EQ(set.threshold, 3.0);
  EXPECT_DOUBLE_EQ(set.curves[0].c1, 0.5);
}

TEST(ScedasisAll, SumsToOneWithoutTies) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto panel = testing::lcg_panel(250, 5, seed);
    for (std::size_t k : {1u, 17u, 100u, 600u}) {
      const auto c1 = scedasis_all(panel, IntermediateK{k}).c1_values();
      EXPECT_NEAR(std::accumulate(c1.begin(), c1.end(), 0.0), 1.0, 1e-12);
    }
  }
}

TEST(ScedasisAll, SingleStationGetsEverything) {
  const auto panel = testing::lcg_panel(100, 1, 4);
  EXPECT_DOUBLE_EQ(scedasis_all(panel, IntermediateK{20}).curves[0].c1, 1.0);
}

TEST(ScedasisAll, RenormalizationRestoresUnitSumWithTies) {
  const auto panel = PanelSample::from_rows({{1, 1}, {1, 2}, {3, 1}, {1, 4}});
  const auto raw = scedasis_all(panel, IntermediateK{3});
  EXPECT_EQ(raw.threshold_ties, 5u);
  EXPECT_DOUBLE_EQ(raw.curves[0].c1 + raw.curves[1].c1, 1.0);
  const auto loose = scedasis_all(panel, IntermediateK{4});
  EXPECT_LT(loose.curves[0].c1 + loose.curves[1].c1, 1.0);
  const auto fixed = scedasis_all(panel, IntermediateK{4}, {.renormalize_ties = true});
  EXPECT_DOUBLE_EQ(fixed.curves[0].c1 + fixed.curves[1].c1, 1.0);
  EXPECT_TRUE(fixed.renormalized);
}

TEST(ScedasisCurve, NonDecreasingWithJumpsOfOneOverK) {
  const auto panel = testing::lcg_panel(300, 3, 9);
  const IntermediateK k{45};
  for (std::size_t j = 0; j < 3; ++j) {
    const auto c = scedasis_curve(panel, k, j);
    EXPECT_DOUBLE_EQ(c.jump_size, 1.0 / 45.0);
    double prev = 0.0;
    for (std::size_t i = 0; i <= 300; ++i) {
      const double v = c(static_cast<double>(i) / 300.0);
      EXPECT_GE(v, prev);
      EXPECT_LE(v - prev, 1.0 / 45.0 + 1e-15);
      prev = v;
    }
    EXPECT_DOUBLE_EQ(prev, c.c1);
  }
}

TEST(ScedasisAll, PermutingStationsPermutesCurves) {
  const auto panel = testing::lcg_panel(200, 4, 21);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  const auto permuted = panel.select_stations(perm);
  const auto a = scedasis_all(panel, IntermediateK{30});
  const auto b = scedasis_all(permuted, IntermediateK{30});
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(b.curves[j].jump_rows, a.curves[perm[j]].jump_rows);
    EXPECT_DOUBLE_EQ(b.curves[j].c1, a.curves[perm[j]].c1);
  }
}

}  // namespace
}  // namespace scedex
