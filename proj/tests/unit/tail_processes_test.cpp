#include <cmath>

#include <gtest/gtest.h>

#include "scedex/error.hpp"
#include "scedex/scedasis.hpp"
#include "scedex/tail_processes.hpp"
#include "test_util.hpp"

namespace scedex {
namespace {

const PanelSample kSmall = PanelSample::from_rows({{1, 2}, {4, 3}, {5, 6}});

TEST(Pool, SortsAllCellsWithProvenance) {
  const auto p = pool(kSmall);
  EXPECT_EQ(p.sorted_values, (std::vector<double>{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(p.provenance[2].row, 1u);
  EXPECT_EQ(p.provenance[2].station, 1u);
}

TEST(Pool, MissingCellsAreLeftOut) {
  const auto p = pool(PanelSample::from_rows({{1, 2}, {4, NAN}, {5, 6}}));
  EXPECT_EQ(p.n_effective(), 5u);
}

TEST(Pool, TiesKeepRowStationOrder) {
  const auto p = pool(PanelSample::from_rows({{7, 7}, {7, 7}}));
  ASSERT_EQ(p.n_effective(), 4u);
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_EQ(p.provenance[r].row, r / 2);
    EXPECT_EQ(p.provenance[r].station, r % 2);
  }
}

TEST(Pool, EmptyPanelRaises) {
  EXPECT_THROW(pool(PanelSample::from_rows({{NAN, NAN}})), EmptyPoolError);
}

TEST(GlobalThreshold, OrderStatisticDefinition) {
  const auto p = pool(kSmall);
  EXPECT_DOUBLE_EQ(global_threshold(p, IntermediateK{2}), 4.0);
  EXPECT_DOUBLE_EQ(global_threshold(p, IntermediateK{5}), 1.0);
  EXPECT_THROW(global_threshold(p, IntermediateK{6}), RangeError);
  EXPECT_THROW(global_threshold(p, IntermediateK{0}), RangeError);
}

TEST(GlobalThreshold, TiesReduceStrictExceedances) {
  const auto p = pool(PanelSample::from_rows({{1}, {1}, {1}, {2}}));
  const double u = global_threshold(p, IntermediateK{1});
  EXPECT_DOUBLE_EQ(u, 1.0);
  EXPECT_EQ(p.count_above(u), 1u);
  EXPECT_EQ(p.count_equal(u), 3u);
}

TEST(GlobalThreshold, ExactlyKExceedancesWithoutTies) {
  const auto panel = testing::lcg_panel(300, 3, 7);
  const auto p = pool(panel);
  for (std::size_t k : {1u, 10u, 100u, 899u}) {
    EXPECT_EQ(p.count_above(global_threshold(p, IntermediateK{k})), k);
  }
}

TEST(TailEmpiricalProcess, HandExample) {
  const std::vector<double> s{1.0}, t{0.0, 1.0};
  const auto v = tail_empirical_process(kSmall, IntermediateK{2}, 0, s, t);
  EXPECT_DOUBLE_EQ(v[0][0], 0.0);
  EXPECT_DOUBLE_EQ(v[0][1], 0.5);
}

TEST(TailEmpiricalProcess, EqualsScedasisAtOne) {
  const auto panel = testing::lcg_panel(400, 4, 3);
  const std::vector<double> s{1.0}, t{0.25, 0.5, 1.0};
  for (std::size_t j = 0; j < 4; ++j) {
    const auto v = tail_empirical_process(panel, IntermediateK{60}, j, s, t);
    const auto c = scedasis_curve(panel, IntermediateK{60}, j);
    EXPECT_DOUBLE_EQ(v[0][2], c.c1);
    EXPECT_DOUBLE_EQ(v[0][0], c(0.25));
  }
}

TEST(TailEmpiricalProcess, MonotoneInSAndT) {
  const auto panel = testing::lcg_panel(500, 3, 11);
  const std::vector<double> s{0.1, 0.3, 0.5, 1.0, 1.7, 2.0}, t{0.0, 0.1, 0.33, 0.5, 0.9, 1.0};
  for (std::size_t j = 0; j < 3; ++j) {
    const auto v = tail_empirical_process(panel, IntermediateK{50}, j, s, t);
    for (std::size_t a = 0; a < s.size(); ++a) {
      for (std::size_t b = 0; b < t.size(); ++b) {
        if (a > 0) EXPECT_LE(v[a - 1][b], v[a][b]);
        if (b > 0) EXPECT_LE(v[a][b - 1], v[a][b]);
      }
    }
  }
}

TEST(TailQuantileProcess, HandExampleAndSelfCentring) {
  const auto p = pool(kSmall);
  const std::vector<double> s{0.5, 1.0};
  const auto q = tail_quantile_process(p, IntermediateK{2}, s);
  EXPECT_DOUBLE_EQ(q[0].second, 1.0);
  EXPECT_DOUBLE_EQ(q[1].second, 0.0);
}

TEST(TailQuantileProcess, NonIncreasingInS) {
  const auto p = pool(testing::lcg_panel(200, 2, 5));
  std::vector<double> s;
  for (double x = 1.0 / 80.0; x < 3.0; x += 0.05) s.push_back(x);
  const auto q = tail_quantile_process(p, IntermediateK{40}, s);
  for (std::size_t i = 1; i < q.size(); ++i) EXPECT_GE(q[i - 1].second, q[i].second);
}

TEST(TailQuantileProcess, GridOutsideRangeRaises) {
  const auto p = pool(kSmall);
  const std::vector<double> tiny{0.2}, huge{3.0};
  EXPECT_THROW(tail_quantile_process(p, IntermediateK{2}, tiny), RangeError);
  EXPECT_THROW(tail_quantile_process(p, IntermediateK{2}, huge), RangeError);
}

}  // namespace
}  // namespace scedex
