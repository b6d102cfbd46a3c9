#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "scedex/error.hpp"
#include "scedex/panel.hpp"

namespace scedex {
namespace {

using std::chrono::day;
using std::chrono::month;
using std::chrono::year;

PanelSample parse(const std::string& csv, const PanelSchema& schema = {}) {
  std::istringstream in(csv);
  return read_panel(in, schema);
}

TEST(ReadPanel, OneEmptyCellIsTheOnlyMissingEntry) {
  const auto p = parse("date,A,B\n2001-01-01,1.5,2\n2001-01-02,,3\n2001-01-03,0,4.25\n");
  EXPECT_EQ(p.rows(), 3u);
  EXPECT_EQ(p.stations(), 2u);
  int missing = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) missing += p.missing(i, j) ? 1 : 0;
  }
  EXPECT_EQ(missing, 1);
  EXPECT_TRUE(p.missing(1, 0));
  EXPECT_EQ(p.non_missing_count(), 5u);
  EXPECT_DOUBLE_EQ(p.value(2, 1), 4.25);
}

TEST(ReadPanel, NaTokensAreMissing) {
  const auto p = parse("date,A\n2001-01-01,NA\n2001-01-02,NaN\n2001-01-03,1\n");
  EXPECT_TRUE(p.missing(0, 0));
  EXPECT_TRUE(p.missing(1, 0));
  EXPECT_FALSE(p.missing(2, 0));
}

TEST(ReadPanel, DatesOutOfOrderRaiseOrderingError) {
  EXPECT_THROW(parse("date,A\n2001-01-02,1\n2001-01-01,2\n"), OrderingError);
  EXPECT_THROW(parse("date,A\n2001-01-02,1\n2001-01-02,2\n"), OrderingError);
}

TEST(ReadPanel, NegativeRainfallRaisesDomainError) {
  EXPECT_THROW(parse("date,A\n2001-01-01,-1.2\n"), DomainError);
}

TEST(ReadPanel, MalformedRowsReportTheLine) {
  try {
    parse("date,A,B\n2001-01-01,1,2\n2001-01-02,1\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse("date,A\n2001-13-01,1\n"), ParseError);
  EXPECT_THROW(parse("date,A\n2001-01-01,abc\n"), ParseError);
  EXPECT_THROW(parse("day,A\n2001-01-01,1\n"), ParseError);
}

TEST(ReadPanel, SchemaSelectsColumnsInRequestedOrder) {
  PanelSchema schema;
  schema.station_columns = {"C", "A"};
  const auto p = parse("date,A,B,C\n2001-01-01,1,2,3\n", schema);
  ASSERT_EQ(p.stations(), 2u);
  EXPECT_EQ(p.station_ids()[0], "C");
  EXPECT_DOUBLE_EQ(p.value(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(p.value(0, 1), 1.0);
  schema.station_columns = {"Z"};
  EXPECT_THROW(parse("date,A\n2001-01-01,1\n", schema), ParseError);
}

TEST(ReadPanel, WriteThenReadRoundTrips) {
  const auto p = parse("date,A,B\n2001-01-01,1.5,\n2001-01-05,0.125,7\n");
  std::ostringstream out;
  write_panel(out, p);
  const auto q = parse(out.str());
  ASSERT_EQ(q.rows(), 2u);
  EXPECT_EQ(q.days(), p.days());
  EXPECT_TRUE(q.missing(0, 1));
  EXPECT_DOUBLE_EQ(q.value(1, 0), 0.125);
}

TEST(IsoDate, ParsesAndFormats) {
  const Day d = parse_iso_date("2004-02-29");
  EXPECT_EQ(d, Day{year{2004} / 2 / 29});
  EXPECT_EQ(format_iso_date(d), "2004-02-29");
  EXPECT_THROW(parse_iso_date("2003-02-29"), ParseError);
  EXPECT_THROW(parse_iso_date("2003-2-1"), ParseError);
}

PanelSample daily_year(int y) {
  std::vector<std::vector<double>> rows;
  const Day first{year{y} / 1 / 1};
  const Day last{year{y} / 12 / 31};
  for (Day d = first; d <= last; d += std::chrono::days{1}) rows.push_back({1.0});
  return PanelSample::from_rows(rows, first);
}

TEST(SplitSeason, WinterKeepsNovemberThroughMarch) {
  const auto p = daily_year(2001);
  const auto w = split_season(p, SeasonDefinition::winter());
  // Jan 31 + Feb 28 + Mar 31 + Nov 30 + Dec 31.
  EXPECT_EQ(w.rows(), 151u);
  for (Day d : w.days()) {
    const unsigned mo = static_cast<unsigned>(std::chrono::year_month_day{d}.month());
    EXPECT_TRUE(mo <= 3 || mo >= 11) << mo;
  }
  EXPECT_TRUE(std::is_sorted(w.days().begin(), w.days().end()));
  EXPECT_EQ(w.stations(), 1u);
}

TEST(SplitSeason, AllMonthsIsIdentity) {
  const auto p = daily_year(2002);
  const auto a = split_season(p, SeasonDefinition::all_year());
  EXPECT_EQ(a.days(), p.days());
}

TEST(SplitSeason, EmptyResultRaises) {
  std::vector<std::vector<double>> rows(31, std::vector<double>{1.0});
  const auto january = PanelSample::from_rows(rows, Day{year{2001} / 1 / 1});
  EXPECT_THROW(split_season(january, SeasonDefinition{{2}, 150}), EmptySeasonError);
}

TEST(SplitSeason, InvalidDefinitionRejected) {
  EXPECT_THROW(SeasonDefinition({}, 150).validate(), DomainError);
  EXPECT_THROW(SeasonDefinition({13}, 150).validate(), DomainError);
  EXPECT_THROW(SeasonDefinition({1}, 0).validate(), DomainError);
}

TEST(SplitSeason, ShortYearsAreReported) {
  const auto p = daily_year(2001);
  const auto w = split_season(p, SeasonDefinition::winter());
  const auto shortfalls = short_season_years(w, SeasonDefinition::winter());
  // 2001 contributes all 151 winter days, above the 150-day floor.
  EXPECT_TRUE(shortfalls.empty());
  const auto summer = split_season(p, SeasonDefinition{{6}, 150});
  const auto s = short_season_years(summer, SeasonDefinition{{6}, 150});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].year, 2001);
  EXPECT_EQ(s[0].days, 30u);
}

TEST(Decluster, LargestDaySuppressesItsNeighbours) {
  const auto p = PanelSample::from_rows({{10.0}, {9.0}, {1.0}});
  const auto d = decluster(p, 2);
  ASSERT_EQ(d.panel.rows(), 1u);
  EXPECT_EQ(d.panel.days()[0], p.days()[0]);
  EXPECT_EQ(d.removed_days, 2u);
}

TEST(Decluster, DistantDaysAreAllKept) {
  const Day d1{year{2001} / 1 / 1};
  const auto p = PanelSample({d1, d1 + std::chrono::days{4}, d1 + std::chrono::days{8}}, {"A"}, {5.0, 4.0, 9.0},
                             {0, 0, 0});
  const auto d = decluster(p, 2);
  EXPECT_EQ(d.panel.rows(), 3u);
}

TEST(Decluster, ZeroGapIsIdentity) {
  const auto p = PanelSample::from_rows({{3.0, 1.0}, {2.0, 5.0}, {4.0, 4.0}, {1.0, 0.5}});
  const auto d = decluster(p, 0);
  EXPECT_EQ(d.panel.days(), p.days());
  EXPECT_EQ(d.removed_days, 0u);
}

TEST(Decluster, NegativeGapRejected) {
  const auto p = PanelSample::from_rows({{1.0}});
  EXPECT_THROW(decluster(p, -1), DomainError);
}

TEST(Decluster, TiesFavourTheEarlierDay) {
  const auto p = PanelSample::from_rows({{1.0}, {5.0}, {5.0}});
  const auto d = decluster(p, 1);
  ASSERT_EQ(d.panel.rows(), 1u);
  EXPECT_EQ(d.panel.days()[0], p.days()[1]);
}

TEST(Decluster, AllMissingDaysAreDroppedAndCounted) {
  const auto p = PanelSample::from_rows({{NAN, NAN}, {1.0, NAN}, {NAN, NAN}, {NAN, NAN}, {NAN, NAN}, {2.0, 3.0}});
  const auto d = decluster(p, 0);
  EXPECT_EQ(d.all_missing_days, 4u);
  EXPECT_EQ(d.panel.rows(), 2u);
}

// Pseudo-random panel without ties, built from a fixed linear congruential sequence.
PanelSample scrambled(std::size_t n, std::size_t m, unsigned seed) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(m));
  std::uint64_t state = seed;
  for (auto& row : rows) {
    for (auto& x : row) {
      state = state * 6364136223846793005ull + 1442695040888963407ull;
      x = static_cast<double>(state >> 11) * 0x1.0p-53 * 100.0;
    }
  }
  return PanelSample::from_rows(rows);
}

TEST(DeclusterProperty, KeptDaysAreSeparatedAndIdempotent) {
  for (unsigned seed = 1; seed <= 20; ++seed) {
    for (int gap : {1, 2, 5}) {
      const auto p = scrambled(200, 3, seed);
      const auto once = decluster(p, gap).panel;
      for (std::size_t i = 1; i < once.rows(); ++i) {
        EXPECT_GT((once.days()[i] - once.days()[i - 1]).count(), gap);
      }
      const auto twice = decluster(once, gap);
      EXPECT_EQ(twice.removed_days, 0u);
      EXPECT_EQ(twice.panel.days(), once.days());
    }
  }
}

TEST(PanelSample, ConstructorValidates) {
  const Day d{year{2001} / 1 / 1};
  EXPECT_THROW(PanelSample({d}, {"A"}, {1.0, 2.0}, {0, 0}), DomainError);
  EXPECT_THROW(PanelSample({d}, {"A"}, {INFINITY}, {0}), DomainError);
  EXPECT_THROW(PanelSample({}, {"A"}, {}, {}), DomainError);
}

TEST(PanelSample, ScaledMultipliesValuesOnly) {
  const auto p = PanelSample::from_rows({{1.0, NAN}, {2.0, 3.0}});
  const auto q = p.scaled(2.5);
  EXPECT_DOUBLE_EQ(q.value(1, 1), 7.5);
  EXPECT_TRUE(q.missing(0, 1));
  EXPECT_THROW(p.scaled(0.0), DomainError);
}

}  // namespace
}  // namespace scedex
