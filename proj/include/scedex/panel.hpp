#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace scedex {

using Day = std::chrono::sys_days;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws ParseError.
Day parse_iso_date(std::string_view text);
std::string format_iso_date(Day day);

/// Daily observations of m stations over n days.
///
/// Rows are days in strictly increasing calendar order, columns are stations.
/// Missing cells are flagged in a mask aligned with the values; a missing cell
/// never counts as an exceedance anywhere in the library.
class PanelSample {
 public:
  PanelSample(std::vector<Day> days, std::vector<std::string> station_ids,
              std::vector<double> values, std::vector<std::uint8_t> missing);

  /// Test/simulation helper: rows of values where NaN marks a missing cell.
  /// Days are consecutive starting at `first_day`.
  static PanelSample from_rows(const std::vector<std::vector<double>>& rows,
                               Day first_day = Day{std::chrono::year{2000} / 1 / 1});

  std::size_t rows() const noexcept { return days_.size(); }
  std::size_t stations() const noexcept { return station_ids_.size(); }
  std::size_t cells() const noexcept { return values_.size(); }
  std::size_t non_missing_count() const noexcept { return non_missing_; }

  bool missing(std::size_t row, std::size_t station) const {
    return missing_[row * stations() + station] != 0;
  }
  /// Value of a non-missing cell; NaN for a missing one.
  double value(std::size_t row, std::size_t station) const {
    return values_[row * stations() + station];
  }

  const std::vector<Day>& days() const noexcept { return days_; }
  const std::vector<std::string>& station_ids() const noexcept { return station_ids_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const std::uint8_t> missing_mask() const noexcept { return missing_; }

  std::size_t station_index(std::string_view id) const;

  PanelSample select_rows(std::span<const std::size_t> row_indices) const;
  PanelSample select_stations(std::span<const std::size_t> station_indices) const;
  /// Multiplies every value by `factor` (> 0).
  PanelSample scaled(double factor) const;

 private:
  std::vector<Day> days_;
  std::vector<std::string> station_ids_;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
  std::size_t non_missing_ = 0;
};

struct PanelSchema {
  std::string date_column = "date";
  /// Empty selects every non-date column.
  std::vector<std::string> station_columns;
};

PanelSample read_panel(std::istream& in, const PanelSchema& schema = {});
PanelSample load_panel(const std::string& path, const PanelSchema& schema = {});
void write_panel(std::ostream& out, const PanelSample& panel);

struct SeasonDefinition {
  std::set<unsigned> included_months;
  unsigned min_days_per_year = 150;

  static SeasonDefinition winter();   // Nov-Mar
  static SeasonDefinition summer();   // May-Sep
  static SeasonDefinition all_year();

  void validate() const;
};

PanelSample split_season(const PanelSample& panel, const SeasonDefinition& season);

struct SeasonShortfall {
  int year;
  std::size_t days;
};
/// Years whose retained day count falls below the season's floor.
std::vector<SeasonShortfall> short_season_years(const PanelSample& season_panel,
                                                const SeasonDefinition& season);

struct DeclusterResult {
  PanelSample panel;
  std::size_t removed_days = 0;
  /// Days dropped because every station was missing.
  std::size_t all_missing_days = 0;
};

/// Greedy storm declustering on station-wise daily maxima.
///
/// Days are visited by decreasing maximum over the non-missing stations (ties:
/// earlier date first). A day is removed when it lies within `gap_days`
/// calendar days of an already kept day. Output rows stay in calendar order.
DeclusterResult decluster(const PanelSample& panel, int gap_days = 2);

}  // namespace scedex
