#include "scedex/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "scedex/error.hpp"

namespace scedex {

namespace {

constexpr const char* kModule = "panel";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

int parse_int(std::string_view text) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(kModule, fmt::format("invalid integer '{}'", text));
  }
  return v;
}

}  // namespace

Day parse_iso_date(std::string_view text) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ParseError(kModule, fmt::format("invalid ISO date '{}'", text),
                     "dates must be formatted YYYY-MM-DD");
  }
  const int y = parse_int(text.substr(0, 4));
  const int m = parse_int(text.substr(5, 2));
  const int d = parse_int(text.substr(8, 2));
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParseError(kModule, fmt::format("invalid calendar date '{}'", text));
  return Day{ymd};
}

std::string format_iso_date(Day day) {
  const std::chrono::year_month_day ymd{day};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

PanelSample::PanelSample(std::vector<Day> days, std::vector<std::string> station_ids,
                         std::vector<double> values, std::vector<std::uint8_t> missing)
    : days_(std::move(days)),
      station_ids_(std::move(station_ids)),
      values_(std::move(values)),
      missing_(std::move(missing)) {
  if (days_.empty() || station_ids_.empty()) {
    throw DomainError(kModule, "a panel needs at least one day and one station");
  }
  if (values_.size() != days_.size() * station_ids_.size() || missing_.size() != values_.size()) {
    throw DomainError(kModule, "values and missing mask must both be rows x stations");
  }
  for (std::size_t i = 1; i < days_.size(); ++i) {
    if (days_[i] <= days_[i - 1]) {
      throw OrderingError(kModule, fmt::format("day {} ({}) does not follow {}", i + 1,
                                               format_iso_date(days_[i]), format_iso_date(days_[i - 1])),
                          "sort the input by date and remove duplicate days");
    }
  }
  for (std::size_t c = 0; c < values_.size(); ++c) {
    if (missing_[c]) {
      values_[c] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    if (!std::isfinite(values_[c])) {
      throw DomainError(kModule, fmt::format("non-finite value at row {}, station {}",
                                             c / stations() + 1, c % stations() + 1));
    }
    if (values_[c] < 0.0) {
      throw DomainError(kModule, fmt::format("negative value {} at row {}, station {}", values_[c],
                                             c / stations() + 1, c % stations() + 1),
                        "rainfall amounts must be >= 0");
    }
    ++non_missing_;
  }
}

PanelSample PanelSample::from_rows(const std::vector<std::vector<double>>& rows, Day first_day) {
  if (rows.empty()) throw DomainError(kModule, "no rows");
  const std::size_t m = rows.front().size();
  std::vector<Day> days;
  std::vector<double> values;
  std::vector<std::uint8_t> missing;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m) throw DomainError(kModule, "ragged rows");
    days.push_back(first_day + std::chrono::days{static_cast<int>(i)});
    for (double v : rows[i]) {
      const bool miss = std::isnan(v);
      values.push_back(miss ? 0.0 : v);
      missing.push_back(miss ? 1 : 0);
    }
  }
  std::vector<std::string> ids(m);
  for (std::size_t j = 0; j < m; ++j) ids[j] = fmt::format("S{}", j + 1);
  return PanelSample(std::move(days), std::move(ids), std::move(values), std::move(missing));
}

std::size_t PanelSample::station_index(std::string_view id) const {
  const auto it = std::find(station_ids_.begin(), station_ids_.end(), id);
  if (it == station_ids_.end()) throw RangeError(kModule, fmt::format("unknown station '{}'", id));
  return static_cast<std::size_t>(it - station_ids_.begin());
}

PanelSample PanelSample::select_rows(std::span<const std::size_t> row_indices) const {
  std::vector<Day> days;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  days.reserve(row_indices.size());
  for (std::size_t i : row_indices) {
    days.push_back(days_[i]);
    for (std::size_t j = 0; j < stations(); ++j) {
      values.push_back(missing(i, j) ? 0.0 : value(i, j));
      mask.push_back(missing_[i * stations() + j]);
    }
  }
  return PanelSample(std::move(days), station_ids_, std::move(values), std::move(mask));
}

PanelSample PanelSample::select_stations(std::span<const std::size_t> station_indices) const {
  std::vector<std::string> ids;
  for (std::size_t j : station_indices) {
    if (j >= stations()) throw RangeError(kModule, fmt::format("station index {} out of range", j));
    ids.push_back(station_ids_[j]);
  }
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t j : station_indices) {
      values.push_back(missing(i, j) ? 0.0 : value(i, j));
      mask.push_back(missing_[i * stations() + j]);
    }
  }
  return PanelSample(days_, std::move(ids), std::move(values), std::move(mask));
}

PanelSample PanelSample::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError(kModule, "scale factor must be positive");
  std::vector<double> values(values_.size());
  for (std::size_t c = 0; c < values_.size(); ++c) values[c] = missing_[c] ? 0.0 : values_[c] * factor;
  return PanelSample(days_, station_ids_, std::move(values), missing_);
}

PanelSample read_panel(std::istream& in, const PanelSchema& schema) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw ParseError(kModule, "empty CSV input");

  std::vector<std::string> header;
  for (const auto field : split_csv_line(line)) header.emplace_back(field);
  std::size_t date_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == schema.date_column) date_col = c;
  }
  if (date_col == header.size()) {
    throw ParseError(kModule, fmt::format("line {}: no '{}' column in header", line_no, schema.date_column));
  }

  std::vector<std::size_t> cols;
  std::vector<std::string> ids;
  if (schema.station_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == date_col) continue;
      cols.push_back(c);
      ids.emplace_back(header[c]);
    }
  } else {
    for (const auto& name : schema.station_columns) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) {
        throw ParseError(kModule, fmt::format("line {}: station column '{}' not in header", line_no, name));
      }
      cols.push_back(static_cast<std::size_t>(it - header.begin()));
      ids.push_back(name);
    }
  }
  if (cols.empty()) throw ParseError(kModule, "no station columns", "add at least one station column");

  std::vector<Day> days;
  std::vector<double> values;
  std::vector<std::uint8_t> missing;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError(kModule, fmt::format("line {}: expected {} fields, found {}", line_no,
                                            header.size(), fields.size()));
    }
    Day day;
    try {
      day = parse_iso_date(fields[date_col]);
    } catch (const ParseError& e) {
      throw ParseError(kModule, fmt::format("line {}: {}", line_no, e.what()), e.hint());
    }
    if (!days.empty() && day <= days.back()) {
      throw OrderingError(kModule, fmt::format("line {}: date {} is not after {}", line_no,
                                               format_iso_date(day), format_iso_date(days.back())),
                          "sort the input by date and remove duplicate days");
    }
    days.push_back(day);
    for (std::size_t c : cols) {
      const auto field = fields[c];
      if (field.empty() || field == "NA" || field == "NaN") {
        values.push_back(0.0);
        missing.push_back(1);
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw ParseError(kModule, fmt::format("line {}: cannot parse '{}' as a number", line_no, field));
      }
      if (v < 0.0) {
        throw DomainError(kModule, fmt::format("line {}: negative rainfall {} at station '{}'", line_no, field,
                                               header[c]),
                          "rainfall amounts must be >= 0");
      }
      values.push_back(v);
      missing.push_back(0);
    }
  }
  if (days.empty()) throw ParseError(kModule, "CSV has a header but no data rows");
  return PanelSample(std::move(days), std::move(ids), std::move(values), std::move(missing));
}

PanelSample load_panel(const std::string& path, const PanelSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError(kModule, fmt::format("cannot open '{}'", path), "check the --input path");
  return read_panel(in, schema);
}

void write_panel(std::ostream& out, const PanelSample& panel) {
  out << "date";
  for (const auto& id : panel.station_ids()) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    out << format_iso_date(panel.days()[i]);
    for (std::size_t j = 0; j < panel.stations(); ++j) {
      out << ',';
      if (!panel.missing(i, j)) out << fmt::format("{:.12g}", panel.value(i, j));
    }
    out << '\n';
  }
}

SeasonDefinition SeasonDefinition::winter() { return {{11, 12, 1, 2, 3}, 150}; }
SeasonDefinition SeasonDefinition::summer() { return {{5, 6, 7, 8, 9}, 150}; }
SeasonDefinition SeasonDefinition::all_year() { return {{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}, 150}; }

void SeasonDefinition::validate() const {
  if (included_months.empty()) throw DomainError(kModule, "season has no months");
  for (unsigned m : included_months) {
    if (m < 1 || m > 12) throw DomainError(kModule, fmt::format("month {} out of 1..12", m));
  }
  if (min_days_per_year < 1) throw DomainError(kModule, "min_days_per_year must be >= 1");
}

PanelSample split_season(const PanelSample& panel, const SeasonDefinition& season) {
  season.validate();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    const std::chrono::year_month_day ymd{panel.days()[i]};
    if (season.included_months.contains(static_cast<unsigned>(ymd.month()))) keep.push_back(i);
  }
  if (keep.empty()) {
    throw EmptySeasonError(kModule, "no rows fall inside the selected months",
                           "check --season/--months against the input date range");
  }
  return panel.select_rows(keep);
}

std::vector<SeasonShortfall> short_season_years(const PanelSample& season_panel,
                                                const SeasonDefinition& season) {
  std::map<int, std::size_t> per_year;
  for (const auto day : season_panel.days()) {
    ++per_year[static_cast<int>(std::chrono::year_month_day{day}.year())];
  }
  std::vector<SeasonShortfall> out;
  for (const auto& [year, count] : per_year) {
    if (count < season.min_days_per_year) out.push_back({year, count});
  }
  return out;
}

DeclusterResult decluster(const PanelSample& panel, int gap_days) {
  if (gap_days < 0) throw DomainError(kModule, "gap_days must be >= 0");

  struct Candidate {
    double maximum;
    std::size_t row;
  };
  std::vector<Candidate> candidates;
  std::size_t all_missing = 0;
  for (std::size_t i = 0; i < panel.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < panel.stations(); ++j) {
      if (panel.missing(i, j)) continue;
      mx = std::max(mx, panel.value(i, j));
      any = true;
    }
    if (any) {
      candidates.push_back({mx, i});
    } else {
      ++all_missing;
    }
  }
  // Rows are in calendar order, so a stable sort breaks ties by earlier date.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.maximum > b.maximum; });

  std::set<Day> kept_days;
  std::vector<std::size_t> kept_rows;
  const std::chrono::days gap{gap_days};
  for (const auto& cand : candidates) {
    const Day day = panel.days()[cand.row];
    bool near = false;
    auto it = kept_days.lower_bound(day - gap);
    if (it != kept_days.end() && *it <= day + gap) near = true;
    if (!near) {
      kept_days.insert(day);
      kept_rows.push_back(cand.row);
    }
  }
  std::sort(kept_rows.begin(), kept_rows.end());
  if (kept_rows.empty()) throw EmptySeasonError(kModule, "declustering left no rows (all days missing)");

  DeclusterResult result{panel.select_rows(kept_rows), 0, all_missing};
  result.removed_days = candidates.size() - kept_rows.size();
  return result;
}

}  // namespace scedex
