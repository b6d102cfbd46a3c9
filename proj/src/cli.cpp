#include "scedex/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <CLI11.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "scedex/dependence.hpp"
#include "scedex/error.hpp"
#include "scedex/gp_mle.hpp"
#include "scedex/hypothesis.hpp"
#include "scedex/mc.hpp"
#include "scedex/panel.hpp"
#include "scedex/scedasis.hpp"

namespace scedex::cli {

namespace {

using json = nlohmann::ordered_json;

// Usage problems found after CLI11 parsing (exit 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every float leaves the program with 12 significant digits.
std::string num(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  return fmt::format("{:.12g}", x);
}

// Error text can hold quotes and line breaks; RFC 4180 quoting keeps one field.
std::string csv_field(const std::string& text) {
  std::string s = "\"";
  for (char ch : text) s += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return s + "\"";
}

json jnum(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::stod(fmt::format("{:.12g}", x));
}

struct Config {
  std::string command;
  std::string input;
  std::string season = "all";
  std::vector<unsigned> months;
  int gap_days = 2;
  bool no_decluster = false;
  std::vector<std::string> columns;
  std::vector<std::string> stations;
  std::optional<std::size_t> k;
  std::size_t k_min = 0, k_max = 0, step = 1;
  double alpha = 0.05;
  std::string test = "space";
  std::string format;
  std::string output;
  bool dry_run = false;
  std::optional<double> ci;
  std::size_t points = 100;
  // mc
  std::string scenario;
  std::string spec_path;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
};

json parameters_of(const Config& c) {
  json p;
  p["command"] = c.command;
  if (!c.input.empty()) p["input"] = c.input;
  if (c.command != "mc") {
    p["season"] = c.season;
    p["gap_days"] = c.no_decluster ? -1 : c.gap_days;
  }
  if (c.k) p["k"] = *c.k;
  if (c.k_max > 0) {
    p["k_min"] = c.k_min;
    p["k_max"] = c.k_max;
    p["step"] = c.step;
  }
  if (!c.columns.empty()) p["columns"] = c.columns;
  if (!c.stations.empty()) p["stations"] = c.stations;
  if (!c.scenario.empty()) p["scenario"] = c.scenario;
  if (!c.spec_path.empty()) p["spec"] = c.spec_path;
  if (c.reps) p["reps"] = *c.reps;
  if (c.seed) p["seed"] = *c.seed;
  return p;
}

SeasonDefinition season_of(const Config& c) {
  if (c.season == "winter") return SeasonDefinition::winter();
  if (c.season == "summer") return SeasonDefinition::summer();
  if (c.season == "all") return SeasonDefinition::all_year();
  SeasonDefinition s;
  s.included_months = {c.months.begin(), c.months.end()};
  s.validate();
  return s;
}

struct Prepared {
  PanelSample panel;
  std::size_t removed_days = 0;
  std::size_t all_missing_days = 0;
  std::vector<SeasonShortfall> short_years;
  std::size_t raw_rows = 0;
};

// Ingestion, season split, then declustering.
Prepared prepare(const Config& c) {
  PanelSchema schema;
  schema.station_columns = c.columns;
  PanelSample raw = load_panel(c.input, schema);
  const auto season = season_of(c);
  PanelSample seasonal = split_season(raw, season);
  auto short_years = short_season_years(seasonal, season);
  if (c.no_decluster) return {std::move(seasonal), 0, 0, std::move(short_years), raw.rows()};
  auto d = decluster(seasonal, c.gap_days);
  return {std::move(d.panel), d.removed_days, d.all_missing_days, std::move(short_years), raw.rows()};
}

std::size_t station_of(const PanelSample& panel, const std::string& id) { return panel.station_index(id); }

std::vector<std::size_t> k_range(const Config& c) {
  std::vector<std::size_t> ks;
  for (std::size_t k = c.k_min; k <= c.k_max; k += c.step) ks.push_back(k);
  return ks;
}

// ---- commands; each returns the document text ----

std::string cmd_ingest_check(const Config& c) {
  const Prepared p = prepare(c);
  const auto& panel = p.panel;
  if (c.format == "csv") {
    std::string s = "rows_raw,rows,stations,missing_cells,removed_days,all_missing_days,first_date,last_date\n";
    s += fmt::format("{},{},{},{},{},{},{},{}\n", p.raw_rows, panel.rows(), panel.stations(),
                     panel.cells() - panel.non_missing_count(), p.removed_days, p.all_missing_days,
                     format_iso_date(panel.days().front()), format_iso_date(panel.days().back()));
    return s;
  }
  json j;
  j["rows_raw"] = p.raw_rows;
  j["rows"] = panel.rows();
  j["stations"] = panel.station_ids();
  j["missing_cells"] = panel.cells() - panel.non_missing_count();
  j["removed_days"] = p.removed_days;
  j["all_missing_days"] = p.all_missing_days;
  j["first_date"] = format_iso_date(panel.days().front());
  j["last_date"] = format_iso_date(panel.days().back());
  json shortfalls = json::array();
  for (const auto& s : p.short_years) shortfalls.push_back({{"year", s.year}, {"days", s.days}});
  j["short_season_years"] = shortfalls;
  return j.dump(2) + "\n";
}

std::string cmd_scedasis(const Config& c) {
  const Prepared p = prepare(c);
  const auto set = scedasis_all(p.panel, IntermediateK{*c.k});
  const auto& ids = p.panel.station_ids();
  if (c.format == "csv") {
    std::string s = "station,t,c_hat\n";
    for (const auto& curve : set.curves) {
      for (std::size_t g = 0; g <= c.points; ++g) {
        const double t = static_cast<double>(g) / static_cast<double>(c.points);
        s += fmt::format("{},{},{}\n", ids[curve.station], num(t), num(curve(t)));
      }
    }
    return s;
  }
  json j;
  j["k"] = *c.k;
  j["threshold"] = jnum(set.threshold);
  j["threshold_ties"] = set.threshold_ties;
  json stations = json::array();
  for (const auto& curve : set.curves) {
    stations.push_back({{"station", ids[curve.station]}, {"c1", jnum(curve.c1)}, {"exceedances", curve.exceedances()},
                        {"jump_rows", curve.jump_rows}});
  }
  j["stations"] = stations;
  return j.dump(2) + "\n";
}

std::string cmd_sigma1(const Config& c) {
  const Prepared p = prepare(c);
  const auto s1 = sigma1_matrix(p.panel, IntermediateK{*c.k});
  const auto& ids = p.panel.station_ids();
  const auto m = static_cast<Eigen::Index>(ids.size());
  if (c.format == "csv") {
    std::string s = "station1,station2,sigma\n";
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        s += fmt::format("{},{},{}\n", ids[static_cast<std::size_t>(a)], ids[static_cast<std::size_t>(b)],
                         num(s1.entries(a, b)));
      }
    }
    return s;
  }
  json rows = json::array();
  for (Eigen::Index a = 0; a < m; ++a) {
    json row = json::array();
    for (Eigen::Index b = 0; b < m; ++b) row.push_back(jnum(s1.entries(a, b)));
    rows.push_back(row);
  }
  return json{{"k", *c.k}, {"stations", ids}, {"sigma1", rows}}.dump(2) + "\n";
}

std::string cmd_test_space(const Config& c) {
  const Prepared p = prepare(c);
  const auto r = space_test(p.panel, IntermediateK{*c.k});
  if (c.format == "csv") {
    return fmt::format("k,m,statistic,df,p_value,threshold_ties\n{},{},{},{},{},{}\n", r.k, p.panel.stations(),
                       num(r.statistic), r.df, num(r.p_value), r.threshold_ties);
  }
  json j;
  j["test"] = "space";
  j["k"] = r.k;
  j["m"] = p.panel.stations();
  j["statistic"] = jnum(r.statistic);
  j["df"] = r.df;
  j["p_value"] = jnum(r.p_value);
  j["reject"] = r.p_value < c.alpha;
  j["alpha"] = jnum(c.alpha);
  j["threshold_ties"] = r.threshold_ties;
  return j.dump(2) + "\n";
}

std::string cmd_test_time(const Config& c) {
  const Prepared p = prepare(c);
  const auto& panel = p.panel;
  const auto pooled = pool(panel);
  const IntermediateK k{*c.k};
  std::vector<std::size_t> which;
  if (c.stations.empty()) {
    for (std::size_t j = 0; j < panel.stations(); ++j) which.push_back(j);
  } else {
    for (const auto& id : c.stations) which.push_back(station_of(panel, id));
  }
  struct Row {
    std::string id;
    double statistic = NAN, p = NAN;
    std::string error;
  };
  std::vector<Row> rows;
  std::vector<double> ps;
  for (std::size_t j : which) {
    Row row;
    row.id = panel.station_ids()[j];
    try {
      const auto r = time_test(panel, pooled, k, j);
      row.statistic = r.statistic;
      row.p = r.p_value;
      ps.push_back(r.p_value);
    } catch (const NoExceedanceError& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }
  const auto bf = bonferroni(ps, c.alpha);
  const double level = bf.corrected_level;
  if (c.format == "csv") {
    std::string s = "station,statistic,p_value,reject,error\n";
    for (const auto& r : rows) {
      const bool reject = r.error.empty() && r.p < level;
      s += fmt::format("{},{},{},{},{}\n", r.id, num(r.statistic), num(r.p), reject ? 1 : 0,
                       r.error.empty() ? "" : csv_field(r.error));
    }
    return s;
  }
  json j;
  j["test"] = "time";
  j["k"] = k.value;
  j["alpha"] = jnum(c.alpha);
  j["corrected_level"] = jnum(level);
  json arr = json::array();
  for (const auto& r : rows) {
    json e{{"station", r.id}, {"statistic", jnum(r.statistic)}, {"p_value", jnum(r.p)},
           {"reject", r.error.empty() && r.p < level}};
    if (!r.error.empty()) e["error"] = r.error;
    arr.push_back(e);
  }
  j["stations"] = arr;
  return j.dump(2) + "\n";
}

std::string cmd_sweep(const Config& c) {
  const Prepared p = prepare(c);
  const auto ks = k_range(c);
  const bool time = c.test == "time";
  std::size_t station = 0;
  if (time) station = station_of(p.panel, c.stations.front());
  const auto rows = k_sweep(p.panel, ks, time ? TestKind::kTime : TestKind::kSpace, station);
  if (c.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      json e{{"k", r.k}, {"statistic", r.ok ? jnum(r.statistic) : json(nullptr)},
             {"p_value", r.ok ? jnum(r.p_value) : json(nullptr)}};
      if (!r.ok) e["error"] = r.error;
      arr.push_back(e);
    }
    return json{{"test", c.test}, {"rows", arr}}.dump(2) + "\n";
  }
  std::string s = "k,statistic,p_value,error\n";
  for (const auto& r : rows) {
    s += r.ok ? fmt::format("{},{},{},\n", r.k, num(r.statistic), num(r.p_value))
              : fmt::format("{},,,{}\n", r.k, csv_field(r.error));
  }
  return s;
}


std::string cmd_fit_gp(const Config& c) {
  const Prepared p = prepare(c);
  const IntermediateK k{*c.k};
  const GpFit fit = fit_gp_pml(p.panel, k);
  json j;
  j["k"] = fit.k;
  j["gamma"] = jnum(fit.gamma_hat);
  j["scale"] = jnum(fit.scale_hat);
  j["loglik"] = jnum(fit.loglik);
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["score_norm"] = jnum(fit.score_norm);
  j["dropped_ties"] = fit.dropped_ties;
  double se = NAN, lo = NAN, hi = NAN, se_scale = NAN;
  if (c.ci) {
    const auto cov = mle_asymptotic_cov(fit, p.panel);
    se = cov.se_gamma();
    se_scale = cov.se_scale_ratio();
    const double z = std::sqrt(2.0) * boost::math::erf_inv(*c.ci);
    lo = fit.gamma_hat - z * se;
    hi = fit.gamma_hat + z * se;
    j["se_gamma"] = jnum(se);
    j["se_scale_ratio"] = jnum(se_scale);
    j["ci_level"] = jnum(*c.ci);
    j["gamma_ci"] = {jnum(lo), jnum(hi)};
    j["quadrature_error"] = jnum(cov.quadrature_error);
  }
  if (c.format == "csv") {
    return fmt::format("k,gamma_hat,scale_hat,loglik,iterations,se_gamma,ci_low,ci_high\n{},{},{},{},{},{},{},{}\n",
                       fit.k, num(fit.gamma_hat), num(fit.scale_hat), num(fit.loglik), fit.iterations, num(se),
                       num(lo), num(hi));
  }
  return j.dump(2) + "\n";
}

std::string cmd_gamma_path(const Config& c) {
  const Prepared p = prepare(c);
  const auto ks = k_range(c);
  const auto rows = gamma_path(p.panel, ks, c.ci.has_value());
  if (c.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      json e{{"k", r.k}, {"gamma", r.ok ? jnum(r.gamma_hat) : json(nullptr)},
             {"scale", r.ok ? jnum(r.scale_hat) : json(nullptr)}, {"se_gamma", jnum(r.se_gamma)}};
      if (!r.ok) e["error"] = r.error;
      arr.push_back(e);
    }
    return json{{"rows", arr}}.dump(2) + "\n";
  }
  std::string s = "k,gamma_hat,scale_hat,se_gamma,error\n";
  for (const auto& r : rows) {
    s += r.ok ? fmt::format("{},{},{},{},\n", r.k, num(r.gamma_hat), num(r.scale_hat), c.ci ? num(r.se_gamma) : "")
              : fmt::format("{},,,,{}\n", r.k, csv_field(r.error));
  }
  return s;
}

// ---- mc ----

struct McJob {
  SimSpec spec;
  std::size_t k = 0;
  std::string test = "space";
  std::size_t station = 0;
  double level = 0.05;
  std::vector<CovarianceQuery> queries;
};

// Schema:
// {"n", "m", "gamma", "seed", "k", "tail_level",
//  "dependence": {"type": "independent|logistic|comonotone", "alpha"},
//  "scedasis": [{"type": "constant", "value"} | {"type": "linear", "intercept", "slope"}] (one per station),
//  "test": "space|time", "station" (1-based), "level",
//  "queries": [{"station1", "station2", "s1", "s2", "t"}] (1-based stations)}
McJob parse_mc_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("mc", fmt::format("cannot open spec file '{}'", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("mc", fmt::format("spec '{}' is not valid JSON: {}", path, e.what()));
  }
  McJob job;
  try {
    job.spec.n = j.at("n").get<std::size_t>();
    job.spec.m = j.at("m").get<std::size_t>();
    job.spec.gamma = j.value("gamma", 0.0);
    job.spec.seed = j.value("seed", std::uint64_t{1});
    job.spec.tail_level = j.value("tail_level", 0.1);
    job.k = j.value("k", std::size_t{0});
    if (j.contains("dependence")) {
      const auto& d = j["dependence"];
      const auto type = d.value("type", std::string{"independent"});
      if (type == "independent") {
        job.spec.dependence.kind = DependenceKind::kIndependent;
      } else if (type == "logistic") {
        job.spec.dependence.kind = DependenceKind::kLogistic;
        job.spec.dependence.alpha = d.at("alpha").get<double>();
      } else if (type == "comonotone") {
        job.spec.dependence.kind = DependenceKind::kComonotone;
      } else {
        throw SpecError("mc", fmt::format("unknown dependence type '{}'", type),
                        "use independent, logistic or comonotone");
      }
    }
    if (j.contains("scedasis")) {
      for (const auto& f : j["scedasis"]) {
        const auto type = f.value("type", std::string{"constant"});
        if (type == "constant") {
          job.spec.scedasis.push_back({f.value("value", 1.0), 0.0});
        } else if (type == "linear") {
          job.spec.scedasis.push_back({f.at("intercept").get<double>(), f.at("slope").get<double>()});
        } else {
          throw SpecError("mc", fmt::format("unknown scedasis type '{}'", type), "use constant or linear");
        }
      }
    }
    job.test = j.value("test", std::string{"space"});
    job.station = j.value("station", std::size_t{1});
    job.level = j.value("level", 0.05);
    if (j.contains("queries")) {
      for (const auto& q : j["queries"]) {
        job.queries.push_back({q.value("station1", std::size_t{1}) - 1, q.value("station2", std::size_t{1}) - 1,
                               q.value("s1", 1.0), q.value("s2", 1.0), q.value("t", 1.0)});
      }
    }
  } catch (const json::exception& e) {
    throw SpecError("mc", fmt::format("spec '{}': {}", path, e.what()), "see the schema in the README");
  }
  if (job.test != "space" && job.test != "time") throw SpecError("mc", "test must be space or time");
  if (job.station < 1) throw SpecError("mc", "station is 1-based");
  job.station -= 1;
  job.spec.normalize();
  return job;
}

std::string cmd_mc(const Config& c, McJob job) {
  if (c.seed) job.spec.seed = *c.seed;
  if (c.k) job.k = *c.k;
  if (job.k == 0) throw SpecError("mc", "no k given", "set \"k\" in the spec or pass --k");
  const std::size_t reps = c.reps.value_or(500);
  const IntermediateK k{job.k};
  json j;
  j["scenario"] = c.scenario;
  j["k"] = job.k;
  j["seed"] = job.spec.seed;
  j["replications"] = reps;
  if (c.scenario == "size" || c.scenario == "power") {
    const auto r = mc_test_size(job.spec, k, job.test == "time" ? TestKind::kTime : TestKind::kSpace, reps,
                                job.station, job.level);
    const double band = 3.0 * std::sqrt(job.level * (1.0 - job.level) / static_cast<double>(std::max<std::size_t>(r.used(), 1)));
    j["test"] = job.test;
    j["skipped"] = r.skipped;
    j["rejection_rate"] = jnum(r.rejection_rate);
    j["monte_carlo_se"] = jnum(r.monte_carlo_se);
    j["degenerate"] = r.degenerate;
    j["level"] = jnum(job.level);
    j["pass"] = c.scenario == "size" ? std::abs(r.rejection_rate - job.level) <= band
                                     : r.rejection_rate > job.level + band;
    j["errors"] = r.errors;
  } else if (c.scenario == "cov") {
    if (job.queries.empty()) job.queries.push_back({0, job.spec.m > 1 ? 1u : 0u, 1.0, 1.0, 1.0});
    const auto r = mc_covariance_check(job.spec, k, job.queries, reps);
    auto entries = [](const std::vector<CovarianceEntry>& v) {
      json arr = json::array();
      for (const auto& e : v) {
        arr.push_back({{"station1", e.query.station1 + 1}, {"station2", e.query.station2 + 1}, {"s1", jnum(e.query.s1)},
                       {"s2", jnum(e.query.s2)}, {"t", jnum(e.query.t)}, {"analytic", jnum(e.analytic)},
                       {"empirical", jnum(e.empirical)}, {"monte_carlo_se", jnum(e.monte_carlo_se)},
                       {"pass", e.within(3.0)}});
      }
      return arr;
    };
    j["oracle"] = entries(r.oracle);
    j["self_normalized"] = entries(r.self_normalized);
    bool pass = true;
    for (const auto& e : r.oracle) pass = pass && e.within(3.0);
    j["pass"] = pass;
  } else {
    const auto r = mc_mle_variance(job.spec, k, reps);
    j["skipped"] = r.skipped;
    j["mean_gamma"] = jnum(r.mean_gamma);
    j["bias_gamma"] = jnum(r.bias_gamma);
    j["k_var_gamma"] = jnum(r.k_var_gamma);
    j["k_var_scale"] = jnum(r.k_var_scale);
    j["k_cov"] = jnum(r.k_cov);
    j["predicted"] = {{jnum(r.predicted(0, 0)), jnum(r.predicted(0, 1))},
                      {jnum(r.predicted(1, 0)), jnum(r.predicted(1, 1))}};
    j["pass"] = std::abs(r.k_var_gamma / r.predicted(0, 0) - 1.0) <= 0.15;
    j["errors"] = r.errors;
  }
  if (c.format == "csv") {
    std::string s = "key,value\n";
    for (const auto& [key, value] : j.items()) {
      if (value.is_primitive()) s += fmt::format("{},{}\n", key, value.dump());
    }
    return s;
  }
  return j.dump(2) + "\n";
}

// Writes next to the target and renames, so readers never see a partial file.
void write_atomically(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += fmt::format(".tmp.{}", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cli", fmt::format("cannot write '{}'", tmp.string()), "check the output directory");
    out << text;
    out.flush();
    if (!out) throw ParseError("cli", fmt::format("write to '{}' failed", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ParseError("cli", fmt::format("cannot move output into '{}'", path));
  }
}

void report_error(std::ostream& err, const std::string& kind, const std::string& module, const std::string& message,
                  const std::string& hint, const json& params) {
  json e;
  e["error"] = {{"kind", kind}, {"module", module}, {"message", message}};
  if (!hint.empty()) e["error"]["hint"] = hint;
  if (!params.is_null()) e["error"]["parameters"] = params;
  err << e.dump() << "\n";
}

void validate(const Config& c) {
  const bool needs_input = c.command != "mc";
  if (needs_input && c.input.empty()) throw UsageError("--input is required");
  if (c.season == "custom" && c.months.empty()) throw UsageError("--season custom needs --months");
  if (c.season != "custom" && !c.months.empty()) throw UsageError("--months is only valid with --season custom");
  if (c.no_decluster && c.gap_days != 2) throw UsageError("--gap-days conflicts with --no-decluster");
  const bool single_k = c.command == "scedasis" || c.command == "sigma1" || c.command == "test-space" ||
                        c.command == "test-time" || c.command == "fit-gp";
  const bool range_k = c.command == "sweep" || c.command == "gamma-path";
  if (single_k && !c.k) throw UsageError(fmt::format("{} needs --k", c.command));
  if (range_k) {
    if (c.k) throw UsageError(fmt::format("{} takes --k-min/--k-max, not --k", c.command));
    if (c.k_min < 1 || c.k_max < c.k_min || c.step < 1) {
      throw UsageError("need 1 <= --k-min <= --k-max and --step >= 1");
    }
  }
  const bool gp = c.command == "fit-gp" || c.command == "gamma-path";
  if (gp && ((c.k && *c.k < 10) || (range_k && c.k_min < 10))) {
    throw UsageError("GP fitting needs k >= 10");
  }
  if (c.command == "sweep" && c.test == "time" && c.stations.size() != 1) {
    throw UsageError("sweep --test time needs exactly one --station");
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  if (c.ci && !(*c.ci > 0.0 && *c.ci < 1.0)) throw UsageError("--ci must lie in (0, 1)");
  if (c.command == "mc" && c.spec_path.empty()) throw UsageError("mc needs --spec");
  if (c.command == "mc" && c.reps && *c.reps == 0) throw UsageError("--reps must be positive");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Scedasis estimation and tests for panels of extremes"};
  app.name("scedex");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"ingest-check", "Load, split and decluster a panel and report what was kept"},
      {"scedasis", "Integrated scedasis estimates per station"},
      {"sigma1", "Tail dependence matrix at the pooled threshold"},
      {"test-space", "Test equal scedasis across stations"},
      {"test-time", "Test constant scedasis over time, per station, with Bonferroni correction"},
      {"sweep", "Re-run a test over a range of k"},
      {"fit-gp", "Pooled generalized Pareto pseudo-MLE"},
      {"gamma-path", "Extreme value index estimates over a range of k"},
      {"mc", "Monte Carlo checks on simulated panels"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->callback([&c, n = name] { c.command = n; });
    sub->add_option("--output,-o", c.output, "Write the result here instead of stdout");
    sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--dry-run", c.dry_run, "Validate the configuration only");
    sub->add_option("--k", c.k, "Number of top order statistics")->check(CLI::PositiveNumber);
    if (name == "mc") {
      sub->add_option("--scenario", c.scenario, "size, power, cov or mle")
          ->required()
          ->check(CLI::IsMember({"size", "power", "cov", "mle"}));
      sub->add_option("--spec", c.spec_path, "Simulation spec (JSON)");
      sub->add_option("--reps", c.reps, "Replications (default 500)");
      sub->add_option("--seed", c.seed, "Override the spec seed");
      continue;
    }
    sub->add_option("--input,-i", c.input, "Panel CSV with a date column");
    sub->add_option("--season", c.season, "winter, summer, all or custom")
        ->check(CLI::IsMember({"winter", "summer", "all", "custom"}));
    sub->add_option("--months", c.months, "Months kept by --season custom")->delimiter(',');
    sub->add_option("--gap-days", c.gap_days, "Declustering gap in days")->check(CLI::NonNegativeNumber);
    sub->add_flag("--no-decluster", c.no_decluster, "Skip declustering");
    sub->add_option("--columns", c.columns, "Station columns to load (default: all)")->delimiter(',');
    if (name == "test-time" || name == "sweep") {
      sub->add_option("--station", c.stations, "Station id (repeatable)")->delimiter(',');
    }
    if (name == "test-time" || name == "test-space") sub->add_option("--alpha", c.alpha, "Family-wise level");
    if (name == "sweep") sub->add_option("--test", c.test, "space or time")->check(CLI::IsMember({"space", "time"}));
    if (name == "sweep" || name == "gamma-path") {
      sub->add_option("--k-min", c.k_min, "Smallest k");
      sub->add_option("--k-max", c.k_max, "Largest k");
      sub->add_option("--step", c.step, "Step in k");
    }
    if (name == "fit-gp" || name == "gamma-path") {
      sub->add_option("--ci", c.ci, "Confidence level; adds sandwich standard errors");
    }
    if (name == "scedasis") sub->add_option("--points", c.points, "Grid size for csv output")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", "cli", e.what(), "run with --help", nullptr);
    return kExitUsage;
  }

  try {
    validate(c);
  } catch (const UsageError& e) {
    report_error(err, "usage", "cli", e.what(), "run with --help", parameters_of(c));
    return kExitUsage;
  }
  if (c.format.empty()) {
    const bool table = c.command == "sweep" || c.command == "gamma-path" || c.command == "sigma1";
    c.format = table ? "csv" : "json";
  }

  try {
    std::optional<McJob> job;
    if (c.command == "mc") job = parse_mc_spec(c.spec_path);
    if (c.dry_run) {
      if (!c.input.empty() && !std::filesystem::is_regular_file(c.input)) {
        throw ParseError("panel", fmt::format("input '{}' does not exist", c.input));
      }
      if (c.command != "mc") season_of(c);
      json j{{"dry_run", true}, {"valid", true}, {"parameters", parameters_of(c)}};
      out << j.dump(2) << "\n";
      return kExitOk;
    }
    std::string text;
    if (c.command == "ingest-check") text = cmd_ingest_check(c);
    else if (c.command == "scedasis") text = cmd_scedasis(c);
    else if (c.command == "sigma1") text = cmd_sigma1(c);
    else if (c.command == "test-space") text = cmd_test_space(c);
    else if (c.command == "test-time") text = cmd_test_time(c);
    else if (c.command == "sweep") text = cmd_sweep(c);
    else if (c.command == "fit-gp") text = cmd_fit_gp(c);
    else if (c.command == "gamma-path") text = cmd_gamma_path(c);
    else text = cmd_mc(c, std::move(*job));

    if (c.output.empty()) {
      out << text;
    } else {
      write_atomically(c.output, text);
    }
    return kExitOk;
  } catch (const Error& e) {
    report_error(err, "runtime", e.module(), e.what(), e.hint(), parameters_of(c));
  } catch (const std::exception& e) {
    report_error(err, "runtime", "cli", e.what(), "", parameters_of(c));
  }
  return kExitRuntime;
}

}  // namespace scedex::cli
