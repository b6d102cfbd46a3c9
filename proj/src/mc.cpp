#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "scedex/detail/grid.hpp"
#include "scedex/error.hpp"
#include "scedex/mc.hpp"
#include "scedex/parallel.hpp"
#include "scedex/scedasis.hpp"

namespace scedex {

namespace {

constexpr const char* kModule = "mc";
constexpr std::size_t kKeptErrors = 5;

void keep_errors(const std::vector<std::string>& per_rep, std::vector<std::string>& out) {
  for (const auto& e : per_rep) {
    if (!e.empty() && out.size() < kKeptErrors) out.push_back(e);
  }
}

double mean_of(const std::vector<double>& x) {
  return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Sample covariance and the standard error of that estimate across replications.
std::pair<double, double> covariance_with_se(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t r = x.size();
  if (r < 2) return {0.0, 0.0};
  const double mx = mean_of(x), my = mean_of(y);
  std::vector<double> products(r);
  for (std::size_t i = 0; i < r; ++i) products[i] = (x[i] - mx) * (y[i] - my);
  const double mp = mean_of(products);
  double spread = 0.0;
  for (double p : products) spread += (p - mp) * (p - mp);
  const double cov = mp * static_cast<double>(r) / static_cast<double>(r - 1);
  return {cov, std::sqrt(spread / static_cast<double>(r - 1) / static_cast<double>(r))};
}

}  // namespace

McReport mc_test_size(const SimSpec& raw, IntermediateK k, TestKind which, std::size_t reps, std::size_t station,
                      double level) {
  SimSpec spec = raw;
  spec.normalize();
  if (reps == 0) throw SpecError(kModule, "need at least one replication");
  if (which == TestKind::kTime && station >= spec.m) {
    throw RangeError(kModule, fmt::format("station {} out of range (m = {})", station + 1, spec.m));
  }
  std::vector<int> outcome(reps, -1);
  std::vector<std::string> errors(reps);
  parallel_for(reps, [&](std::size_t r) {
    try {
      const PanelSample panel = simulate_panel(spec, r);
      const TestResult t = which == TestKind::kSpace ? space_test(panel, k) : time_test(panel, k, station);
      outcome[r] = t.p_value < level ? 1 : 0;
    } catch (const std::exception& e) {
      errors[r] = fmt::format("replication {}: {}", r, e.what());
    }
  });

  McReport report;
  report.replications = reps;
  std::size_t rejections = 0;
  for (int o : outcome) {
    if (o < 0) ++report.skipped;
    if (o == 1) ++rejections;
  }
  const std::size_t used = report.used();
  report.degenerate = used < 2;
  if (used > 0) {
    const double p = static_cast<double>(rejections) / static_cast<double>(used);
    report.rejection_rate = p;
    report.monte_carlo_se = report.degenerate ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(used));
  }
  keep_errors(errors, report.errors);
  return report;
}

CovarianceReport mc_covariance_check(const SimSpec& raw, IntermediateK k, const std::vector<CovarianceQuery>& queries,
                                     std::size_t reps) {
  SimSpec spec = raw;
  spec.normalize();
  if (reps < 2) throw SpecError(kModule, "covariance check needs at least two replications");
  const double big_n = static_cast<double>(spec.n * spec.m);
  const double kd = static_cast<double>(k.value);
  for (const auto& q : queries) {
    if (q.station1 >= spec.m || q.station2 >= spec.m) throw RangeError(kModule, "query station out of range");
    if (!(q.t > 0.0 && q.t <= 1.0)) throw RangeError(kModule, fmt::format("t = {} outside (0, 1]", q.t));
    for (double s : {q.s1, q.s2}) {
      if (!(s > 0.0) || s * kd / big_n > spec.tail_level) {
        throw SpecError(kModule, fmt::format("s k / N = {} must lie in (0, tail level]", s * kd / big_n),
                        "lower k or s");
      }
    }
  }

  // Per query: oracle values for both stations, then self-normalized values.
  const std::size_t nq = queries.size();
  std::vector<std::vector<double>> oracle1(reps, std::vector<double>(nq)), oracle2 = oracle1;
  std::vector<std::vector<double>> self1 = oracle1, self2 = oracle1;

  auto oracle_value = [&](const PanelSample& panel, std::size_t j, double s, double t) {
    const double p = s * kd / big_n;
    const double u = gp_tail_quantile(spec.gamma, p);
    const std::size_t upto = std::min(panel.rows(), detail::guarded_floor(static_cast<double>(spec.n) * t));
    double sum = 0.0;
    for (std::size_t i = 0; i < upto; ++i) {
      const double c = spec.c(static_cast<double>(i + 1) / static_cast<double>(spec.n), j);
      sum += (panel.value(i, j) > u ? 1.0 : 0.0) - c * p;
    }
    return sum / std::sqrt(kd);
  };

  parallel_for(reps, [&](std::size_t r) {
    const PanelSample panel = simulate_panel(spec, r);
    const auto pooled = pool(panel);
    const auto sced = scedasis_all(panel, pooled, k);
    for (std::size_t q = 0; q < nq; ++q) {
      const auto& qq = queries[q];
      oracle1[r][q] = oracle_value(panel, qq.station1, qq.s1, qq.t);
      oracle2[r][q] = oracle_value(panel, qq.station2, qq.s2, qq.t);
      self1[r][q] = std::sqrt(kd) * (sced.curves[qq.station1](qq.t) - spec.integrated(qq.station1, qq.t));
      self2[r][q] = std::sqrt(kd) * (sced.curves[qq.station2](qq.t) - spec.integrated(qq.station2, qq.t));
    }
  });

  CovarianceReport report;
  report.replications = reps;
  for (std::size_t q = 0; q < nq; ++q) {
    const auto& qq = queries[q];
    std::vector<double> a(reps), b(reps), sa(reps), sb(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      a[r] = oracle1[r][q];
      b[r] = oracle2[r][q];
      sa[r] = self1[r][q];
      sb[r] = self2[r][q];
    }
    CovarianceEntry entry{qq};
    entry.analytic = spec_sigma(spec, qq.station1, qq.station2, qq.s1, qq.s2, qq.t, qq.t);
    std::tie(entry.empirical, entry.monte_carlo_se) = covariance_with_se(a, b);
    report.oracle.push_back(entry);

    if (qq.s1 == 1.0 && qq.s2 == 1.0) {
      const std::size_t ja = qq.station1, jb = qq.station2;
      const double t = qq.t;
      double row_a = 0.0, col_b = 0.0, total = 0.0;
      for (std::size_t x = 0; x < spec.m; ++x) {
        row_a += spec_sigma(spec, ja, x, 1.0, 1.0, t, 1.0);
        col_b += spec_sigma(spec, x, jb, 1.0, 1.0, 1.0, t);
        for (std::size_t y = 0; y < spec.m; ++y) total += spec_sigma(spec, x, y, 1.0, 1.0, 1.0, 1.0);
      }
      const double ca = spec.integrated(ja, t), cb = spec.integrated(jb, t);
      CovarianceEntry self{qq};
      self.analytic = spec_sigma(spec, ja, jb, 1.0, 1.0, t, t) - cb * row_a - ca * col_b + ca * cb * total;
      std::tie(self.empirical, self.monte_carlo_se) = covariance_with_se(sa, sb);
      report.self_normalized.push_back(self);
    }
  }
  return report;
}

MleVarianceReport mc_mle_variance(const SimSpec& raw, IntermediateK k, std::size_t reps) {
  SimSpec spec = raw;
  spec.normalize();
  for (const auto& f : spec.scedasis) {
    if (f.slope != 0.0) throw SpecError(kModule, "the MLE variance check needs constant scedasis");
  }
  if (reps < 2) throw SpecError(kModule, "the MLE variance check needs at least two replications");
  const double kd = static_cast<double>(k.value);
  const double a0 = std::pow(static_cast<double>(spec.n * spec.m) / kd, spec.gamma);

  std::vector<double> gammas(reps, NAN), scales(reps, NAN);
  std::vector<std::string> errors(reps);
  parallel_for(reps, [&](std::size_t r) {
    try {
      const GpFit fit = fit_gp_pml(simulate_panel(spec, r), k);
      gammas[r] = fit.gamma_hat;
      scales[r] = fit.scale_hat / a0 - 1.0;
    } catch (const std::exception& e) {
      errors[r] = fmt::format("replication {}: {}", r, e.what());
    }
  });

  MleVarianceReport report;
  report.replications = reps;
  std::vector<double> g, s;
  for (std::size_t r = 0; r < reps; ++r) {
    if (std::isnan(gammas[r])) {
      ++report.skipped;
      continue;
    }
    g.push_back(gammas[r]);
    s.push_back(scales[r]);
  }
  keep_errors(errors, report.errors);
  if (g.size() < 2) return report;
  report.mean_gamma = mean_of(g);
  report.bias_gamma = report.mean_gamma - spec.gamma;
  report.k_var_gamma = kd * covariance_with_se(g, g).first;
  report.k_var_scale = kd * covariance_with_se(s, s).first;
  report.k_cov = kd * covariance_with_se(g, s).first;

  GpFit truth;
  truth.gamma_hat = spec.gamma;
  truth.scale_hat = a0;
  truth.k = k.value;
  std::vector<double> c1(spec.m);
  for (std::size_t j = 0; j < spec.m; ++j) c1[j] = spec.integrated(j, 1.0);
  report.predicted = mle_asymptotic_cov(truth, c1, spec_r_lookup(spec)).matrix;
  return report;
}

}  // namespace scedex
