// Panel simulator with exact generalized Pareto tails.
//
// Row i draws V_{i,1..m} from the chosen copula (small V means extreme) and
// sets X = F_0^{-1}(1 - V / c(i/n, j)) while V <= c v*, so that
// P(X_ij > x) = c(i/n, j) (1 - F_0(x)) exactly above x* = F_0^{-1}(1 - v*).
// Larger V map linearly onto [0, x*).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "scedex/error.hpp"
#include "scedex/mc.hpp"

namespace scedex {

namespace {

constexpr const char* kModule = "mc";

// One engine per replication; seeded from (seed, rep) so replications can run
// in any order on any thread.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t rep) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32), 0x5ced'a515u};
    engine_.seed(seq);
  }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double exponential() { return -std::log(uniform()); }

  // Positive stable S with E exp(-t S) = exp(-t^alpha).
  double positive_stable(double alpha) {
    if (alpha >= 1.0) return 1.0;
    const double u = std::numbers::pi * uniform();
    const double w = exponential();
    return std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha) *
           std::pow(std::sin((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

double gp_tail_quantile(double gamma, double p) {
  const double lp = std::log(p);
  return std::abs(gamma) < 1e-12 ? -lp : std::expm1(-gamma * lp) / gamma;
}

double SimSpec::c(double u, std::size_t station) const {
  return scedasis.empty() ? 1.0 : scedasis[station](u);
}

double SimSpec::integrated(std::size_t station, double t) const {
  const LinearScedasis f = scedasis.empty() ? LinearScedasis{} : scedasis[station];
  return (f.intercept * t + 0.5 * f.slope * t * t) / static_cast<double>(m);
}

double SimSpec::mean_integral() const {
  if (scedasis.empty()) return 1.0;
  double total = 0.0;
  for (const auto& f : scedasis) total += f.integral();
  return total / static_cast<double>(scedasis.size());
}

void SimSpec::normalize() {
  if (n < 1 || m < 1) throw SpecError(kModule, fmt::format("need n >= 1 and m >= 1, got n = {}, m = {}", n, m));
  if (!(gamma > -0.5 && gamma <= 10.0)) {
    throw SpecError(kModule, fmt::format("gamma = {} outside (-1/2, 10]", gamma));
  }
  if (!(tail_level > 0.0 && tail_level < 1.0)) {
    throw SpecError(kModule, fmt::format("tail level {} outside (0, 1)", tail_level));
  }
  if (dependence.kind == DependenceKind::kLogistic && !(dependence.alpha > 0.0 && dependence.alpha <= 1.0)) {
    throw SpecError(kModule, fmt::format("logistic alpha = {} outside (0, 1]", dependence.alpha));
  }
  if (scedasis.empty()) scedasis.assign(m, LinearScedasis{});
  if (scedasis.size() != m) {
    throw SpecError(kModule, fmt::format("{} scedasis functions for {} stations", scedasis.size(), m));
  }
  for (std::size_t j = 0; j < m; ++j) {
    const auto& f = scedasis[j];
    // Linear, so the minimum over [0, 1] sits at an endpoint.
    if (!(f(0.0) > 0.0 && f(1.0) > 0.0) || !std::isfinite(f.slope)) {
      throw SpecError(kModule, fmt::format("scedasis of station {} is not positive on [0, 1]", j + 1),
                      "use an intercept and slope with c(0) > 0 and c(1) > 0");
    }
  }
  const double mean = mean_integral();
  for (auto& f : scedasis) {
    f.intercept /= mean;
    f.slope /= mean;
  }
  double peak = 0.0;
  for (const auto& f : scedasis) peak = std::max({peak, f(0.0), f(1.0)});
  if (peak * tail_level > 1.0) {
    throw SpecError(kModule, fmt::format("max c = {:.6g} times tail level {} exceeds 1", peak, tail_level),
                    "lower the tail level");
  }
}

PanelSample simulate_panel(SimSpec spec, std::uint64_t rep) {
  spec.normalize();
  const std::size_t n = spec.n, m = spec.m;
  const double v_star = spec.tail_level;
  const double x_star = gp_tail_quantile(spec.gamma, v_star);

  std::vector<Day> days(n);
  const Day first{std::chrono::year{2000} / 1 / 1};
  for (std::size_t i = 0; i < n; ++i) days[i] = first + std::chrono::days{static_cast<int>(i)};
  std::vector<std::string> ids(m);
  for (std::size_t j = 0; j < m; ++j) ids[j] = fmt::format("S{}", j + 1);

  std::vector<double> values(n * m);
  std::vector<double> v(m);
  Stream stream(spec.seed, rep);
  for (std::size_t i = 0; i < n; ++i) {
    switch (spec.dependence.kind) {
      case DependenceKind::kIndependent:
        for (auto& x : v) x = stream.uniform();
        break;
      case DependenceKind::kComonotone:
        std::fill(v.begin(), v.end(), stream.uniform());
        break;
      case DependenceKind::kLogistic: {
        const double alpha = spec.dependence.alpha;
        const double s = stream.positive_stable(alpha);
        for (auto& x : v) x = -std::expm1(-std::pow(stream.exponential() / s, alpha));
        break;
      }
    }
    const double u = static_cast<double>(i + 1) / static_cast<double>(n);
    for (std::size_t j = 0; j < m; ++j) {
      const double c = spec.c(u, j);
      const double vj = v[j];
      values[i * m + j] = vj <= c * v_star ? gp_tail_quantile(spec.gamma, vj / c)
                                            : x_star * (1.0 - vj) / (1.0 - c * v_star);
    }
  }
  return PanelSample(std::move(days), std::move(ids), std::move(values), std::vector<std::uint8_t>(n * m, 0));
}

double logistic_tail_copula(double alpha, double x, double y) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError(kModule, fmt::format("alpha = {} outside (0, 1]", alpha));
  if (!(x >= 0.0 && y >= 0.0)) throw DomainError(kModule, "tail copula arguments must be nonnegative");
  const double hi = std::max(x, y);
  if (hi == 0.0) return 0.0;
  const double lo = std::min(x, y);
  // (x^(1/a) + y^(1/a))^a = hi (1 + (lo/hi)^(1/a))^a, stable as alpha -> 0.
  return x + y - hi * std::pow(1.0 + std::pow(lo / hi, 1.0 / alpha), alpha);
}

double spec_tail_copula(const SimSpec& spec, std::size_t j1, std::size_t j2, double x, double y) {
  if (j1 == j2) return std::min(x, y);
  switch (spec.dependence.kind) {
    case DependenceKind::kIndependent:
      return 0.0;
    case DependenceKind::kComonotone:
      return std::min(x, y);
    case DependenceKind::kLogistic:
      return logistic_tail_copula(spec.dependence.alpha, x, y);
  }
  return 0.0;
}

double spec_sigma(const SimSpec& spec, std::size_t j1, std::size_t j2, double s1, double s2, double t1,
                  double t2) {
  const double upto = std::min(t1, t2);
  const double m = static_cast<double>(spec.m);
  if (upto <= 0.0) return 0.0;
  const LinearScedasis f1 = spec.scedasis.empty() ? LinearScedasis{} : spec.scedasis[j1];
  const LinearScedasis f2 = spec.scedasis.empty() ? LinearScedasis{} : spec.scedasis[j2];
  if (f1.slope == 0.0 && f2.slope == 0.0) {
    return upto * spec_tail_copula(spec, j1, j2, s1 * f1.intercept, s2 * f2.intercept) / m;
  }
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
      [&](double u) { return spec_tail_copula(spec, j1, j2, s1 * f1(u), s2 * f2(u)); }, 0.0, upto, 15, 1e-12,
      &error);
  return value / m;
}

RLookup spec_r_lookup(SimSpec spec) {
  spec.normalize();
  return [spec](std::size_t i, std::size_t j, double s, double t) { return spec_sigma(spec, i, j, s, t, 1.0, 1.0); };
}

}  // namespace scedex
