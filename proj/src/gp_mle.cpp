#include "scedex/gp_mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "scedex/error.hpp"
#include "scedex/parallel.hpp"
#include "scedex/scedasis.hpp"

namespace scedex {

namespace {

constexpr const char* kModule = "gp_mle";

// Mean log-likelihood with gradient and Hessian in theta = (gamma, log sigma).
struct Evaluation {
  bool feasible = false;
  double loglik = 0.0;
  Eigen::Vector2d score = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
};

Evaluation evaluate(double gamma, double log_sigma, std::span<const double> x, bool derivatives = true) {
  Evaluation ev;
  const double sigma = std::exp(log_sigma);
  const bool taylor = std::abs(gamma) < kGammaTaylorCutoff;
  double ll = 0.0, g_gamma = 0.0, g_tau = 0.0, h_gg = 0.0, h_gt = 0.0, h_tt = 0.0;
  for (double xi : x) {
    const double y = xi / sigma;
    const double z = 1.0 + gamma * y;
    if (!(z > 0.0)) return ev;
    const double inv_z = 1.0 / z;
    if (taylor) {
      const double y2 = y * y, y3 = y2 * y;
      ll -= y + gamma * (y - 0.5 * y2) + gamma * gamma * (y3 / 3.0 - 0.5 * y2);
      if (derivatives) {
        g_gamma += 0.5 * y2 - y + gamma * (y2 - 2.0 * y3 / 3.0);
        h_gg += y2 - 2.0 * y3 / 3.0;
      }
    } else {
      const double lz = std::log1p(gamma * y);
      ll -= (1.0 + 1.0 / gamma) * lz;
      if (derivatives) {
        g_gamma += lz / (gamma * gamma) - (1.0 + 1.0 / gamma) * y * inv_z;
        h_gg += -2.0 * lz / (gamma * gamma * gamma) + 2.0 * y * inv_z / (gamma * gamma) +
                (1.0 + 1.0 / gamma) * y * y * inv_z * inv_z;
      }
    }
    if (derivatives) {
      g_tau += -1.0 + (1.0 + gamma) * y * inv_z;
      h_gt += y * (1.0 - y) * inv_z * inv_z;
      h_tt += -(1.0 + gamma) * y * inv_z * inv_z;
    }
  }
  const double n = static_cast<double>(x.size());
  ev.feasible = true;
  ev.loglik = ll / n - log_sigma;
  ev.score << g_gamma / n, g_tau / n;
  ev.hessian << h_gg / n, h_gt / n, h_gt / n, h_tt / n;
  return ev;
}

bool in_bounds(double gamma) { return gamma >= kGammaLowerBound && gamma <= kGammaUpperBound; }

// Newton direction for maximisation; shifts the Hessian when it is not
// negative definite.
Eigen::Vector2d ascent_direction(const Evaluation& ev) {
  const Eigen::Matrix2d neg = -ev.hessian;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(neg);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  Eigen::Matrix2d a = neg;
  if (!(lo > 1e-10 * std::max(1.0, hi))) a += Eigen::Matrix2d::Identity() * (std::abs(lo) + 1e-3 * std::max(1.0, hi));
  return a.ldlt().solve(ev.score);
}

struct NewtonOutcome {
  double gamma;
  double log_sigma;
  Evaluation ev;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> trace;
};

NewtonOutcome newton(double gamma, double log_sigma, std::span<const double> x, const GpFitOptions& opt) {
  NewtonOutcome out{gamma, log_sigma, evaluate(gamma, log_sigma, x), 0, false, {}};
  if (!out.ev.feasible) return out;
  int polish = 0;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    out.iterations = iter + 1;
    const double score_norm = out.ev.score.norm();
    if (out.trace.size() < 8 || iter % 10 == 0) {
      out.trace.push_back(fmt::format("it {}: gamma={:.6g} sigma={:.6g} |score|={:.3g}", iter, out.gamma,
                                      std::exp(out.log_sigma), score_norm));
    }
    if (score_norm < opt.score_tolerance) {
      out.converged = true;
      if (polish++ >= 3) break;
    }
    const Eigen::Vector2d dir = ascent_direction(out.ev);
    bool moved = false;
    for (double step = 1.0; step > 1e-12; step *= 0.5) {
      const double g = out.gamma + step * dir(0);
      const double ls = out.log_sigma + step * dir(1);
      if (!in_bounds(g)) continue;
      const Evaluation cand = evaluate(g, ls, x);
      if (!cand.feasible) continue;
      const double slack = 1e-13 * (1.0 + std::abs(out.ev.loglik));
      if (cand.loglik < out.ev.loglik - slack) continue;
      if (out.converged && cand.score.norm() > opt.score_tolerance) continue;
      const bool tiny = std::abs(g - out.gamma) + std::abs(ls - out.log_sigma) < 1e-15;
      out.gamma = g;
      out.log_sigma = ls;
      out.ev = cand;
      moved = !tiny;
      break;
    }
    if (!moved) break;
  }
  out.converged = out.ev.score.norm() < opt.score_tolerance;
  return out;
}

// sigma maximising the likelihood for fixed gamma: root of mean((1+g) x / (sigma + g x)) = 1.
double profile_log_sigma(double gamma, std::span<const double> x, double x_max, double x_mean) {
  auto h = [&](double sigma) {
    double acc = 0.0;
    for (double xi : x) acc += (1.0 + gamma) * xi / (sigma + gamma * xi);
    return acc / static_cast<double>(x.size()) - 1.0;
  };
  double lo = gamma < 0.0 ? -gamma * x_max : 0.0;
  lo = lo > 0.0 ? lo * (1.0 + 1e-12) + 1e-300 : x_mean * 1e-12;
  double hi = std::max(x_mean, lo) * 2.0 + 1e-300;
  int guard = 0;
  while (h(hi) > 0.0 && guard++ < 200) hi *= 2.0;
  if (h(lo) <= 0.0) return std::log(lo);
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(h, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return std::log(0.5 * (a + b));
}

double hill_start(std::vector<double> x) {
  std::sort(x.begin(), x.end(), std::greater<>());
  const std::size_t q = std::max<std::size_t>(2, x.size() / 4);
  if (q >= x.size() || !(x[q] > 0.0)) return 0.1;
  double acc = 0.0;
  for (std::size_t i = 0; i < q; ++i) acc += std::log(x[i] / x[q]);
  return std::clamp(acc / static_cast<double>(q), -0.4, 1.0);
}

}  // namespace

double gp_loglik(double gamma, double sigma, std::span<const double> excesses) {
  if (!(sigma > 0.0)) throw DomainError(kModule, "sigma must be positive");
  double total = 0.0;
  const bool taylor = std::abs(gamma) < kGammaTaylorCutoff;
  for (std::size_t i = 0; i < excesses.size(); ++i) {
    const double x = excesses[i];
    const double y = x / sigma;
    const double z = 1.0 + gamma * y;
    if (!(x > 0.0) || !(z > 0.0)) {
      throw DomainError(kModule, fmt::format("excess #{} = {} outside the GP support (1 + gamma x / sigma = {})",
                                             i + 1, x, z));
    }
    if (taylor) {
      total += -std::log(sigma) - (y + gamma * (y - 0.5 * y * y) + gamma * gamma * (y * y * y / 3.0 - 0.5 * y * y));
    } else {
      total += -std::log(sigma) - (1.0 + 1.0 / gamma) * std::log1p(gamma * y);
    }
  }
  return total;
}

GpFit fit_gp_excesses(std::span<const double> excesses, const GpFitOptions& options) {
  if (excesses.size() < 10) {
    throw InsufficientDataError(kModule, fmt::format("{} positive excesses; at least 10 are needed", excesses.size()),
                                "increase k");
  }
  for (double x : excesses) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(kModule, "excesses must be positive and finite");
  }
  const double x_max = *std::max_element(excesses.begin(), excesses.end());
  const double x_mean = std::accumulate(excesses.begin(), excesses.end(), 0.0) / static_cast<double>(excesses.size());

  double gamma0 = hill_start({excesses.begin(), excesses.end()});
  double log_sigma0 = std::log(x_mean);
  if (gamma0 < 0.0 && !(std::exp(log_sigma0) > -gamma0 * x_max)) gamma0 = 0.0;

  NewtonOutcome best = newton(gamma0, log_sigma0, excesses, options);
  std::vector<std::string> trace = best.trace;
  if (!best.converged) {
    // Profile likelihood over gamma, then polish with Newton.
    auto neg_profile = [&](double g) {
      const double ls = profile_log_sigma(g, excesses, x_max, x_mean);
      const auto ev = evaluate(g, ls, excesses, false);
      return ev.feasible ? -ev.loglik : std::numeric_limits<double>::infinity();
    };
    std::uintmax_t iters = 500;
    const auto [g_star, value] =
        boost::math::tools::brent_find_minima(neg_profile, kGammaLowerBound, kGammaUpperBound, 50, iters);
    (void)value;
    const double ls_star = profile_log_sigma(g_star, excesses, x_max, x_mean);
    trace.push_back(fmt::format("profile search: gamma={:.6g} sigma={:.6g}", g_star, std::exp(ls_star)));
    NewtonOutcome polished = newton(g_star, ls_star, excesses, options);
    trace.insert(trace.end(), polished.trace.begin(), polished.trace.end());
    if (polished.ev.feasible) best = polished;
    if (!best.ev.feasible) {
      best.gamma = g_star;
      best.log_sigma = ls_star;
      best.ev = evaluate(g_star, ls_star, excesses);
    }
  }

  GpFit fit;
  fit.gamma_hat = best.gamma;
  fit.scale_hat = std::exp(best.log_sigma);
  fit.k = excesses.size();
  fit.excess_count = excesses.size();
  fit.loglik = best.ev.loglik * static_cast<double>(excesses.size());
  fit.iterations = best.iterations;
  fit.score_norm = best.ev.score.norm();
  fit.converged = best.converged && best.ev.feasible;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(best.ev.hessian);
  fit.hessian_negative_definite = eig.eigenvalues().maxCoeff() < 0.0;

  if (!fit.converged && options.throw_on_failure) {
    std::ostringstream msg;
    const bool at_bound = fit.gamma_hat <= kGammaLowerBound + 1e-9 || fit.gamma_hat >= kGammaUpperBound - 1e-9;
    msg << "GP pseudo-likelihood did not converge (|score| = " << fit.score_norm << ", gamma = " << fit.gamma_hat
        << (at_bound ? ", on the parameter bound" : "") << ")";
    for (const auto& line : trace) msg << "\n  " << line;
    throw ConvergenceError(kModule, msg.str(),
                           at_bound ? "the excesses are degenerate or gamma <= -1/2; try another k"
                                    : "try another k");
  }
  return fit;
}

std::vector<double> threshold_excesses(const PooledOrderStatistics& pooled, IntermediateK k,
                                       std::size_t* dropped_ties) {
  const double threshold = global_threshold(pooled, k);
  std::vector<double> out;
  out.reserve(k.value);
  std::size_t ties = 0;
  const std::size_t n = pooled.n_effective();
  for (std::size_t i = 1; i <= k.value; ++i) {
    const double excess = pooled.sorted_values[n - i] - threshold;
    if (excess > 0.0) {
      out.push_back(excess);
    } else {
      ++ties;
    }
  }
  if (dropped_ties) *dropped_ties = ties;
  return out;
}

GpFit fit_gp_pml(const PooledOrderStatistics& pooled, IntermediateK k, const GpFitOptions& options) {
  if (k.value < 10) throw InsufficientDataError(kModule, fmt::format("k = {} < 10", k.value), "use k >= 10");
  std::size_t ties = 0;
  const auto excesses = threshold_excesses(pooled, k, &ties);
  GpFit fit = fit_gp_excesses(excesses, options);
  fit.k = k.value;
  fit.dropped_ties = ties;
  return fit;
}

GpFit fit_gp_pml(const PanelSample& panel, IntermediateK k, const GpFitOptions& options) {
  return fit_gp_pml(pool(panel), k, options);
}

Eigen::Matrix2d fisher_info(double gamma) {
  if (!(gamma > -0.5)) throw DomainError(kModule, fmt::format("Fisher information needs gamma > -1/2, got {}", gamma));
  const double q = 1.0 + 3.0 * gamma + 2.0 * gamma * gamma;
  Eigen::Matrix2d I;
  I << 2.0 / q, 1.0 / q, 1.0 / q, 1.0 / (1.0 + 2.0 * gamma);
  return I;
}

Eigen::Matrix2d fisher_info_inverse(double gamma) {
  if (!(gamma > -0.5)) throw DomainError(kModule, fmt::format("Fisher information needs gamma > -1/2, got {}", gamma));
  const double g1 = 1.0 + gamma;
  Eigen::Matrix2d inv;
  inv << g1 * g1, -g1, -g1, 2.0 * g1;
  return inv;
}

double AsymptoticCov::se_gamma() const { return std::sqrt(matrix(0, 0) / static_cast<double>(k)); }
double AsymptoticCov::se_scale_ratio() const { return std::sqrt(matrix(1, 1) / static_cast<double>(k)); }

std::vector<GammaPathRow> gamma_path(const PanelSample& panel, std::span<const std::size_t> k_values,
                                     bool with_standard_errors) {
  const auto pooled = pool(panel);
  std::vector<GammaPathRow> rows(k_values.size());
  parallel_for(k_values.size(), [&](std::size_t idx) {
    auto& row = rows[idx];
    row.k = k_values[idx];
    try {
      const auto fit = fit_gp_pml(pooled, IntermediateK{row.k});
      row.gamma_hat = fit.gamma_hat;
      row.scale_hat = fit.scale_hat;
      row.se_gamma = std::numeric_limits<double>::quiet_NaN();
      if (with_standard_errors) row.se_gamma = mle_asymptotic_cov(fit, panel).se_gamma();
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace scedex
