// Sandwich covariance of the pooled GP pseudo-MLE.
//
// The limiting score is U = (U^1_1..U^1_m, U^2_1..U^2_m) with
//   U^a_i = int_0^1 phi_a(s) W_i(s, C_i(1)) ds - kappa_a W_i(1, C_i(1)),
// so every entry of Cov(U) is a linear functional of r_ij(s, t) = E W_i(s) W_j(t):
//   int int phi_a(s) phi_b(t) r(s,t) - kappa_b int phi_a(s) r(s,1)
//     - kappa_a int phi_b(t) r(1,t) + kappa_a kappa_b r(1,1).
// For i == j, r_ii(s,t) = C_i(1) min(s,t) and the functional has closed forms.

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "scedex/error.hpp"
#include "scedex/gp_mle.hpp"
#include "scedex/scedasis.hpp"

namespace scedex {

namespace {

constexpr const char* kModule = "gp_mle";
using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;

struct Weights {
  double gamma;

  // f(s) / gamma with f(s) = 1/s - (1+gamma) s^(gamma-1).
  double phi1(double s) const {
    const double ls = std::log(s);
    const double em1 = gamma == 0.0 ? ls : std::expm1(gamma * ls) / gamma;
    return -(em1 + std::exp(gamma * ls)) / s;
  }
  double phi2(double s) const { return (1.0 + gamma) * std::pow(s, gamma - 1.0); }
  double phi(int a, double s) const { return a == 0 ? phi1(s) : phi2(s); }

  // int_0^1 g(s)/gamma ds and (1+gamma) int_0^1 s^(2 gamma) ds.
  double kappa(int a) const {
    return a == 0 ? -gamma / ((1.0 + gamma) * (1.0 + 2.0 * gamma)) : (1.0 + gamma) / (1.0 + 2.0 * gamma);
  }

  // Cov(U^a_i, U^b_i) / C_i(1).
  double same_station(int a, int b) const {
    const double g1 = 1.0 + gamma, g2 = 1.0 + 2.0 * gamma;
    if (a == 0 && b == 0) return (2.0 + 6.0 * gamma + 5.0 * gamma * gamma) / (g1 * g1 * g2 * g2);
    if (a == 1 && b == 1) return (g1 / g2) * (g1 / g2);
    return g1 / (g2 * g2);
  }

  // Substitution s = u^q. The surface integrand behaves like s^(2 gamma) near
  // zero; q (1 + 2 gamma) = 2 makes it vanish linearly in u.
  double exponent() const { return 2.0 / (1.0 + 2.0 * std::min(gamma, 0.0)); }
};

void check_inputs(double gamma, std::span<const double> c1) {
  if (!(gamma > -0.5)) throw DomainError(kModule, fmt::format("sandwich covariance needs gamma > -1/2, got {}", gamma));
  if (c1.empty()) throw DomainError(kModule, "no stations");
  for (double c : c1) {
    if (!(c >= 0.0 && c <= 1.0)) throw DomainError(kModule, fmt::format("C_j(1) = {} outside [0, 1]", c));
  }
}

SigmaGamma assemble(const Weights& w, std::span<const double> c1, Eigen::MatrixXd tau, double error) {
  const auto m = static_cast<Eigen::Index>(c1.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) tau(a * m + i, b * m + i) = w.same_station(a, b) * c1[static_cast<std::size_t>(i)];
    }
  }
  Eigen::MatrixXd block_sum = Eigen::MatrixXd::Zero(2, 2 * m);
  block_sum.block(0, 0, 1, m).setOnes();
  block_sum.block(1, m, 1, m).setOnes();
  SigmaGamma out;
  out.sigma = block_sum * tau * block_sum.transpose();
  out.tau = std::move(tau);
  out.quadrature_error = error;
  return out;
}

// Nodes and weights in s. Gauss-Legendre in u = s^(1/q) on dyadic panels
// [2^-(l+1), 2^-l] of the u-range, each cut into `split` equal pieces, so the
// endpoint behaviour at zero is resolved geometrically.
using Rule = std::vector<std::pair<double, double>>;
// Below u = 1e-8 the neglected mass is O(u^2) by the choice of q.
constexpr double kSmallestU = 1e-8;

void add_gauss(Rule& rule, double lo, double hi, auto&& map) {
  using Gauss = boost::math::quadrature::gauss<double, 20>;
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  for (std::size_t k = 0; k < Gauss::abscissa().size(); ++k) {
    for (double sign : {-1.0, 1.0}) {
      const auto [s, jac] = map(mid + sign * half * Gauss::abscissa()[k]);
      rule.emplace_back(s, half * Gauss::weights()[k] * jac);
    }
  }
}

// Rule on [bottom, top] with the substitution s = u^q; the dyadic panels
// shrink toward zero and are clipped at bottom.
Rule graded_rule(double bottom, double top, double q, int split) {
  Rule rule;
  const double u_top = std::pow(top, 1.0 / q), u_bottom = std::pow(bottom, 1.0 / q);
  auto map = [q](double u) { return std::pair{std::pow(u, q), q * std::pow(u, q - 1.0)}; };
  for (int level = 0;; ++level) {
    const double hi = u_top * std::ldexp(1.0, -level);
    if (hi <= u_bottom || hi < kSmallestU) break;
    const double lo = std::max(0.5 * hi, u_bottom);
    const double width = (hi - lo) / split;
    for (int p = 0; p < split; ++p) add_gauss(rule, lo + p * width, lo + (p + 1) * width, map);
  }
  return rule;
}

}  // namespace

SigmaGamma sigma_gamma0(double gamma, std::span<const double> c1, const RLookup& r, const QuadratureOptions& options) {
  check_inputs(gamma, c1);
  const Weights w{gamma};
  const double q = w.exponent();
  const std::size_t m = c1.size();
  const auto M = static_cast<Eigen::Index>(m);

  // Cross blocks of tau for the pair (i, j) with `split` Gauss panels per dyadic level.
  auto cross_blocks = [&](std::size_t i, std::size_t j, int split) {
    Eigen::Matrix2d out;
    const Rule outer = graded_rule(0.0, 1.0, q, split);
    const double r11 = r(i, j, 1.0, 1.0);
    double line_s[2] = {0.0, 0.0}, line_t[2] = {0.0, 0.0};
    Eigen::Matrix2d surface = Eigen::Matrix2d::Zero();
    for (const auto& [s, ws] : outer) {
      const double rs1 = r(i, j, s, 1.0), r1s = r(i, j, 1.0, s);
      double inner[2] = {0.0, 0.0};
      // Tail copulas are typically kinked on the diagonal, so [0, s] and [s, 1] are separate rules.
      for (const auto& [t, wt] : graded_rule(0.0, s, q, split)) {
        const double v = wt * r(i, j, s, t);
        inner[0] += v * w.phi1(t);
        inner[1] += v * w.phi2(t);
      }
      for (const auto& [t, wt] : graded_rule(s, 1.0, q, split)) {
        const double v = wt * r(i, j, s, t);
        inner[0] += v * w.phi1(t);
        inner[1] += v * w.phi2(t);
      }
      for (int a = 0; a < 2; ++a) {
        const double pa = ws * w.phi(a, s);
        line_s[a] += pa * rs1;
        line_t[a] += pa * r1s;
        for (int b = 0; b < 2; ++b) surface(a, b) += pa * inner[b];
      }
    }
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        out(a, b) = surface(a, b) - w.kappa(b) * line_s[a] - w.kappa(a) * line_t[b] + w.kappa(a) * w.kappa(b) * r11;
      }
    }
    return out;
  };

  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(2 * M, 2 * M);
  double total_error = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      // Refine until two successive rules agree; their difference is the error estimate.
      Eigen::Matrix2d coarse = cross_blocks(i, j, 1);
      Eigen::Matrix2d fine = coarse;
      double error = 0.0;
      for (int split = 2; split <= (1 << options.max_refinements); split *= 2) {
        fine = cross_blocks(i, j, split);
        error = (fine - coarse).cwiseAbs().maxCoeff();
        if (error <= 0.1 * options.tolerance) break;
        coarse = fine;
      }
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          tau(a * M + static_cast<Eigen::Index>(i), b * M + static_cast<Eigen::Index>(j)) = fine(a, b);
        }
      }
      total_error += error;
    }
  }
  if (!(total_error <= options.tolerance)) {
    throw QuadratureError(kModule,
                          fmt::format("cross-station quadrature error estimate {:.3g} exceeds {:.3g}", total_error,
                                      options.tolerance),
                          "raise the refinement limit or smooth r");
  }
  return assemble(w, c1, std::move(tau), total_error);
}

SigmaGamma sigma_gamma0(double gamma, std::span<const double> c1, const TailCopulaGrid& grid,
                        const QuadratureOptions& options) {
  check_inputs(gamma, c1);
  if (grid.stations() != c1.size()) throw DomainError(kModule, "grid and C_j(1) sizes differ");
  const Weights w{gamma};
  const double q = w.exponent();

  // Extended nodes z_0 = 0 < z_1 < ... < z_G = 1.
  std::vector<double> z(grid.nodes().size() + 1, 0.0);
  std::copy(grid.nodes().begin(), grid.nodes().end(), z.begin() + 1);
  const std::size_t G = grid.nodes().size();
  const auto dim = static_cast<Eigen::Index>(G + 1);

  // Hat-function moments int phi_a(s) h_p(s) ds.
  Eigen::MatrixXd moments = Eigen::MatrixXd::Zero(2, dim);
  Eigen::MatrixXd moment_err = Eigen::MatrixXd::Zero(2, dim);
  const double rel = std::max(1e-13, options.tolerance * 1e-4);
  for (int a = 0; a < 2; ++a) {
    for (std::size_t cell = 0; cell < G; ++cell) {
      const double lo = z[cell], hi = z[cell + 1], width = hi - lo;
      // Rising part of hat (cell+1) and falling part of hat (cell) on [lo, hi].
      for (int rising = 0; rising < 2; ++rising) {
        auto weight = [&](double s) { return rising ? (s - lo) / width : (hi - s) / width; };
        if (!rising && cell == 0) continue;  // hat 0 carries r = 0
        double err = 0.0;
        double v = 0.0;
        if (cell == 0) {
          v = Kronrod::integrate(
              [&](double u) {
                if (u <= 0.0) return 0.0;
                const double s = hi * std::pow(u, q);
                return w.phi(a, s) * weight(s) * q * s / u;
              },
              0.0, 1.0, options.max_depth, rel, &err);
        } else {
          v = Kronrod::integrate([&](double s) { return w.phi(a, s) * weight(s); }, lo, hi, options.max_depth, rel,
                                 &err);
        }
        const auto p = static_cast<Eigen::Index>(rising ? cell + 1 : cell);
        moments(a, p) += v;
        moment_err(a, p) += err;
      }
    }
  }

  const std::size_t m = c1.size();
  const auto M = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(2 * M, 2 * M);
  double total_error = 0.0;
  const auto last = static_cast<Eigen::Index>(G);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const Eigen::MatrixXd R = grid.node_values(i, j);
      const double rmax = R.cwiseAbs().maxCoeff();
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const Eigen::RowVectorXd ma = moments.row(a);
          const Eigen::RowVectorXd mb = moments.row(b);
          const double surface = ma * R * mb.transpose();
          const double line_s = ma.dot(R.col(last));
          const double line_t = mb.dot(R.row(last));
          tau(a * M + static_cast<Eigen::Index>(i), b * M + static_cast<Eigen::Index>(j)) =
              surface - w.kappa(b) * line_s - w.kappa(a) * line_t + w.kappa(a) * w.kappa(b) * R(last, last);
          total_error += rmax * (moment_err.row(a).sum() * (mb.cwiseAbs().sum() + std::abs(w.kappa(b))) +
                                 moment_err.row(b).sum() * (ma.cwiseAbs().sum() + std::abs(w.kappa(a))));
        }
      }
    }
  }
  if (!(total_error <= options.tolerance)) {
    throw QuadratureError(kModule,
                          fmt::format("hat-moment quadrature error estimate {:.3g} exceeds {:.3g}", total_error,
                                      options.tolerance));
  }
  return assemble(w, c1, std::move(tau), total_error);
}

namespace {
AsymptoticCov sandwich(const GpFit& fit, const SigmaGamma& sg) {
  AsymptoticCov out;
  out.fisher = fisher_info(fit.gamma_hat);
  const Eigen::Matrix2d inv = fisher_info_inverse(fit.gamma_hat);
  out.sigma = sg.sigma;
  out.matrix = inv * sg.sigma * inv.transpose();
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  out.quadrature_error = sg.quadrature_error;
  out.k = fit.k;
  return out;
}
}  // namespace

AsymptoticCov mle_asymptotic_cov(const GpFit& fit, std::span<const double> c1, const RLookup& r,
                                 const QuadratureOptions& options) {
  return sandwich(fit, sigma_gamma0(fit.gamma_hat, c1, r, options));
}

AsymptoticCov mle_asymptotic_cov(const GpFit& fit, const PanelSample& panel, std::size_t grid_nodes,
                                 const QuadratureOptions& options) {
  const auto pooled = pool(panel);
  const IntermediateK k{fit.k};
  const auto sced = scedasis_all(panel, pooled, k, {.renormalize_ties = true});
  const auto c1 = sced.c1_values();
  const TailCopulaGrid grid(panel, pooled, k, grid_nodes);
  return sandwich(fit, sigma_gamma0(fit.gamma_hat, c1, grid, options));
}

}  // namespace scedex
