#include "sphar/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sphar/errors.hpp"

namespace sphar {
namespace {

struct Sums {
  double u, u1, u2, d, d1, d2;
};

Sums spectral_sums(const EmpiricalSpectra& s, double alpha, int max_order) {
  Sums r{s.u_hat(alpha, 0), 0.0, 0.0, s.d_hat(alpha, 0), 0.0, 0.0};
  if (max_order >= 1) {
    r.u1 = s.u_hat(alpha, 1);
    r.d1 = s.d_hat(alpha, 1);
  }
  if (max_order >= 2) {
    r.u2 = s.u_hat(alpha, 2);
    r.d2 = s.d_hat(alpha, 2);
  }
  if (r.d == 0.0) {
    throw DegeneratePanelError("panel has zero lag-0 power; G* and the reduced "
                               "objective are undefined");
  }
  return r;
}

double log_ratio(double num, double den) {
  return std::log(num / den);
}

}  // namespace

bool EstimationResult::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

nlohmann::json to_json(const EstimationResult& result) {
  nlohmann::json j = {{"alpha_hat", result.alpha_hat},
                      {"g_hat", result.g_hat},
                      {"objective", result.objective_at_opt},
                      {"evals", result.evals},
                      {"flags", result.flags}};
  j["std_error_alpha"] = result.std_error_alpha ? nlohmann::json(*result.std_error_alpha)
                                                : nlohmann::json(nullptr);
  if (result.reduced_curve) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& [a, v] : *result.reduced_curve) curve.push_back({a, v});
    j["curve"] = std::move(curve);
  }
  return j;
}

double objective_full(const CoefficientPanel& panel, double g, double alpha) {
  double sum = 0.0;
  for (int ell = 1; ell <= panel.L(); ++ell) {
    const double phi = g * std::exp(-alpha * std::log(static_cast<double>(ell)));
    for (int m = -ell; m <= ell; ++m) {
      const auto a = panel.track(ell, m);
      for (std::size_t t = 1; t < a.size(); ++t) {
        const double r = a[t] - phi * a[t - 1];
        sum += r * r;
      }
    }
  }
  return sum / panel.N();
}

double profile_g(const EmpiricalSpectra& spectra, double alpha) {
  const Sums s = spectral_sums(spectra, alpha, 0);
  return s.u / s.d;
}

double profile_g(const CoefficientPanel& panel, double alpha) {
  return profile_g(EmpiricalSpectra(panel), alpha);
}

double reduced_objective(const EmpiricalSpectra& spectra, double alpha) {
  const Sums s = spectral_sums(spectra, alpha, 0);
  return s.u * s.u / s.d;
}

double reduced_objective(const CoefficientPanel& panel, double alpha) {
  return reduced_objective(EmpiricalSpectra(panel), alpha);
}

std::optional<double> reduced_objective_log(const EmpiricalSpectra& spectra, double alpha) {
  const Sums s = spectral_sums(spectra, alpha, 0);
  if (!(s.u > 0.0)) return std::nullopt;
  return 2.0 * std::log(s.u) - std::log(s.d);
}

double score(const EmpiricalSpectra& spectra, double alpha) {
  const Sums s = spectral_sums(spectra, alpha, 1);
  return (-2.0 * s.u1 * s.u * s.d + s.d1 * s.u * s.u) / (s.d * s.d);
}

double score(const CoefficientPanel& panel, double alpha) {
  return score(EmpiricalSpectra(panel), alpha);
}

double information(const EmpiricalSpectra& spectra, double alpha) {
  const Sums s = spectral_sums(spectra, alpha, 2);
  const double num = 2.0 * s.u2 * s.u * s.d * s.d + 2.0 * s.u1 * s.u1 * s.d * s.d -
                     s.d2 * s.u * s.u * s.d - 4.0 * s.d1 * s.d * s.u1 * s.u +
                     2.0 * s.u * s.u * s.d1 * s.d1;
  return num / (s.d * s.d * s.d);
}

double information(const CoefficientPanel& panel, double alpha) {
  return information(EmpiricalSpectra(panel), alpha);
}

EstimationResult estimate(const EmpiricalSpectra& spectra, const ParamSpace& space,
                          const EstimateOptions& opts) {
  if (opts.grid_points < 33) throw DomainError("estimate: need at least 33 grid points");
  if (!(opts.refine_tol > 0.0)) throw DomainError("estimate: refine_tol must be > 0");

  EstimationResult result;
  const double a1 = space.a1();
  const double a2 = space.a2();
  auto f = [&](double alpha) {
    ++result.evals;
    return reduced_objective(spectra, alpha);
  };

  const int n = opts.grid_points;
  const double step = (a2 - a1) / (n - 1);
  std::vector<double> grid(static_cast<std::size_t>(n));
  std::vector<double> values(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    grid[i] = i == n - 1 ? a2 : a1 + i * step;
    values[i] = f(grid[i]);
  }
  if (opts.keep_curve) {
    std::vector<std::pair<double, double>> curve;
    curve.reserve(grid.size());
    for (int i = 0; i < n; ++i) curve.emplace_back(grid[i], values[i]);
    result.reduced_curve = std::move(curve);
  }

  // Strict comparison keeps the first (smallest alpha) maximiser.
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (values[i] > values[best]) best = i;
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double magnitude = std::max(std::abs(*lo_it), std::abs(*hi_it));
  const bool flat = (*hi_it - *lo_it) < 1e-12 * magnitude || magnitude == 0.0;

  double alpha_hat = grid[best];
  double f_hat = values[best];
  if (flat) {
    result.flags.emplace_back(flags::kIdentifiability);
  } else {
    double lo = grid[std::max(best - 1, 0)];
    double hi = grid[std::min(best + 1, n - 1)];
    const double bracket_lo = lo;
    const double bracket_hi = hi;

    // Golden-section maximisation on [lo, hi].
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > opts.refine_tol) {
      if (f1 >= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = f(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = f(x2);
      }
    }
    double x = f1 >= f2 ? x1 : x2;
    double fx = std::max(f1, f2);

    // Newton on the score: golden section alone stalls near sqrt(eps) because
    // the objective is flat at its maximum, while the score has a simple root.
    // Steps are accepted while they shrink |S|; comparing objective values
    // this close to the maximum is dominated by rounding.
    double s_x = score(spectra, x);
    for (int iter = 0; iter < 8 && s_x != 0.0; ++iter) {
      const double q = information(spectra, x);
      if (!(q < 0.0)) break;
      const double next = x + s_x / q;
      if (!(next >= bracket_lo && next <= bracket_hi)) break;
      const double s_next = score(spectra, next);
      if (!(std::abs(s_next) < std::abs(s_x))) break;
      x = next;
      s_x = s_next;
    }
    fx = f(x);
    if (fx >= f_hat) {
      alpha_hat = x;
      f_hat = fx;
    }
  }

  const double boundary_tol = std::max(10.0 * opts.refine_tol, 1e-12 * a2);
  if (alpha_hat - a1 <= boundary_tol) result.flags.emplace_back(flags::kBoundaryLow);
  if (a2 - alpha_hat <= boundary_tol) result.flags.emplace_back(flags::kBoundaryHigh);

  result.alpha_hat = alpha_hat;
  result.objective_at_opt = reduced_objective(spectra, alpha_hat);
  result.g_hat = profile_g(spectra, alpha_hat);
  if (!ParamSpace::contains_g(result.g_hat)) result.flags.emplace_back(flags::kGOutOfRange);
  return result;
}

EstimationResult estimate(const CoefficientPanel& panel, const ParamSpace& space,
                          const EstimateOptions& opts) {
  return estimate(EmpiricalSpectra(panel), space, opts);
}

double std_error_alpha(int N, const EstimationResult& result, std::optional<double> h,
                       std::optional<double> gamma, const SeriesOptions& series) {
  if (!h || !gamma) {
    throw DomainError("std_error_alpha: H and gamma must be supplied; they are not estimated");
  }
  if (N < 1) throw DomainError("std_error_alpha: need N >= 1");
  const ModelParams plug_in(result.g_hat, result.alpha_hat, *h, *gamma);
  const VarianceResult v = asymptotic_variance(plug_in, series);
  return std::sqrt(v.sigma2 / N);
}

double diagnostic_v(const ModelParams& params, double alpha, double alpha0, long L) {
  if (!(alpha > 1.0 && alpha0 > 1.0)) throw DomainError("diagnostic_v: need alpha, alpha0 > 1");
  const double d = limit_series(params, alpha, SeriesKind::D, L);
  const double d0 = limit_series(params, alpha0, SeriesKind::D, L);
  const double u = limit_series(params, alpha, SeriesKind::U, L);
  const double u0 = limit_series(params, alpha0, SeriesKind::U, L);
  return log_ratio(d, d0) - 2.0 * log_ratio(u, u0);
}

std::optional<double> diagnostic_t(const EmpiricalSpectra& spectra, const ModelParams& params,
                                   double alpha, double alpha0) {
  const long L = spectra.L();
  const double uh = spectra.u_hat(alpha, 0);
  const double uh0 = spectra.u_hat(alpha0, 0);
  const double dh = spectra.d_hat(alpha, 0);
  const double dh0 = spectra.d_hat(alpha0, 0);
  const double u = limit_series(params, alpha, SeriesKind::U, L);
  const double u0 = limit_series(params, alpha0, SeriesKind::U, L);
  const double d = limit_series(params, alpha, SeriesKind::D, L);
  const double d0 = limit_series(params, alpha0, SeriesKind::D, L);
  const double ru = uh / u;
  const double ru0 = uh0 / u0;
  const double rd = dh / d;
  const double rd0 = dh0 / d0;
  if (!(ru > 0.0 && ru0 > 0.0 && rd > 0.0 && rd0 > 0.0)) return std::nullopt;
  return 2.0 * std::log(ru) - 2.0 * std::log(ru0) - (std::log(rd) - std::log(rd0));
}

}  // namespace sphar
