#include "sphar/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "sphar/errors.hpp"

namespace sphar {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Summand of the selected population series at multipole ell.
double series_term(const ModelParams& p, double alpha_eval, SeriesKind kind,
                   long ell) {
  const double log_l = std::log(static_cast<double>(ell));
  const double c0 = covariance_spectrum(p, static_cast<int>(ell), 0);
  const double mult = 2.0 * ell + 1.0;
  switch (kind) {
    case SeriesKind::U:
    case SeriesKind::U1:
    case SeriesKind::U2: {
      const double c1 = c0 * p.g() * std::exp(-p.alpha() * log_l);
      const double base = mult * c1 * std::exp(-alpha_eval * log_l);
      if (kind == SeriesKind::U) return base;
      if (kind == SeriesKind::U1) return -base * log_l;
      return base * log_l * log_l;
    }
    case SeriesKind::D:
    case SeriesKind::D1:
    case SeriesKind::D2: {
      const double base = mult * c0 * std::exp(-2.0 * alpha_eval * log_l);
      if (kind == SeriesKind::D) return base;
      if (kind == SeriesKind::D1) return -2.0 * base * log_l;
      return 4.0 * base * log_l * log_l;
    }
  }
  return 0.0;
}

// Sums term(1..) in doubling windows (L, 2L] until the last window is below
// rel_tol times the running total.
template <class Term>
SeriesValue adaptive_sum(Term term, const SeriesOptions& opts,
                         const char* what) {
  if (!(opts.rel_tol > 0.0)) throw DomainError("series: rel_tol must be > 0");
  if (opts.max_terms < 1) throw DomainError("series: max_terms must be >= 1");
  long upto = std::min<long>(64, opts.max_terms);
  double partial = 0.0;
  for (long l = 1; l <= upto; ++l) partial += term(l);
  while (true) {
    if (upto >= opts.max_terms) {
      throw ConvergenceError(std::string(what) +
                                 ": series did not converge within " +
                                 std::to_string(opts.max_terms) + " terms",
                             opts.max_terms);
    }
    const long next = std::min(2 * upto, opts.max_terms);
    double window = 0.0;
    for (long l = upto + 1; l <= next; ++l) window += term(l);
    partial += window;
    upto = next;
    if (std::abs(window) <= opts.rel_tol * std::abs(partial)) {
      return {partial, upto};
    }
  }
}

}  // namespace

ParamSpace::ParamSpace(double a1, double a2) : a1_(a1), a2_(a2) {
  if (!(a1 > 1.0 && a2 > a1 && std::isfinite(a2))) {
    throw DomainError("ParamSpace: need 1 < a1 < a2 < inf, got a1=" + fmt(a1) +
                      " a2=" + fmt(a2));
  }
}

ModelParams::ModelParams(double g, double alpha, double h, double gamma,
                         std::optional<ParamSpace> space)
    : g_(g), alpha_(alpha), h_(h), gamma_(gamma), space_(space) {
  if (!ParamSpace::contains_g(g)) {
    throw DomainError("ModelParams: need 0 < |G| < 1, got " + fmt(g));
  }
  if (!(alpha > 1.0 && std::isfinite(alpha))) {
    throw DomainError("ModelParams: need alpha > 1, got " + fmt(alpha));
  }
  if (!(h > 0.0 && std::isfinite(h))) {
    throw DomainError("ModelParams: need H > 0, got " + fmt(h));
  }
  if (!(gamma > 2.0 && std::isfinite(gamma))) {
    throw DomainError("ModelParams: need gamma > 2, got " + fmt(gamma));
  }
  if (space_ && !space_->contains_alpha(alpha)) {
    throw DomainError("ModelParams: alpha " + fmt(alpha) + " outside [" +
                      fmt(space_->a1()) + ", " + fmt(space_->a2()) + "]");
  }
}

nlohmann::json to_json(const ModelParams& params) {
  nlohmann::json j = {{"g", params.g()},
                      {"alpha", params.alpha()},
                      {"h", params.h()},
                      {"gamma", params.gamma()}};
  if (params.space()) {
    j["a1"] = params.space()->a1();
    j["a2"] = params.space()->a2();
  }
  return j;
}

ModelParams model_params_from_json(const nlohmann::json& j) {
  try {
    std::optional<ParamSpace> space;
    if (j.contains("a1") || j.contains("a2")) {
      space.emplace(j.at("a1").get<double>(), j.at("a2").get<double>());
    }
    return ModelParams(j.at("g").get<double>(), j.at("alpha").get<double>(),
                       j.at("h").get<double>(), j.at("gamma").get<double>(),
                       space);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("ModelParams JSON: ") + e.what());
  }
}

double phi_ell(const ModelParams& params, int ell) {
  if (ell < 1) throw DomainError("phi_ell: need ell >= 1");
  return params.g() * std::exp(-params.alpha() * std::log(static_cast<double>(ell)));
}

double noise_spectrum(const ModelParams& params, int ell) {
  if (ell < 1) throw DomainError("noise_spectrum: need ell >= 1");
  return params.h() * std::exp(-params.gamma() * std::log(static_cast<double>(ell)));
}

double covariance_spectrum(const ModelParams& params, int ell, int tau) {
  const double phi = phi_ell(params, ell);
  const double c0 = noise_spectrum(params, ell) / (1.0 - phi * phi);
  return c0 * std::pow(phi, std::abs(tau));
}

KernelValue covariance_kernel(const ModelParams& params, double inner, int lag,
                              int L) {
  if (!(std::abs(inner) <= 1.0)) {
    throw DomainError("covariance_kernel: inner product outside [-1, 1]");
  }
  if (L < 1) throw DomainError("covariance_kernel: need L >= 1");
  constexpr double inv4pi = 1.0 / (4.0 * std::numbers::pi);
  // P_ell(inner) by the same three-term recurrence as legendre_p, run once.
  double value = 0.0;
  double p_prev = 1.0;
  double p_cur = inner;
  for (int l = 1; l <= L; ++l) {
    value += covariance_spectrum(params, l, lag) * (2.0 * l + 1.0) * inv4pi * p_cur;
    const double p_next = ((2.0 * l + 1.0) * inner * p_cur - l * p_prev) / (l + 1.0);
    p_prev = p_cur;
    p_cur = p_next;
  }
  // (2x+1) x^-gamma is decreasing for gamma > 1, so the tail sum is bounded
  // by its integral from L; 1/(1-phi^2) is bounded by its value at L+1.
  const double g = params.gamma();
  const double x = static_cast<double>(L);
  const double phi_next = phi_ell(params, L + 1);
  const double integral = 2.0 * std::pow(x, 2.0 - g) / (g - 2.0) +
                          std::pow(x, 1.0 - g) / (g - 1.0);
  const double tail = params.h() * integral / (1.0 - phi_next * phi_next) * inv4pi;
  return {value, tail};
}

double limit_series(const ModelParams& params, double alpha_eval,
                    SeriesKind kind, long L) {
  if (L < 1) throw DomainError("limit_series: need L >= 1");
  double sum = 0.0;
  for (long l = 1; l <= L; ++l) sum += series_term(params, alpha_eval, kind, l);
  return sum;
}

SeriesValue limit_series_converged(const ModelParams& params, double alpha_eval,
                                   SeriesKind kind, const SeriesOptions& opts) {
  return adaptive_sum(
      [&](long l) { return series_term(params, alpha_eval, kind, l); }, opts,
      "limit_series_converged");
}

double limiting_information(const ModelParams& params,
                            const SeriesOptions& opts) {
  const double a0 = params.alpha();
  const double d = limit_series_converged(params, a0, SeriesKind::D, opts).value;
  const double d1 = limit_series_converged(params, a0, SeriesKind::D1, opts).value;
  const double d2 = limit_series_converged(params, a0, SeriesKind::D2, opts).value;
  return 0.5 * params.g() * params.g() * (d2 - d1 * d1 / d);
}

double limiting_information_truncated(const ModelParams& params, long L) {
  const double a0 = params.alpha();
  const double d = limit_series(params, a0, SeriesKind::D, L);
  const double d1 = limit_series(params, a0, SeriesKind::D1, L);
  const double d2 = limit_series(params, a0, SeriesKind::D2, L);
  return 0.5 * params.g() * params.g() * (d2 - d1 * d1 / d);
}

VarianceResult asymptotic_variance(const ModelParams& params,
                                   const SeriesOptions& opts) {
  const double a0 = params.alpha();
  const SeriesValue d = limit_series_converged(params, a0, SeriesKind::D, opts);
  const SeriesValue d1 = limit_series_converged(params, a0, SeriesKind::D1, opts);
  const double shift = d1.value / d.value;

  auto denom_term = [&](long l) {
    const double log_l = std::log(static_cast<double>(l));
    const double w = 2.0 * log_l + shift;
    return w * w * std::exp(-2.0 * a0 * log_l) * (2.0 * l + 1.0) *
           covariance_spectrum(params, static_cast<int>(l), 0);
  };
  auto numer_term = [&](long l) {
    return denom_term(l) * noise_spectrum(params, static_cast<int>(l));
  };
  const SeriesValue num = adaptive_sum(numer_term, opts, "asymptotic_variance");
  const SeriesValue den = adaptive_sum(denom_term, opts, "asymptotic_variance");
  const double sigma2 =
      4.0 / (params.g() * params.g()) * num.value / (den.value * den.value);
  return {sigma2, num.value, den.value,
          std::max({d.terms, d1.terms, num.terms, den.terms})};
}

}  // namespace sphar
