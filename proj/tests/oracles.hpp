#pragma once

// Test-only reference computations. Nothing here calls into the recurrences or
// cached spectral sums of the library; panels are read only through at().

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cmath>
#include <vector>

#include "sphar/model.hpp"
#include "sphar/simulate.hpp"

namespace oracle {

using mp = boost::multiprecision::cpp_dec_float_50;

inline mp mp_pi() { return boost::math::constants::pi<mp>(); }

inline mp factorial(int n) {
  mp r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

inline mp binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// (1-u^2)^{m/2} / (2^l l!) d^{l+m}/du^{l+m} (u^2-1)^l by expanding the
// polynomial (u^2-1)^l = sum_k C(l,k) (-1)^{l-k} u^{2k} and differentiating
// each monomial exactly.
inline mp rodrigues_assoc_legendre(int l, int m, const mp& u) {
  const int order = l + m;
  mp deriv = 0;
  for (int k = 0; k <= l; ++k) {
    const int power = 2 * k;
    if (power < order) continue;
    mp coeff = binomial(l, k) * (((l - k) % 2 == 0) ? 1 : -1);
    coeff *= factorial(power) / factorial(power - order);
    deriv += coeff * pow(u, power - order);
  }
  mp pref = pow(1 - u * u, mp(m) / 2);
  return pref * deriv / (pow(mp(2), l) * factorial(l));
}

// Real spherical harmonic straight from the three-case normalised display.
inline mp real_sph_harm(int l, int m, const mp& theta, const mp& phi) {
  const mp u = cos(theta);
  if (m > 0) {
    const mp norm = sqrt((2 * l + 1) / (2 * mp_pi()) * factorial(l - m) / factorial(l + m));
    return norm * rodrigues_assoc_legendre(l, m, u) * cos(m * phi);
  }
  if (m == 0) {
    return sqrt((2 * l + 1) / (4 * mp_pi())) * rodrigues_assoc_legendre(l, 0, u);
  }
  const mp norm = sqrt((2 * l + 1) / (2 * mp_pi()) * factorial(l + m) / factorial(l - m));
  return norm * rodrigues_assoc_legendre(l, -m, u) * sin(-m * phi);
}

struct MpParams {
  mp g, alpha, h, gamma;
  explicit MpParams(const sphar::ModelParams& p)
      : g(p.g()), alpha(p.alpha()), h(p.h()), gamma(p.gamma()) {}
};

inline mp c0_mp(const MpParams& p, int l) {
  const mp phi = p.g * pow(mp(l), -p.alpha);
  return p.h * pow(mp(l), -p.gamma) / (1 - phi * phi);
}

// Population series in 50-digit arithmetic; kind as sphar::SeriesKind.
inline mp series(const sphar::ModelParams& params, const mp& a, sphar::SeriesKind kind, int L) {
  const MpParams p(params);
  mp sum = 0;
  for (int l = 1; l <= L; ++l) {
    const mp lg = log(mp(l));
    const mp c0 = c0_mp(p, l);
    const mp c1 = c0 * p.g * pow(mp(l), -p.alpha);
    const mp w = 2 * l + 1;
    switch (kind) {
      case sphar::SeriesKind::U: sum += w * c1 * pow(mp(l), -a); break;
      case sphar::SeriesKind::U1: sum -= w * c1 * pow(mp(l), -a) * lg; break;
      case sphar::SeriesKind::U2: sum += w * c1 * pow(mp(l), -a) * lg * lg; break;
      case sphar::SeriesKind::D: sum += w * c0 * pow(mp(l), -2 * a); break;
      case sphar::SeriesKind::D1: sum -= 2 * w * c0 * pow(mp(l), -2 * a) * lg; break;
      case sphar::SeriesKind::D2: sum += 4 * w * c0 * pow(mp(l), -2 * a) * lg * lg; break;
    }
  }
  return sum;
}

struct MpVariance {
  mp sigma2, numerator, denominator, information;
};

// sigma^2 and Q(alpha0) from the explicit numerator/denominator series,
// truncated at L (the summands decay like l^{1 - gamma - 2 alpha0} log^2 l).
inline MpVariance variance(const sphar::ModelParams& params, int L) {
  const MpParams p(params);
  std::vector<mp> lg(L + 1), c0(L + 1), decay(L + 1);
  mp d = 0, d1 = 0, d2 = 0;
  for (int l = 1; l <= L; ++l) {
    lg[l] = log(mp(l));
    c0[l] = c0_mp(p, l);
    decay[l] = pow(mp(l), -2 * p.alpha) * (2 * l + 1) * c0[l];
    d += decay[l];
    d1 -= 2 * decay[l] * lg[l];
    d2 += 4 * decay[l] * lg[l] * lg[l];
  }
  const mp shift = d1 / d;
  mp num = 0, den = 0;
  for (int l = 1; l <= L; ++l) {
    const mp w = 2 * lg[l] + shift;
    den += w * w * decay[l];
    num += w * w * decay[l] * p.h * pow(mp(l), -p.gamma);
  }
  MpVariance v;
  v.numerator = num;
  v.denominator = den;
  v.sigma2 = 4 / (p.g * p.g) * num / (den * den);
  v.information = p.g * p.g / 2 * (d2 - d1 * d1 / d);
  return v;
}

// ---------------------------------------------------------------------------
// Brute-force panel sums, t outermost as written in the definitions.

inline double u_hat(const sphar::CoefficientPanel& a, double alpha, int order) {
  double s = 0;
  for (int t = 1; t <= a.N(); ++t)
    for (int l = 1; l <= a.L(); ++l)
      for (int m = -l; m <= l; ++m) {
        double term = a.at(l, m, t) * a.at(l, m, t - 1) * std::pow(l, -alpha);
        if (order == 1) term *= -std::log(l);
        if (order == 2) term *= std::log(l) * std::log(l);
        s += term;
      }
  return s / a.N();
}

inline double d_hat(const sphar::CoefficientPanel& a, double alpha, int order) {
  double s = 0;
  for (int t = 1; t <= a.N(); ++t)
    for (int l = 1; l <= a.L(); ++l)
      for (int m = -l; m <= l; ++m) {
        double term = a.at(l, m, t - 1) * a.at(l, m, t - 1) * std::pow(l, -2 * alpha);
        if (order == 1) term *= -2 * std::log(l);
        if (order == 2) term *= 4 * std::log(l) * std::log(l);
        s += term;
      }
  return s / a.N();
}

inline double objective(const sphar::CoefficientPanel& a, double g, double alpha) {
  double s = 0;
  for (int t = 1; t <= a.N(); ++t)
    for (int l = 1; l <= a.L(); ++l)
      for (int m = -l; m <= l; ++m) {
        const double r = a.at(l, m, t) - g * std::pow(l, -alpha) * a.at(l, m, t - 1);
        s += r * r;
      }
  return s / a.N();
}

inline double power(const sphar::CoefficientPanel& a) {
  double s = 0;
  for (int t = 1; t <= a.N(); ++t)
    for (int l = 1; l <= a.L(); ++l)
      for (int m = -l; m <= l; ++m) s += a.at(l, m, t) * a.at(l, m, t);
  return s / a.N();
}

// Minimiser of the full objective over G for fixed alpha, by normal equations
// formed from the raw triple sums.
inline double best_g(const sphar::CoefficientPanel& a, double alpha) {
  return u_hat(a, alpha, 0) / d_hat(a, alpha, 0);
}

// Profiled objective alpha -> R_N(G*(alpha), alpha) built from the raw sums.
inline double profiled(const sphar::CoefficientPanel& a, double alpha) {
  return objective(a, best_g(a, alpha), alpha);
}

}  // namespace oracle
