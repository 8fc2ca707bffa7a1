#include "sphar/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sphar/errors.hpp"

namespace sphar {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_unit_interval(double u, const char* who) {
  if (!(std::abs(u) <= 1.0)) {
    throw DomainError(std::string(who) + ": argument " + std::to_string(u) +
                      " outside [-1, 1]");
  }
}

// Orthonormalised associated Legendre function
//   pbar_{l,m}(u) = sqrt((2l+1)/(4pi) (l-m)!/(l+m)!) P_{l,m}(u)
// for l = m..lmax, filled into out[l - m]. The seed pbar_{m,m} is built as a
// running product so no factorial is ever formed.
void normalized_column(int m, int lmax, double u, double s,
                       std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(lmax - m + 1), 0.0);
  double pmm = 1.0 / std::sqrt(4.0 * kPi);
  for (int k = 1; k <= m; ++k) {
    pmm *= s * std::sqrt((2.0 * k + 1.0) / (2.0 * k));
  }
  out[0] = pmm;
  if (lmax == m) return;
  double prev = pmm;
  double cur = u * std::sqrt(2.0 * m + 3.0) * pmm;
  out[1] = cur;
  for (int l = m + 2; l <= lmax; ++l) {
    const double l2 = static_cast<double>(l) * l;
    const double m2 = static_cast<double>(m) * m;
    const double lm1 = l - 1.0;
    const double a = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
    const double b = std::sqrt((lm1 * lm1 - m2) / (4.0 * lm1 * lm1 - 1.0));
    const double next = a * (u * cur - b * prev);
    prev = cur;
    cur = next;
    out[static_cast<std::size_t>(l - m)] = cur;
  }
}

double normalized_value(int ell, int m, double u, double s) {
  std::vector<double> column;
  normalized_column(m, ell, u, s, column);
  return column.back();
}

}  // namespace

SpherePoint::SpherePoint(double colatitude, double longitude)
    : colatitude_(colatitude), longitude_(0.0) {
  if (!(colatitude >= 0.0 && colatitude <= kPi)) {
    throw DomainError("SpherePoint: colatitude " + std::to_string(colatitude) +
                      " outside [0, pi]");
  }
  if (!std::isfinite(longitude)) {
    throw DomainError("SpherePoint: non-finite longitude");
  }
  double phi = std::fmod(longitude, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;
  if (phi >= kTwoPi) phi = 0.0;
  longitude_ = phi;
}

double inner(const SpherePoint& x, const SpherePoint& y) noexcept {
  const double c = std::cos(x.colatitude()) * std::cos(y.colatitude()) +
                   std::sin(x.colatitude()) * std::sin(y.colatitude()) *
                       std::cos(x.longitude() - y.longitude());
  return std::clamp(c, -1.0, 1.0);
}

double legendre_p(int ell, double u) {
  if (ell < 0) throw DomainError("legendre_p: negative degree");
  check_unit_interval(u, "legendre_p");
  if (ell == 0) return 1.0;
  double prev = 1.0;
  double cur = u;
  for (int l = 1; l < ell; ++l) {
    const double next = ((2.0 * l + 1.0) * u * cur - l * prev) / (l + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double assoc_legendre(int ell, int m, double u) {
  if (ell < 0 || m < 0 || m > ell) {
    throw DomainError("assoc_legendre: need 0 <= m <= ell, got ell=" +
                      std::to_string(ell) + " m=" + std::to_string(m));
  }
  check_unit_interval(u, "assoc_legendre");
  if (m == 0) return legendre_p(ell, u);
  const double s = std::sqrt((1.0 - u) * (1.0 + u));
  const double pbar = normalized_value(ell, m, u, s);
  // Undo the orthonormalisation; the factorial ratio goes through lgamma.
  const double log_ratio = 0.5 * (std::lgamma(ell + m + 1.0) -
                                  std::lgamma(ell - m + 1.0));
  return pbar * std::sqrt(4.0 * kPi / (2.0 * ell + 1.0)) * std::exp(log_ratio);
}

double real_sph_harm(int ell, int m, const SpherePoint& point) {
  if (ell < 0 || std::abs(m) > ell) {
    throw DomainError("real_sph_harm: need |m| <= ell, got ell=" +
                      std::to_string(ell) + " m=" + std::to_string(m));
  }
  const double u = std::cos(point.colatitude());
  const double s = std::sin(point.colatitude());
  const int am = std::abs(m);
  const double pbar = normalized_value(ell, am, u, s);
  if (m == 0) return pbar;
  const double trig = m > 0 ? std::cos(m * point.longitude())
                            : std::sin(am * point.longitude());
  return std::numbers::sqrt2 * pbar * trig;
}

std::vector<double> real_sph_harm_all(int lmax, const SpherePoint& point) {
  if (lmax < 0) throw DomainError("real_sph_harm_all: negative lmax");
  const std::size_t width = static_cast<std::size_t>(lmax) + 1;
  std::vector<double> values(width * width, 0.0);
  const double u = std::cos(point.colatitude());
  const double s = std::sin(point.colatitude());
  std::vector<double> column;
  for (int m = 0; m <= lmax; ++m) {
    normalized_column(m, lmax, u, s, column);
    const double c = std::cos(m * point.longitude());
    const double sn = std::sin(m * point.longitude());
    for (int l = m; l <= lmax; ++l) {
      const double pbar = column[static_cast<std::size_t>(l - m)];
      const std::size_t base = static_cast<std::size_t>(l) * l + l;
      if (m == 0) {
        values[base] = pbar;
      } else {
        values[base + m] = std::numbers::sqrt2 * pbar * c;
        values[base - m] = std::numbers::sqrt2 * pbar * sn;
      }
    }
  }
  return values;
}

double addition_check(int ell, const SpherePoint& x, const SpherePoint& y) {
  if (ell < 0) throw DomainError("addition_check: negative degree");
  double sum = 0.0;
  for (int m = -ell; m <= ell; ++m) {
    sum += real_sph_harm(ell, m, x) * real_sph_harm(ell, m, y);
  }
  return sum - (2.0 * ell + 1.0) / (4.0 * kPi) * legendre_p(ell, inner(x, y));
}

}  // namespace sphar
