#include "sphar/spectra.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "sphar/errors.hpp"

namespace sphar {
namespace {

void check_order(int order) {
  if (order < 0 || order > 2) throw DomainError("spectral sum: order must be 0, 1 or 2");
}

// Sums for one multipole in fixed order: m ascending, then t ascending.
struct TrackSums {
  double lag0 = 0.0;   // a(t-1)^2, t = 1..N
  double lag1 = 0.0;   // a(t) a(t-1), t = 1..N
  double power = 0.0;  // a(t)^2, t = 1..N
};

TrackSums multipole_sums(const CoefficientPanel& panel, int ell) {
  TrackSums s;
  for (int m = -ell; m <= ell; ++m) {
    const auto a = panel.track(ell, m);
    for (std::size_t t = 1; t < a.size(); ++t) {
      s.lag0 += a[t - 1] * a[t - 1];
      s.lag1 += a[t] * a[t - 1];
      s.power += a[t] * a[t];
    }
  }
  return s;
}

}  // namespace

EmpiricalSpectra::EmpiricalSpectra(const CoefficientPanel& panel)
    : L_(panel.L()), N_(panel.N()) {
  c0_.resize(static_cast<std::size_t>(L_));
  c1_.resize(static_cast<std::size_t>(L_));
  log_l_.resize(static_cast<std::size_t>(L_));
  for (int ell = 1; ell <= L_; ++ell) {
    const TrackSums s = multipole_sums(panel, ell);
    const double count = static_cast<double>(N_) * (2.0 * ell + 1.0);
    const auto i = static_cast<std::size_t>(ell - 1);
    c0_[i] = s.lag0 / count;
    c1_[i] = s.lag1 / count;
    log_l_[i] = std::log(static_cast<double>(ell));
    power_ += s.power;
  }
  power_ /= N_;
}

double EmpiricalSpectra::c0(int ell) const {
  if (ell < 1 || ell > L_) throw IndexError("EmpiricalSpectra: ell out of range");
  return c0_[static_cast<std::size_t>(ell - 1)];
}

double EmpiricalSpectra::c1(int ell) const {
  if (ell < 1 || ell > L_) throw IndexError("EmpiricalSpectra: ell out of range");
  return c1_[static_cast<std::size_t>(ell - 1)];
}

std::optional<double> EmpiricalSpectra::phi_hat(int ell) const {
  const double c = c0(ell);
  if (c == 0.0) return std::nullopt;
  return c1(ell) / c;
}

double EmpiricalSpectra::u_hat(double alpha, int order) const {
  check_order(order);
  double sum = 0.0;
  for (std::size_t i = 0; i < c1_.size(); ++i) {
    const double lg = log_l_[i];
    double term = std::exp(-alpha * lg) * (2.0 * (i + 1) + 1.0) * c1_[i];
    if (order == 1) term *= -lg;
    else if (order == 2) term *= lg * lg;
    sum += term;
  }
  return sum;
}

double EmpiricalSpectra::d_hat(double alpha, int order) const {
  check_order(order);
  double sum = 0.0;
  for (std::size_t i = 0; i < c0_.size(); ++i) {
    const double lg = log_l_[i];
    double term = std::exp(-2.0 * alpha * lg) * (2.0 * (i + 1) + 1.0) * c0_[i];
    if (order == 1) term *= -2.0 * lg;
    else if (order == 2) term *= 4.0 * lg * lg;
    sum += term;
  }
  return sum;
}

double empirical_autocov(const CoefficientPanel& panel, int ell, int tau) {
  if (ell < 1 || ell > panel.L()) {
    throw IndexError("empirical_autocov: ell=" + std::to_string(ell) +
                     " outside [1, " + std::to_string(panel.L()) + "]");
  }
  if (tau != 0 && tau != 1) throw DomainError("empirical_autocov: tau must be 0 or 1");
  const TrackSums s = multipole_sums(panel, ell);
  return (tau == 0 ? s.lag0 : s.lag1) / (static_cast<double>(panel.N()) * (2.0 * ell + 1.0));
}

EmpiricalSpectra empirical_spectra(const CoefficientPanel& panel) {
  return EmpiricalSpectra(panel);
}

double u_hat(const CoefficientPanel& panel, double alpha, int order) {
  return EmpiricalSpectra(panel).u_hat(alpha, order);
}

double d_hat(const CoefficientPanel& panel, double alpha, int order) {
  return EmpiricalSpectra(panel).d_hat(alpha, order);
}

void write_spectra_csv(const EmpiricalSpectra& spectra, std::ostream& out) {
  out << "ell,c0,c1,phi_hat\n";
  char buf[128];
  for (int ell = 1; ell <= spectra.L(); ++ell) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,", ell, spectra.c0(ell), spectra.c1(ell));
    out << buf;
    if (const auto phi = spectra.phi_hat(ell)) {
      std::snprintf(buf, sizeof buf, "%.17g", *phi);
      out << buf << "\n";
    } else {
      out << "NA\n";
    }
  }
}

}  // namespace sphar
