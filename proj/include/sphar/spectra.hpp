#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "sphar/simulate.hpp"

namespace sphar {

/// Sample autocovariances of a panel, per multipole:
///   c0(l) = 1/(N(2l+1)) sum_{t=1}^{N} sum_m a(t-1)^2
///   c1(l) = 1/(N(2l+1)) sum_{t=1}^{N} sum_m a(t) a(t-1)
/// plus the lag-0 power over t = 1..N, which the least squares objective
/// needs. Every alpha-dependent sum below is O(L) over these.
class EmpiricalSpectra {
 public:
  explicit EmpiricalSpectra(const CoefficientPanel& panel);

  int L() const noexcept { return L_; }
  int N() const noexcept { return N_; }
  double c0(int ell) const;
  double c1(int ell) const;
  /// c1/c0, or nullopt when c0 == 0.
  std::optional<double> phi_hat(int ell) const;
  /// (1/N) sum_{t=1}^{N} sum_l sum_m a(t)^2.
  double power() const noexcept { return power_; }

  /// U-hat family: sum_l l^-alpha (2l+1) c1(l) times 1, -log l, log^2 l.
  double u_hat(double alpha, int order) const;
  /// D-hat family: sum_l l^-2alpha (2l+1) c0(l) times 1, -2 log l, 4 log^2 l.
  double d_hat(double alpha, int order) const;

 private:
  int L_;
  int N_;
  std::vector<double> c0_;
  std::vector<double> c1_;
  std::vector<double> log_l_;
  double power_ = 0.0;
};

/// Single autocovariance c_tau(l) computed directly from the panel; tau in {0, 1}.
double empirical_autocov(const CoefficientPanel& panel, int ell, int tau);

EmpiricalSpectra empirical_spectra(const CoefficientPanel& panel);

double u_hat(const CoefficientPanel& panel, double alpha, int order);
double d_hat(const CoefficientPanel& panel, double alpha, int order);

/// CSV with header `ell,c0,c1,phi_hat`; an undefined phi_hat is written as NA.
void write_spectra_csv(const EmpiricalSpectra& spectra, std::ostream& out);

}  // namespace sphar
