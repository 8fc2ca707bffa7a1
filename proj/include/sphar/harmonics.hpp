#pragma once

#include <vector>

namespace sphar {

/// A point on the unit sphere in colatitude/longitude coordinates.
///
/// Colatitude must lie in [0, pi]; longitude is reduced modulo 2*pi into
/// [0, 2*pi) on construction.
class SpherePoint {
 public:
  SpherePoint(double colatitude, double longitude);

  double colatitude() const noexcept { return colatitude_; }
  double longitude() const noexcept { return longitude_; }

 private:
  double colatitude_;
  double longitude_;
};

/// Euclidean inner product of the two points viewed as unit vectors in R^3,
/// clamped to [-1, 1].
double inner(const SpherePoint& x, const SpherePoint& y) noexcept;

/// Legendre polynomial P_ell(u) by the three-term recurrence.
double legendre_p(int ell, double u);

/// Associated Legendre function P_{ell,m}(u) for 0 <= m <= ell.
///
/// Uses the Rodrigues-type convention
///   P_{ell,m}(u) = (1-u^2)^{m/2} / (2^ell ell!) d^{ell+m}/du^{ell+m} (u^2-1)^ell,
/// which carries no Condon-Shortley phase: P_{1,1}(u) = +sqrt(1-u^2). Most
/// libraries (boost, GSL, std::assoc_legendre in some modes) differ from this
/// by a factor (-1)^m.
double assoc_legendre(int ell, int m, double u);

/// Real spherical harmonic Y_{ell,m}.
///
/// m > 0 selects the cos(m*phi) branch, m < 0 the sin(|m|*phi) branch and
/// m = 0 the zonal harmonic. The set is orthonormal on the sphere.
double real_sph_harm(int ell, int m, const SpherePoint& point);

/// All real harmonics with 0 <= ell <= lmax at one point, laid out as
/// values[ell*ell + ell + m].
std::vector<double> real_sph_harm_all(int lmax, const SpherePoint& point);

/// Residual of the addition formula,
///   sum_m Y_{ell,m}(x) Y_{ell,m}(y) - (2 ell + 1)/(4 pi) P_ell(<x,y>).
double addition_check(int ell, const SpherePoint& x, const SpherePoint& y);

}  // namespace sphar
