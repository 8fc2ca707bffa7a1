#pragma once

#include <json.hpp>
#include <optional>

namespace sphar {

/// Admissible range [a1, a2] for the smoothness exponent alpha, 1 < a1 < a2.
/// The scale G always ranges over (-1, 1) without 0.
class ParamSpace {
 public:
  ParamSpace(double a1, double a2);

  double a1() const noexcept { return a1_; }
  double a2() const noexcept { return a2_; }
  bool contains_alpha(double alpha) const noexcept {
    return alpha >= a1_ && alpha <= a2_;
  }
  static bool contains_g(double g) noexcept { return g != 0.0 && g > -1.0 && g < 1.0; }

 private:
  double a1_;
  double a2_;
};

/// Parameters of the power-law SPHAR(1) model
///   phi_ell = G ell^-alpha,   C_{ell;Z} = H ell^-gamma.
///
/// Construction validates 0 < |G| < 1, alpha > 1, H > 0 and gamma > 2, and,
/// when a ParamSpace is attached, a1 <= alpha <= a2. Throws DomainError.
class ModelParams {
 public:
  ModelParams(double g, double alpha, double h, double gamma,
              std::optional<ParamSpace> space = std::nullopt);

  double g() const noexcept { return g_; }
  double alpha() const noexcept { return alpha_; }
  double h() const noexcept { return h_; }
  double gamma() const noexcept { return gamma_; }
  const std::optional<ParamSpace>& space() const noexcept { return space_; }

  ModelParams with_g(double g) const { return {g, alpha_, h_, gamma_, space_}; }
  ModelParams with_alpha(double a) const { return {g_, a, h_, gamma_, space_}; }
  ModelParams with_h(double h) const { return {g_, alpha_, h, gamma_, space_}; }

 private:
  double g_;
  double alpha_;
  double h_;
  double gamma_;
  std::optional<ParamSpace> space_;
};

/// Flat JSON object {g, alpha, h, gamma, a1, a2}; a1/a2 are omitted when no
/// space is attached.
nlohmann::json to_json(const ModelParams& params);
ModelParams model_params_from_json(const nlohmann::json& j);

/// Autoregressive eigenvalue G ell^-alpha; ell >= 1.
double phi_ell(const ModelParams& params, int ell);

/// Noise angular power spectrum H ell^-gamma; ell >= 1.
double noise_spectrum(const ModelParams& params, int ell);

/// Lag-tau autocovariance C_ell(tau) = C_{ell;Z} phi_ell^|tau| / (1 - phi_ell^2).
double covariance_spectrum(const ModelParams& params, int ell, int tau);

struct KernelValue {
  double value;
  /// Upper bound on sum_{ell > L} (2 ell + 1) C_ell(0) / (4 pi), which
  /// dominates the absolute truncation error at any lag and inner product.
  double tail_bound;
};

/// Space-time covariance sum_{ell=1}^{L} C_ell(lag) (2ell+1)/(4pi) P_ell(inner).
KernelValue covariance_kernel(const ModelParams& params, double inner, int lag,
                              int L);

/// Population spectral sums evaluated at the true parameters:
///   U  = sum (2l+1) C_l(1) l^-a          D  = sum (2l+1) C_l(0) l^-2a
///   U1 = -sum ... log l                  D1 = -2 sum ... log l
///   U2 = sum ... log^2 l                 D2 = 4 sum ... log^2 l
enum class SeriesKind { U, U1, U2, D, D1, D2 };

/// Sum over ell = 1..L of the selected series at exponent alpha_eval.
double limit_series(const ModelParams& params, double alpha_eval,
                    SeriesKind kind, long L);

struct SeriesOptions {
  double rel_tol = 1e-10;
  long max_terms = 10'000'000;
};

struct SeriesValue {
  double value;
  long terms;  // truncation multipole at which the tail test passed
};

/// Infinite series limit by doubling-window truncation. Throws
/// ConvergenceError when max_terms is reached first.
SeriesValue limit_series_converged(const ModelParams& params, double alpha_eval,
                                   SeriesKind kind,
                                   const SeriesOptions& opts = {});

/// Q(alpha0) = (G0^2/2) (D''(alpha0) - D'(alpha0)^2 / D(alpha0)).
double limiting_information(const ModelParams& params,
                            const SeriesOptions& opts = {});

/// Same expression with every series truncated at L.
double limiting_information_truncated(const ModelParams& params, long L);

struct VarianceResult {
  double sigma2;
  double numerator;    // sum w_l^2 l^-2a (2l+1) C_l(0) C_{l;Z}
  double denominator;  // sum w_l^2 l^-2a (2l+1) C_l(0), w_l = 2 log l + D'/D
  long terms;
};

/// Asymptotic variance of sqrt(N) (alpha_hat - alpha0):
///   sigma^2 = (4 / G0^2) numerator / denominator^2.
VarianceResult asymptotic_variance(const ModelParams& params,
                                   const SeriesOptions& opts = {});

}  // namespace sphar
