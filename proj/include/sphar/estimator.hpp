#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sphar/model.hpp"
#include "sphar/simulate.hpp"
#include "sphar/spectra.hpp"

namespace sphar {

namespace flags {
inline constexpr const char* kBoundaryLow = "boundary_low";
inline constexpr const char* kBoundaryHigh = "boundary_high";
inline constexpr const char* kIdentifiability = "identifiability";
inline constexpr const char* kGOutOfRange = "g_out_of_range";
}  // namespace flags

struct EstimateOptions {
  int grid_points = 129;
  double refine_tol = 1e-8;
  bool keep_curve = false;
};

struct EstimationResult {
  double alpha_hat = 0.0;
  double g_hat = 0.0;
  double objective_at_opt = 0.0;  // U-hat^2 / D-hat at alpha_hat
  std::optional<std::vector<std::pair<double, double>>> reduced_curve;
  int evals = 0;
  std::optional<double> std_error_alpha;
  std::vector<std::string> flags;

  bool has_flag(const std::string& flag) const;
};

/// {alpha_hat, g_hat, objective, evals, std_error_alpha, flags[], curve?}
nlohmann::json to_json(const EstimationResult& result);

/// R_N(G, alpha) = (1/N) sum_t sum_l sum_m (a(t) - G l^-alpha a(t-1))^2,
/// evaluated directly from the panel.
double objective_full(const CoefficientPanel& panel, double g, double alpha);

/// Profiled scale G*(alpha) = U-hat(alpha) / D-hat(alpha).
/// Throws DegeneratePanelError when D-hat is zero.
double profile_g(const EmpiricalSpectra& spectra, double alpha);
double profile_g(const CoefficientPanel& panel, double alpha);

/// U-hat(alpha)^2 / D-hat(alpha); maximised by alpha-hat.
double reduced_objective(const EmpiricalSpectra& spectra, double alpha);
double reduced_objective(const CoefficientPanel& panel, double alpha);

/// 2 log U-hat - log D-hat, defined only when U-hat > 0.
std::optional<double> reduced_objective_log(const EmpiricalSpectra& spectra, double alpha);

/// Maximise the reduced objective over [a1, a2]: uniform grid, golden-section
/// search on the bracket around the best grid point (ties go to the smaller
/// alpha), then Newton polishing on the analytic score inside that bracket.
EstimationResult estimate(const EmpiricalSpectra& spectra, const ParamSpace& space,
                          const EstimateOptions& opts = {});
EstimationResult estimate(const CoefficientPanel& panel, const ParamSpace& space,
                          const EstimateOptions& opts = {});

/// S_N(alpha) = (-2 U' U D + D' U^2) / D^2, the alpha-derivative of R_N(G*, alpha).
double score(const EmpiricalSpectra& spectra, double alpha);
double score(const CoefficientPanel& panel, double alpha);

/// Q_N(alpha) = [2U''U D^2 + 2U'^2 D^2 - D''U^2 D - 4D'D U'U + 2U^2 D'^2] / D^3,
/// i.e. minus the second alpha-derivative of R_N(G*, alpha).
double information(const EmpiricalSpectra& spectra, double alpha);
double information(const CoefficientPanel& panel, double alpha);

/// Plug-in standard error sigma(G-hat, alpha-hat, H, gamma) / sqrt(N).
/// H and gamma are not estimated and must be supplied; throws DomainError
/// when either is missing or the plug-in parameters are inadmissible.
double std_error_alpha(int N, const EstimationResult& result, std::optional<double> h,
                       std::optional<double> gamma, const SeriesOptions& series = {});

/// V_N(alpha, alpha0) = log D_N(alpha)/D_N(alpha0) - 2 log U_N(alpha)/U_N(alpha0),
/// with population sums at truncation L.
double diagnostic_v(const ModelParams& params, double alpha, double alpha0, long L);

/// T_N(alpha, alpha0): empirical-to-population log ratios of U and D at the
/// panel's truncation. nullopt when any ratio is not positive.
std::optional<double> diagnostic_t(const EmpiricalSpectra& spectra, const ModelParams& params,
                                   double alpha, double alpha0);

}  // namespace sphar
