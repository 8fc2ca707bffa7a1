#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sphar/estimator.hpp"
#include "sphar/model.hpp"
#include "sphar/simulate.hpp"

namespace sphar {

struct McConfig {
  ModelParams params;
  ParamSpace space;
  std::vector<long> n_list;
  TruncationRule schedule = TruncationRule::fixed(20);
  int replications = 2;
  std::uint64_t base_seed = 0;
  EstimateOptions estimator;
  SeriesOptions series;
  int workers = 1;
};

struct McRecord {
  long N = 0;
  int r = 0;
  std::uint64_t seed = 0;
  double alpha_hat = 0.0;
  double g_hat = 0.0;
  std::optional<double> std_error_alpha;
  std::vector<std::string> flags;
  std::optional<std::string> error;

  bool failed() const noexcept { return error.has_value(); }
  bool excluded() const noexcept { return failed() || !flags.empty(); }
  bool operator==(const McRecord&) const = default;
};

struct NormalityStats {
  double mean = 0.0;
  double variance = 0.0;  // divisor n-1
  double skewness = 0.0;  // m3 / m2^1.5 with plug-in central moments
  double excess_kurtosis = 0.0;
  double ks_distance = 0.0;  // sup |F_n - Phi(. / sigma_target)|
  bool operator==(const NormalityStats&) const = default;
};

/// Moments and Kolmogorov-Smirnov distance to N(0, sigma2_target).
/// Requires at least 20 samples. Skewness and kurtosis are NaN for a sample
/// with zero spread.
NormalityStats normality_stats(std::span<const double> samples, double sigma2_target);

struct McNSummary {
  long N = 0;
  int L = 0;
  int replications = 0;
  int used = 0;      // unflagged, successful replications behind the statistics
  int flagged = 0;   // estimates carrying at least one flag
  int failed = 0;    // replications that raised an error
  double alpha_mean = 0.0, alpha_median = 0.0, alpha_variance = 0.0;
  double g_mean = 0.0, g_median = 0.0, g_variance = 0.0;
  double bias = 0.0;
  double median_abs_err_alpha = 0.0;
  double median_abs_err_g = 0.0;
  double prob_far = 0.0;    // fraction with |alpha_hat - alpha0| > 0.1
  double var_scaled = 0.0;  // variance of sqrt(N)(alpha_hat - alpha0)
  double sigma2_target = 0.0;
  /// Of sqrt(N)(alpha_hat - alpha0); nullopt with fewer than 20 used samples.
  std::optional<NormalityStats> normality;
  double coverage = 0.0;  // share of 95% plug-in intervals covering alpha0
  int coverage_count = 0;
  bool operator==(const McNSummary&) const = default;
};

struct McSummary {
  double sigma2_target = 0.0;
  std::vector<McNSummary> per_n;
  std::vector<McRecord> records;  // ordered by N, then r

  bool operator==(const McSummary&) const = default;
};

/// Raised when more than half of the replications at some N fail.
class McAbortError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// For each N, simulate R panels with L = schedule(N) and seed
/// derive_key(base_seed, N, r), estimate, and summarise. Output is identical
/// for any worker count.
McSummary run_mc(const McConfig& config);

nlohmann::json to_json(const McSummary& summary);
/// `N,r,seed,alpha_hat,g_hat,flags` with flags joined by ';'.
void write_records_csv(const McSummary& summary, std::ostream& out);
/// `N,L,bias,var_scaled,sigma2_target,skew,kurt,ks,coverage`.
void write_summary_csv(const McSummary& summary, std::ostream& out);

}  // namespace sphar
