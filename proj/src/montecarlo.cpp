#include "sphar/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include "sphar/errors.hpp"
#include "sphar/rng.hpp"

namespace sphar {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  if (v.size() < 2) return kNaN;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

McRecord run_replication(const McConfig& config, long N, int L, int r) {
  McRecord rec;
  rec.N = N;
  rec.r = r;
  rec.seed = derive_key({config.base_seed, static_cast<std::uint64_t>(N),
                         static_cast<std::uint64_t>(r)});
  try {
    SimConfig sim;
    sim.N = static_cast<int>(N);
    sim.L = L;
    sim.seed = rec.seed;
    const CoefficientPanel panel = simulate_panel(config.params, sim);
    const EmpiricalSpectra spectra(panel);
    EstimationResult est = estimate(spectra, config.space, config.estimator);
    rec.alpha_hat = est.alpha_hat;
    rec.g_hat = est.g_hat;
    rec.flags = est.flags;
    if (!est.has_flag(flags::kGOutOfRange)) {
      try {
        rec.std_error_alpha = std_error_alpha(panel.N(), est, config.params.h(),
                                              config.params.gamma(), config.series);
      } catch (const std::exception&) {
        rec.flags.emplace_back("std_error_unavailable");
      }
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

McNSummary summarise(const McConfig& config, long N, int L,
                     std::span<const McRecord> recs, double sigma2) {
  McNSummary s;
  s.N = N;
  s.L = L;
  s.replications = static_cast<int>(recs.size());
  s.sigma2_target = sigma2;
  const double a0 = config.params.alpha();
  const double g0 = config.params.g();
  std::vector<double> alpha, g, abs_err_a, abs_err_g, scaled;
  int far = 0;
  int covered = 0;
  for (const McRecord& rec : recs) {
    if (rec.failed()) {
      ++s.failed;
      continue;
    }
    if (!rec.flags.empty()) {
      ++s.flagged;
      continue;
    }
    alpha.push_back(rec.alpha_hat);
    g.push_back(rec.g_hat);
    abs_err_a.push_back(std::abs(rec.alpha_hat - a0));
    abs_err_g.push_back(std::abs(rec.g_hat - g0));
    scaled.push_back(std::sqrt(static_cast<double>(N)) * (rec.alpha_hat - a0));
    if (std::abs(rec.alpha_hat - a0) > 0.1) ++far;
    if (rec.std_error_alpha) {
      ++s.coverage_count;
      if (std::abs(rec.alpha_hat - a0) <= 1.96 * *rec.std_error_alpha) ++covered;
    }
  }
  s.used = static_cast<int>(alpha.size());
  s.alpha_mean = mean_of(alpha);
  s.alpha_median = median_of(alpha);
  s.alpha_variance = variance_of(alpha);
  s.g_mean = mean_of(g);
  s.g_median = median_of(g);
  s.g_variance = variance_of(g);
  s.bias = s.alpha_mean - a0;
  s.median_abs_err_alpha = median_of(abs_err_a);
  s.median_abs_err_g = median_of(abs_err_g);
  s.prob_far = s.used > 0 ? static_cast<double>(far) / s.used : kNaN;
  s.var_scaled = variance_of(scaled);
  if (scaled.size() >= 20) s.normality = normality_stats(scaled, sigma2);
  s.coverage = s.coverage_count > 0 ? static_cast<double>(covered) / s.coverage_count : kNaN;
  return s;
}

std::string join_flags(const McRecord& rec) {
  std::string out;
  for (const auto& f : rec.flags) {
    if (!out.empty()) out += ';';
    out += f;
  }
  if (rec.error) {
    if (!out.empty()) out += ';';
    out += "error";
  }
  return out;
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

NormalityStats normality_stats(std::span<const double> samples, double sigma2_target) {
  if (samples.size() < 20) {
    throw DomainError("normality_stats: need at least 20 samples, got " +
                      std::to_string(samples.size()));
  }
  if (!(sigma2_target > 0.0)) throw DomainError("normality_stats: sigma2_target must be > 0");
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  NormalityStats st;
  st.mean = mean;
  st.variance = m2 / (n - 1.0);
  m2 /= n;
  m3 /= n;
  m4 /= n;
  st.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : kNaN;
  st.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : kNaN;

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double scale = std::sqrt(2.0 * sigma2_target);
  double ks = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-sorted[i] / scale);
    ks = std::max({ks, (i + 1.0) / n - cdf, cdf - i / n});
  }
  st.ks_distance = ks;
  return st;
}

McSummary run_mc(const McConfig& config) {
  if (config.replications < 2) throw DomainError("run_mc: need at least 2 replications");
  if (config.n_list.empty()) throw DomainError("run_mc: N list is empty");
  for (std::size_t i = 0; i < config.n_list.size(); ++i) {
    if (config.n_list[i] < 2) throw DomainError("run_mc: every N must be >= 2");
    if (i > 0 && config.n_list[i] <= config.n_list[i - 1]) {
      throw DomainError("run_mc: N list must be strictly increasing");
    }
  }

  const double sigma2 = asymptotic_variance(config.params, config.series).sigma2;
  const std::size_t R = static_cast<std::size_t>(config.replications);
  std::vector<int> levels;
  for (long N : config.n_list) levels.push_back(truncation_schedule(N, config.schedule));

  McSummary summary;
  summary.sigma2_target = sigma2;
  summary.records.resize(config.n_list.size() * R);

  auto job = [&](std::size_t i) {
    const std::size_t k = i / R;
    summary.records[i] =
        run_replication(config, config.n_list[k], levels[k], static_cast<int>(i % R));
  };
  const std::size_t total = summary.records.size();
  const int workers = std::clamp<int>(config.workers, 1, static_cast<int>(total));
  if (workers == 1) {
    for (std::size_t i = 0; i < total; ++i) job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < total; i = next++) job(i);
      });
    }
  }

  for (std::size_t k = 0; k < config.n_list.size(); ++k) {
    const std::span<const McRecord> recs(summary.records.data() + k * R, R);
    const auto failed = std::count_if(recs.begin(), recs.end(),
                                      [](const McRecord& r) { return r.failed(); });
    if (2 * static_cast<std::size_t>(failed) > R) {
      const auto first = std::find_if(recs.begin(), recs.end(),
                                      [](const McRecord& r) { return r.failed(); });
      throw McAbortError("run_mc: " + std::to_string(failed) + " of " + std::to_string(R) +
                         " replications failed at N=" + std::to_string(config.n_list[k]) +
                         " (first error: " + *first->error + ")");
    }
    summary.per_n.push_back(summarise(config, config.n_list[k], levels[k], recs, sigma2));
  }
  return summary;
}

nlohmann::json to_json(const McSummary& summary) {
  nlohmann::json per_n = nlohmann::json::array();
  for (const McNSummary& s : summary.per_n) {
    nlohmann::json j = {
        {"N", s.N},
        {"L", s.L},
        {"replications", s.replications},
        {"used", s.used},
        {"flagged", s.flagged},
        {"failed", s.failed},
        {"alpha_mean", number_or_null(s.alpha_mean)},
        {"alpha_median", number_or_null(s.alpha_median)},
        {"alpha_variance", number_or_null(s.alpha_variance)},
        {"g_mean", number_or_null(s.g_mean)},
        {"g_median", number_or_null(s.g_median)},
        {"g_variance", number_or_null(s.g_variance)},
        {"bias", number_or_null(s.bias)},
        {"median_abs_err_alpha", number_or_null(s.median_abs_err_alpha)},
        {"median_abs_err_g", number_or_null(s.median_abs_err_g)},
        {"prob_far", number_or_null(s.prob_far)},
        {"var_scaled", number_or_null(s.var_scaled)},
        {"sigma2_target", number_or_null(s.sigma2_target)},
        {"coverage", number_or_null(s.coverage)},
        {"coverage_count", s.coverage_count},
    };
    if (s.normality) {
      j["normality"] = {{"mean", number_or_null(s.normality->mean)},
                        {"variance", number_or_null(s.normality->variance)},
                        {"skewness", number_or_null(s.normality->skewness)},
                        {"excess_kurtosis", number_or_null(s.normality->excess_kurtosis)},
                        {"ks_distance", number_or_null(s.normality->ks_distance)}};
    } else {
      j["normality"] = nullptr;
    }
    per_n.push_back(std::move(j));
  }
  nlohmann::json records = nlohmann::json::array();
  for (const McRecord& r : summary.records) {
    nlohmann::json j = {{"N", r.N},         {"r", r.r},
                        {"seed", r.seed},   {"alpha_hat", r.alpha_hat},
                        {"g_hat", r.g_hat}, {"flags", r.flags}};
    j["std_error_alpha"] = r.std_error_alpha ? nlohmann::json(*r.std_error_alpha)
                                             : nlohmann::json(nullptr);
    j["error"] = r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr);
    records.push_back(std::move(j));
  }
  return {{"sigma2_target", summary.sigma2_target}, {"per_n", per_n}, {"records", records}};
}

void write_records_csv(const McSummary& summary, std::ostream& out) {
  out << "N,r,seed,alpha_hat,g_hat,flags\n";
  char buf[160];
  for (const McRecord& r : summary.records) {
    std::snprintf(buf, sizeof buf, "%ld,%d,%llu,%.17g,%.17g,", r.N, r.r,
                  static_cast<unsigned long long>(r.seed), r.alpha_hat, r.g_hat);
    out << buf << join_flags(r) << "\n";
  }
}

void write_summary_csv(const McSummary& summary, std::ostream& out) {
  out << "N,L,bias,var_scaled,sigma2_target,skew,kurt,ks,coverage\n";
  char buf[320];
  for (const McNSummary& s : summary.per_n) {
    const double skew = s.normality ? s.normality->skewness : kNaN;
    const double kurt = s.normality ? s.normality->excess_kurtosis : kNaN;
    const double ks = s.normality ? s.normality->ks_distance : kNaN;
    std::snprintf(buf, sizeof buf, "%ld,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.N,
                  s.L, s.bias, s.var_scaled, s.sigma2_target, skew, kurt, ks, s.coverage);
    out << buf;
  }
}

}  // namespace sphar
