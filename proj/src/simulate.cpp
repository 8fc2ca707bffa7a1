#include "sphar/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

#include "sphar/errors.hpp"
#include "sphar/rng.hpp"

namespace sphar {

CoefficientPanel::CoefficientPanel(int L, int N) : L_(L), N_(N) {
  if (L < 1) throw DomainError("CoefficientPanel: need L >= 1");
  if (N < 1) throw DomainError("CoefficientPanel: need N >= 1");
  values_.assign(track_count() * time_slices(), 0.0);
}

void CoefficientPanel::check_index(int ell, int m) const {
  if (ell < 1 || ell > L_ || std::abs(m) > ell) {
    throw IndexError("CoefficientPanel: (ell=" + std::to_string(ell) + ", m=" +
                     std::to_string(m) + ") outside panel with L=" +
                     std::to_string(L_));
  }
}

double CoefficientPanel::at(int ell, int m, int t) const {
  check_index(ell, m);
  if (t < 0 || t > N_) throw IndexError("CoefficientPanel: t out of range");
  return values_[track_index(ell, m) * time_slices() + static_cast<std::size_t>(t)];
}

void CoefficientPanel::set(int ell, int m, int t, double value) {
  check_index(ell, m);
  if (t < 0 || t > N_) throw IndexError("CoefficientPanel: t out of range");
  values_[track_index(ell, m) * time_slices() + static_cast<std::size_t>(t)] = value;
}

std::span<const double> CoefficientPanel::track(int ell, int m) const {
  check_index(ell, m);
  return {values_.data() + track_index(ell, m) * time_slices(), time_slices()};
}

std::span<double> CoefficientPanel::track(int ell, int m) {
  check_index(ell, m);
  return {values_.data() + track_index(ell, m) * time_slices(), time_slices()};
}

namespace {

void fill_track(std::span<double> out, double phi, double c0, double cz,
                const SimConfig& config, std::uint64_t key) {
  CounterRng rng(key);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sz = std::sqrt(cz);
  double a = 0.0;
  if (config.init == InitMode::Stationary) {
    a = std::sqrt(c0) * normal(rng);
  } else {
    for (int b = 0; b < config.burnin; ++b) a = phi * a + sz * normal(rng);
  }
  out[0] = a;
  for (std::size_t t = 1; t < out.size(); ++t) {
    a = phi * a + sz * normal(rng);
    out[t] = a;
  }
}

}  // namespace

CoefficientPanel simulate_panel(const ModelParams& params, const SimConfig& config) {
  if (config.N < 2) throw DomainError("simulate_panel: need N >= 2");
  if (config.L < 1) throw DomainError("simulate_panel: need L >= 1");
  if (config.burnin < 0) throw DomainError("simulate_panel: need burn-in >= 0");
  const double bytes = 8.0 * static_cast<double>(config.L) * (config.L + 2.0) *
                       (config.N + 1.0);
  if (bytes > static_cast<double>(config.memory_budget_bytes)) {
    throw ResourceError("simulate_panel: panel needs " +
                        std::to_string(static_cast<long long>(bytes)) +
                        " bytes, budget is " +
                        std::to_string(config.memory_budget_bytes));
  }

  CoefficientPanel panel(config.L, config.N);
  panel.set_meta({params, config.seed});

  struct Job {
    int ell;
    int m;
  };
  std::vector<Job> jobs;
  jobs.reserve(panel.track_count());
  for (int ell = 1; ell <= config.L; ++ell) {
    for (int m = -ell; m <= ell; ++m) jobs.push_back({ell, m});
  }

  auto run = [&](const Job& job) {
    const double phi = phi_ell(params, job.ell);
    const double cz = noise_spectrum(params, job.ell);
    const double c0 = cz / (1.0 - phi * phi);
    const std::uint64_t key =
        derive_key({config.seed, static_cast<std::uint64_t>(job.ell),
                    static_cast<std::uint64_t>(job.m + job.ell)});
    fill_track(panel.track(job.ell, job.m), phi, c0, cz, config, key);
  };

  const int workers = std::clamp<int>(config.workers, 1, static_cast<int>(jobs.size()));
  if (workers == 1) {
    for (const Job& job : jobs) run(job);
    return panel;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) run(jobs[i]);
    });
  }
  pool.clear();
  return panel;
}

TruncationRule TruncationRule::power(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("truncation rule: need 0 < p < 1");
  TruncationRule r;
  r.kind = Kind::Power;
  r.exponent = p;
  return r;
}

TruncationRule TruncationRule::fixed(int L) {
  if (L < 1) throw DomainError("truncation rule: need L >= 1");
  TruncationRule r;
  r.kind = Kind::Fixed;
  r.fixed_l = L;
  return r;
}

TruncationRule TruncationRule::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw DomainError("truncation rule '" + text + "': expected power:<p> or fixed:<L>");
  }
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  try {
    std::size_t used = 0;
    if (kind == "power") {
      const double p = std::stod(arg, &used);
      if (used == arg.size()) return power(p);
    } else if (kind == "fixed") {
      const int L = std::stoi(arg, &used);
      if (used == arg.size()) return fixed(L);
    }
  } catch (const std::logic_error&) {
    // fall through to the error below
  }
  throw DomainError("truncation rule '" + text + "': expected power:<p> or fixed:<L>");
}

std::string TruncationRule::to_string() const {
  if (kind == Kind::Fixed) return "fixed:" + std::to_string(fixed_l);
  char buf[48];
  std::snprintf(buf, sizeof buf, "power:%.17g", exponent);
  return buf;
}

int truncation_schedule(long N, const TruncationRule& rule) {
  if (N < 1) throw DomainError("truncation_schedule: need N >= 1");
  if (rule.kind == TruncationRule::Kind::Fixed) return rule.fixed_l;
  const double r = std::pow(static_cast<double>(N), rule.exponent);
  // Absorb pow() rounding at exact integer powers such as 1024^(1/5) = 4.
  const double floored = std::floor(r * (1.0 + 1e-12));
  return std::max(1, static_cast<int>(floored));
}

std::vector<double> synthesize_field(const CoefficientPanel& panel, int t,
                                     std::span<const SpherePoint> grid,
                                     std::optional<double> monopole) {
  if (t < 0 || t > panel.N()) {
    throw IndexError("synthesize_field: t=" + std::to_string(t) +
                     " outside [0, " + std::to_string(panel.N()) + "]");
  }
  const int L = panel.L();
  std::vector<double> coeff(static_cast<std::size_t>(L + 1) * (L + 1), 0.0);
  for (int ell = 1; ell <= L; ++ell) {
    for (int m = -ell; m <= ell; ++m) {
      coeff[static_cast<std::size_t>(ell * ell + ell + m)] = panel.at(ell, m, t);
    }
  }
  if (monopole) coeff[0] = *monopole;

  std::vector<double> field;
  field.reserve(grid.size());
  for (const SpherePoint& x : grid) {
    const std::vector<double> y = real_sph_harm_all(L, x);
    double v = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) v += coeff[i] * y[i];
    field.push_back(v);
  }
  return field;
}

}  // namespace sphar
