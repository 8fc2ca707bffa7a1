#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sphar/harmonics.hpp"
#include "sphar/model.hpp"

namespace sphar {

struct PanelMeta {
  ModelParams params;
  std::uint64_t seed;
};

/// Harmonic coefficients a_{ell,m}(t) for ell = 1..L, m = -ell..ell and
/// t = 0..N. Each (ell, m) track is stored contiguously in t.
class CoefficientPanel {
 public:
  /// Zero-filled panel. Throws DomainError unless L >= 1 and N >= 1.
  CoefficientPanel(int L, int N);

  int L() const noexcept { return L_; }
  int N() const noexcept { return N_; }
  std::size_t time_slices() const noexcept { return static_cast<std::size_t>(N_) + 1; }
  std::size_t track_count() const noexcept { return static_cast<std::size_t>(L_) * (L_ + 2); }

  /// Position of track (ell, m) in storage order: ell ascending, m ascending.
  static std::size_t track_index(int ell, int m) noexcept {
    return static_cast<std::size_t>(ell * ell - 1 + ell + m);
  }

  double at(int ell, int m, int t) const;
  void set(int ell, int m, int t, double value);

  std::span<const double> track(int ell, int m) const;
  std::span<double> track(int ell, int m);

  const std::vector<double>& values() const noexcept { return values_; }

  const std::optional<PanelMeta>& meta() const noexcept { return meta_; }
  void set_meta(PanelMeta meta) { meta_ = std::move(meta); }

  bool operator==(const CoefficientPanel& other) const {
    return L_ == other.L_ && N_ == other.N_ && values_ == other.values_;
  }

 private:
  void check_index(int ell, int m) const;

  int L_;
  int N_;
  std::vector<double> values_;
  std::optional<PanelMeta> meta_;
};

enum class InitMode { Stationary, ZeroBurnin };

struct SimConfig {
  int N = 2;
  int L = 1;
  std::uint64_t seed = 0;
  InitMode init = InitMode::Stationary;
  int burnin = 0;
  /// Upper bound on the bytes held by the coefficient array.
  std::size_t memory_budget_bytes = std::size_t{1} << 30;
  /// Threads used to fill tracks; output does not depend on this.
  int workers = 1;
};

/// Simulate each (ell, m) track as an independent Gaussian AR(1)
///   a(t) = phi_ell a(t-1) + z(t),  z(t) ~ N(0, C_{ell;Z}),
/// started from the stationary law N(0, C_ell(0)) or from zero plus burn-in.
/// Track (ell, m) draws from a generator keyed by (seed, ell, m).
CoefficientPanel simulate_panel(const ModelParams& params, const SimConfig& config);

/// L_N rule: power(p) gives max(1, floor(N^p)); fixed(L) gives L.
struct TruncationRule {
  enum class Kind { Power, Fixed };
  Kind kind = Kind::Power;
  double exponent = 0.2;
  int fixed_l = 1;

  static TruncationRule power(double p);
  static TruncationRule fixed(int L);
  /// Parses "power:<p>" or "fixed:<L>".
  static TruncationRule parse(const std::string& text);
  std::string to_string() const;
};

int truncation_schedule(long N, const TruncationRule& rule);

/// Truncated field T_L(x, t) = sum_{ell=1}^{L} sum_m a_{ell,m}(t) Y_{ell,m}(x)
/// at each grid point. A monopole coefficient, when given, adds a_{0,0} Y_{0,0}.
std::vector<double> synthesize_field(const CoefficientPanel& panel, int t,
                                     std::span<const SpherePoint> grid,
                                     std::optional<double> monopole = std::nullopt);

}  // namespace sphar
