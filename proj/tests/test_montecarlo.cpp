#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "sphar/errors.hpp"
#include "sphar/montecarlo.hpp"
#include "sphar/rng.hpp"

using namespace sphar;

namespace {
McConfig small_config(int workers = 1) {
  return {.params = ModelParams(0.7, 1.5, 1.0, 3.0),
          .space = ParamSpace(1.1, 3.0),
          .n_list = {200, 400},
          .schedule = TruncationRule::fixed(10),
          .replications = 24,
          .base_seed = 31,
          .estimator = {},
          .series = {},
          .workers = workers};
}
}  // namespace

TEST_CASE("normality_stats") {
  const std::vector<double> zeros(25, 0.0);
  const auto z = normality_stats(zeros, 2.0);
  CHECK(z.mean == 0.0);
  CHECK(z.variance == 0.0);
  CHECK(z.ks_distance == doctest::Approx(0.5));
  CHECK(std::isnan(z.skewness));

  CHECK_THROWS_AS(normality_stats(std::vector<double>(19, 1.0), 1.0), DomainError);
  CHECK_THROWS_AS(normality_stats(zeros, 0.0), DomainError);

  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal(0.0, std::sqrt(3.0));
  std::vector<double> x(100000);
  for (double& v : x) v = normal(rng);
  const auto st = normality_stats(x, 3.0);
  CHECK(st.ks_distance < 0.01);
  CHECK(std::abs(st.skewness) < 0.03);
  CHECK(std::abs(st.excess_kurtosis) < 0.06);
  CHECK(st.variance == doctest::Approx(3.0).epsilon(0.02));

  std::vector<double> shifted(x.begin(), x.begin() + 500);
  const auto base = normality_stats(shifted, 3.0);
  for (double& v : shifted) v += 4.25;
  const auto moved = normality_stats(shifted, 3.0);
  CHECK(moved.mean == doctest::Approx(base.mean + 4.25).epsilon(1e-12));
  CHECK(moved.variance == doctest::Approx(base.variance).epsilon(1e-9));
  CHECK(moved.skewness == doctest::Approx(base.skewness).epsilon(1e-7));
  CHECK(moved.excess_kurtosis == doctest::Approx(base.excess_kurtosis).epsilon(1e-7));
}

TEST_CASE("bookkeeping with R = 2") {
  McConfig cfg = small_config();
  cfg.replications = 2;
  const auto s = run_mc(cfg);
  REQUIRE(s.per_n.size() == 2);
  CHECK(s.records.size() == 4);
  const auto& first = s.per_n[0];
  CHECK(first.replications == 2);
  CHECK(first.used + first.flagged + first.failed == 2);
  CHECK_FALSE(first.normality);
  if (first.used == 2) {
    const double a = s.records[0].alpha_hat, b = s.records[1].alpha_hat;
    const double m = 0.5 * (a + b);
    CHECK(first.alpha_variance ==
          doctest::Approx((a - m) * (a - m) + (b - m) * (b - m)).epsilon(1e-12));
  }
  CHECK(s.records[1].seed == derive_key({31, 200, 1}));
  CHECK(s.records[2].N == 400);
  CHECK(s.records[2].r == 0);
}

TEST_CASE("determinism and worker independence") {
  const auto a = run_mc(small_config(1));
  const auto b = run_mc(small_config(1));
  const auto c = run_mc(small_config(3));
  CHECK(a == b);
  CHECK(a == c);
  std::ostringstream ja, jc;
  write_records_csv(a, ja);
  write_records_csv(c, jc);
  CHECK(ja.str() == jc.str());
  CHECK(to_json(a).dump() == to_json(c).dump());
}

TEST_CASE("summary contents and exports") {
  const auto s = run_mc(small_config());
  for (const auto& n : s.per_n) {
    CHECK(n.L == 10);
    CHECK(n.used + n.flagged + n.failed == 24);
    CHECK(n.sigma2_target == s.sigma2_target);
    CHECK(n.used >= 20);
    REQUIRE(n.normality);
    CHECK(n.var_scaled == doctest::Approx(n.normality->variance).epsilon(1e-12));
    CHECK(n.coverage >= 0.0);
    CHECK(n.coverage <= 1.0);
    CHECK(n.bias == doctest::Approx(n.alpha_mean - 1.5));
  }
  std::ostringstream rec, sum;
  write_records_csv(s, rec);
  write_summary_csv(s, sum);
  std::istringstream rin(rec.str()), sin(sum.str());
  std::string line;
  std::getline(rin, line);
  CHECK(line == "N,r,seed,alpha_hat,g_hat,flags");
  int rows = 0;
  while (std::getline(rin, line)) ++rows;
  CHECK(rows == 48);
  std::getline(sin, line);
  CHECK(line == "N,L,bias,var_scaled,sigma2_target,skew,kurt,ks,coverage");
  rows = 0;
  while (std::getline(sin, line)) ++rows;
  CHECK(rows == 2);

  const auto j = to_json(s);
  CHECK(j["per_n"].size() == 2);
  CHECK(j["records"].size() == 48);
  CHECK(j["per_n"][0].contains("normality"));
}

TEST_CASE("configuration errors and abort") {
  McConfig c = small_config();
  c.replications = 1;
  CHECK_THROWS_AS(run_mc(c), DomainError);
  c = small_config();
  c.n_list = {};
  CHECK_THROWS_AS(run_mc(c), DomainError);
  c.n_list = {400, 200};
  CHECK_THROWS_AS(run_mc(c), DomainError);
  c.n_list = {1};
  CHECK_THROWS_AS(run_mc(c), DomainError);

  c = small_config();
  c.estimator.grid_points = 5;  // every replication raises
  CHECK_THROWS_AS(run_mc(c), McAbortError);
}
