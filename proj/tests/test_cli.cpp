#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "cli_util.hpp"
#include "sphar/harmonics.hpp"
#include "sphar/model.hpp"
#include "sphar/simulate.hpp"
#include "sphar/panel_io.hpp"

using cliutil::run;
using cliutil::slurp;
namespace fs = std::filesystem;

namespace {
const std::string kModel = "--g 0.7 --alpha 1.5 --h 1 --gamma 3";

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}
}  // namespace

TEST_CASE("simulate") {
  const auto dir = cliutil::fresh_dir("sphar_cli_sim");
  const auto a = dir / "a.csv", b = dir / "b.csv";
  const std::string args = "simulate " + kModel + " --n 2000 --l 20 --seed 42 --out ";
  REQUIRE(run(args + a.string(), dir / "log") == 0);
  REQUIRE(run(args + b.string()) == 0);
  const std::string text = slurp(a);
  CHECK(text == slurp(b));
  // 2001 x 440 data rows plus the column header and the '#' lines.
  int data_rows = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line != "ell,m,t,value") ++data_rows;
  CHECK(data_rows == 2001 * 440);
  CHECK(slurp(dir / "log").find("L=20") != std::string::npos);
  CHECK(fs::exists(dir / "a.csv.manifest.json"));

  CHECK(run("simulate --g 0.7 --alpha 1.5 --gamma 3 --n 20 --l 2 --seed 1 --out " +
                (dir / "x.csv").string(),
            dir / "err") == 2);
  CHECK(slurp(dir / "err").find("--h") != std::string::npos);
  CHECK(run("simulate --g 0.7 --alpha 1.5 --h 1 --gamma 2 --n 20 --l 2 --seed 1 --out " +
            (dir / "x.csv").string()) == 2);
  CHECK(run("simulate " + kModel + " --n 20 --l 2 --seed 1 --out /nonexistent_dir/x.csv") == 3);
  CHECK(run("simulate " + kModel + " --n 1024 --schedule power:0.2 --seed 1 --out " +
            (dir / "s.bin").string()) == 0);
  CHECK(sphar::read_panel(dir / "s.bin").L() == 4);
}

TEST_CASE("estimate") {
  const auto dir = cliutil::fresh_dir("sphar_cli_est");
  const auto panel = dir / "p.csv";
  REQUIRE(run("simulate " + kModel + " --n 1000 --l 10 --seed 5 --out " + panel.string()) == 0);
  const auto out = dir / "r.json", curve = dir / "c.csv";
  REQUIRE(run("estimate --in " + panel.string() + " --a1 1.1 --a2 3 --h 1 --gamma 3 --grid 65 --curve " +
              curve.string() + " --out " + out.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j.contains("alpha_hat"));
  CHECK(j.contains("g_hat"));
  CHECK(j["std_error_alpha"].is_number());
  const std::string c = slurp(curve);
  CHECK(c.rfind("alpha,reduced_objective\n", 0) == 0);
  CHECK(count_lines(c) == 65 + 1);

  CHECK(run("estimate --in " + panel.string() + " --a1 1.2 --a2 1.1") == 2);
  CHECK(run("estimate --in " + (dir / "missing.csv").string() + " --a1 1.1 --a2 3") == 3);
  CHECK(run("estimate --in " + panel.string() + " --a1 1.1 --a2 3 --bogus 1") == 2);

  // L = 1 leaves alpha unidentified.
  const auto flat = dir / "flat.csv";
  REQUIRE(run("simulate " + kModel + " --n 100 --l 1 --seed 5 --out " + flat.string()) == 0);
  const auto fout = dir / "flat.json";
  CHECK(run("estimate --in " + flat.string() + " --a1 1.1 --a2 3 --out " + fout.string()) == 4);
  const auto fj = nlohmann::json::parse(slurp(fout));
  CHECK(fj["alpha_hat"] == 1.1);
}

TEST_CASE("variance") {
  const auto dir = cliutil::fresh_dir("sphar_cli_var");
  REQUIRE(run("variance " + kModel + " --tol 1e-10", dir / "hi") == 0);
  REQUIRE(run("variance " + kModel + " --tol 1e-6", dir / "lo") == 0);
  auto sigma2 = [&](const fs::path& p) {
    const std::string s = slurp(p);
    const auto k = s.find("sigma2 = ");
    REQUIRE(k != std::string::npos);
    return std::stod(s.substr(k + 9));
  };
  const double hi = sigma2(dir / "hi");
  const double lo = sigma2(dir / "lo");
  CHECK(hi == sphar::asymptotic_variance(sphar::ModelParams(0.7, 1.5, 1, 3), {1e-10, 10'000'000}).sigma2);
  CHECK(std::abs(hi - lo) / hi < 1e-5);
  CHECK(slurp(dir / "hi").find("truncation = ") != std::string::npos);
  CHECK(run("variance --g 0.7 --alpha 1.5 --h 1 --gamma 2") == 2);
  CHECK(run("variance " + kModel + " --tol 1e-15 --max-terms 100") == 5);
}

TEST_CASE("mc") {
  const auto dir = cliutil::fresh_dir("sphar_cli_mc");
  const auto t0 = std::chrono::steady_clock::now();
  REQUIRE(run("mc " + kModel + " --n-list 200 --r 10 --seed 1 --outdir " + (dir / "smoke").string()) == 0);
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 10.0);

  const std::string base = "mc " + kModel + " --n-list 200,400 --r 10 --seed 3 --schedule fixed:8 ";
  REQUIRE(run(base + "--workers 1 --outdir " + (dir / "w1").string()) == 0);
  REQUIRE(run(base + "--workers 8 --outdir " + (dir / "w8").string()) == 0);
  for (const char* f : {"replications.csv", "summary.csv", "summary.json"})
    CHECK(slurp(dir / "w1" / f) == slurp(dir / "w8" / f));
  CHECK(count_lines(slurp(dir / "w1" / "summary.csv")) == 1 + 2);
  CHECK(count_lines(slurp(dir / "w1" / "replications.csv")) == 1 + 20);
  CHECK(fs::exists(dir / "w1" / "manifest.json"));
  CHECK(run(base + "--grid 5 --outdir " + (dir / "bad").string()) == 6);
  CHECK(run("mc " + kModel + " --n-list 400,200 --r 10 --seed 3 --outdir " + (dir / "x").string()) == 2);
}

TEST_CASE("field") {
  const auto dir = cliutil::fresh_dir("sphar_cli_field");
  sphar::CoefficientPanel single(2, 3);
  single.set(1, 0, 2, 1.0);
  sphar::write_panel(single, dir / "one.csv");
  sphar::write_panel(sphar::CoefficientPanel(2, 3), dir / "zero.csv");

  REQUIRE(run("field --in " + (dir / "one.csv").string() + " --t 2 --nlat 6 --nlon 5 --out " +
              (dir / "f.csv").string()) == 0);
  std::istringstream in(slurp(dir / "f.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "theta,phi,value");
  int rows = 0;
  while (std::getline(in, line)) {
    double th, ph, v;
    char c1, c2;
    std::istringstream row(line);
    row >> th >> c1 >> ph >> c2 >> v;
    CHECK(v == doctest::Approx(std::sqrt(3 / (4 * std::numbers::pi)) * std::cos(th)).epsilon(1e-13));
    ++rows;
  }
  CHECK(rows == 30);

  REQUIRE(run("field --in " + (dir / "zero.csv").string() + " --t 0 --nlat 3 --nlon 3 --out " +
              (dir / "z.csv").string()) == 0);
  std::istringstream zin(slurp(dir / "z.csv"));
  std::getline(zin, line);
  while (std::getline(zin, line)) CHECK(line.substr(line.rfind(',') + 1) == "0");

  // Crude bound for a random panel: |T| <= sum |a| max|Y| over the grid.
  const auto rnd = sphar::simulate_panel(sphar::ModelParams(0.7, 1.5, 1, 3), {.N = 5, .L = 6, .seed = 2});
  sphar::write_panel(rnd, dir / "rnd.csv");
  REQUIRE(run("field --in " + (dir / "rnd.csv").string() + " --t 3 --nlat 10 --nlon 20 --out " +
              (dir / "r.csv").string()) == 0);
  std::vector<sphar::SpherePoint> pts;
  double vmax = 0.0;
  {
    std::istringstream rin(slurp(dir / "r.csv"));
    std::getline(rin, line);
    while (std::getline(rin, line)) {
      double th, ph, v;
      char c1, c2;
      std::istringstream row(line);
      row >> th >> c1 >> ph >> c2 >> v;
      pts.emplace_back(th, ph);
      vmax = std::max(vmax, std::abs(v));
    }
  }
  double bound = 0.0;
  for (int l = 1; l <= 6; ++l)
    for (int m = -l; m <= l; ++m) {
      double ymax = 0.0;
      for (const auto& x : pts) ymax = std::max(ymax, std::abs(sphar::real_sph_harm(l, m, x)));
      bound += std::abs(rnd.at(l, m, 3)) * ymax;
    }
  CHECK(pts.size() == 200);
  CHECK(vmax <= bound);

  CHECK(run("field --in " + (dir / "one.csv").string() + " --t 4 --nlat 3 --nlon 3 --out " +
            (dir / "o.csv").string()) == 2);
}

TEST_CASE("manifest replay") {
  const auto dir = cliutil::fresh_dir("sphar_cli_replay");
  const auto p = dir / "p.bin";
  REQUIRE(run("simulate " + kModel + " --n 300 --l 6 --seed 9 --out " + p.string()) == 0);
  const auto mpath = dir / "p.bin.manifest.json";
  const auto m = nlohmann::json::parse(slurp(mpath));
  CHECK(m["command"] == "simulate");
  CHECK(m.contains("tool_version"));
  CHECK(m.contains("wall_clock_seconds"));
  CHECK(m["outputs"][0] == p.string());
  const std::string before = slurp(p);
  fs::remove(p);
  REQUIRE(run("replay --manifest " + mpath.string()) == 0);
  CHECK(slurp(p) == before);
  CHECK(run("replay") == 2);
}
