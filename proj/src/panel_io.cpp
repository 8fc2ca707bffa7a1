#include "sphar/panel_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "sphar/errors.hpp"

namespace sphar {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary panel format assumes a little-endian host");

constexpr char kMagic[8] = {'S', 'P', 'H', 'A', 'R', 'P', 'N', 'L'};

template <class T>
T parse_number(std::string_view text, const char* what) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw IoError(std::string("panel CSV: cannot parse ") + what + " '" +
                  std::string(text) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("panel binary: truncated file");
  return v;
}

}  // namespace

void write_panel_csv(const CoefficientPanel& panel, std::ostream& out) {
  out << "# sphar-panel v1\n";
  out << "# L=" << panel.L() << "\n";
  out << "# N=" << panel.N() << "\n";
  if (panel.meta()) {
    out << "# seed=" << panel.meta()->seed << "\n";
    out << "# params=" << to_json(panel.meta()->params).dump() << "\n";
  }
  out << "ell,m,t,value\n";
  char buf[96];
  for (int ell = 1; ell <= panel.L(); ++ell) {
    for (int m = -ell; m <= ell; ++m) {
      const auto track = panel.track(ell, m);
      for (std::size_t t = 0; t < track.size(); ++t) {
        const int n = std::snprintf(buf, sizeof buf, "%d,%d,%zu,%.17g\n", ell, m,
                                    t, track[t]);
        out.write(buf, n);
      }
    }
  }
  if (!out) throw IoError("panel CSV: write failed");
}

CoefficientPanel read_panel_csv(std::istream& in) {
  int L = -1;
  int N = -1;
  std::optional<std::uint64_t> seed;
  std::optional<ModelParams> params;
  struct Row {
    int ell, m, t;
    double value;
  };
  std::vector<Row> rows;
  bool saw_columns = false;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      s.remove_prefix(1);
      s = trim(s);
      if (s.starts_with("L=")) L = parse_number<int>(s.substr(2), "L");
      else if (s.starts_with("N=")) N = parse_number<int>(s.substr(2), "N");
      else if (s.starts_with("seed=")) seed = parse_number<std::uint64_t>(s.substr(5), "seed");
      else if (s.starts_with("params=")) {
        try {
          params = model_params_from_json(nlohmann::json::parse(s.substr(7)));
        } catch (const std::exception& e) {
          throw IoError(std::string("panel CSV: bad params header: ") + e.what());
        }
      }
      continue;
    }
    if (!saw_columns) {
      if (s != "ell,m,t,value") {
        throw IoError("panel CSV: expected header 'ell,m,t,value' at line " +
                      std::to_string(line_no));
      }
      saw_columns = true;
      continue;
    }
    std::string_view fields[4];
    std::size_t start = 0;
    for (int f = 0; f < 4; ++f) {
      const std::size_t comma = f < 3 ? s.find(',', start) : s.size();
      if (comma == std::string_view::npos) {
        throw IoError("panel CSV: expected 4 fields at line " + std::to_string(line_no));
      }
      fields[f] = trim(s.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields[3].find(',') != std::string_view::npos) {
      throw IoError("panel CSV: expected 4 fields at line " + std::to_string(line_no));
    }
    rows.push_back({parse_number<int>(fields[0], "ell"), parse_number<int>(fields[1], "m"),
                    parse_number<int>(fields[2], "t"),
                    parse_number<double>(fields[3], "value")});
  }
  if (!saw_columns) throw IoError("panel CSV: missing 'ell,m,t,value' header");
  if (L < 0 || N < 0) {
    for (const Row& r : rows) {
      L = std::max(L, r.ell);
      N = std::max(N, r.t);
    }
  }
  if (L < 1 || N < 1) throw IoError("panel CSV: empty or malformed panel");

  CoefficientPanel panel(L, N);
  std::vector<char> seen(panel.values().size(), 0);
  for (const Row& r : rows) {
    if (r.ell < 1 || r.ell > L || std::abs(r.m) > r.ell || r.t < 0 || r.t > N) {
      throw IoError("panel CSV: row (" + std::to_string(r.ell) + "," +
                    std::to_string(r.m) + "," + std::to_string(r.t) +
                    ") outside declared dimensions");
    }
    if (!std::isfinite(r.value)) throw IoError("panel CSV: non-finite value");
    const std::size_t idx =
        CoefficientPanel::track_index(r.ell, r.m) * panel.time_slices() +
        static_cast<std::size_t>(r.t);
    if (seen[idx]) throw IoError("panel CSV: duplicate row");
    seen[idx] = 1;
    panel.set(r.ell, r.m, r.t, r.value);
  }
  if (rows.size() != seen.size()) {
    throw IoError("panel CSV: expected " + std::to_string(seen.size()) +
                  " rows, found " + std::to_string(rows.size()));
  }
  if (params && seed) panel.set_meta({*params, *seed});
  return panel;
}

void write_panel_binary(const CoefficientPanel& panel, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, 1);
  put<std::int32_t>(out, panel.L());
  put<std::int32_t>(out, panel.N());
  put<std::uint8_t>(out, panel.meta() ? 1 : 0);
  if (panel.meta()) {
    const auto& p = panel.meta()->params;
    put<std::uint64_t>(out, panel.meta()->seed);
    for (double v : {p.g(), p.alpha(), p.h(), p.gamma()}) put<double>(out, v);
  }
  const auto& values = panel.values();
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw IoError("panel binary: write failed");
}

CoefficientPanel read_panel_binary(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw IoError("panel binary: bad magic");
  }
  if (get<std::uint32_t>(in) != 1) throw IoError("panel binary: unsupported version");
  const int L = get<std::int32_t>(in);
  const int N = get<std::int32_t>(in);
  if (L < 1 || N < 1) throw IoError("panel binary: bad dimensions");
  const bool has_meta = get<std::uint8_t>(in) != 0;
  std::optional<PanelMeta> meta;
  if (has_meta) {
    const auto seed = get<std::uint64_t>(in);
    const double g = get<double>(in);
    const double alpha = get<double>(in);
    const double h = get<double>(in);
    const double gamma = get<double>(in);
    try {
      meta = PanelMeta{ModelParams(g, alpha, h, gamma), seed};
    } catch (const DomainError& e) {
      throw IoError(std::string("panel binary: bad params: ") + e.what());
    }
  }
  CoefficientPanel panel(L, N);
  for (int ell = 1; ell <= L; ++ell) {
    for (int m = -ell; m <= ell; ++m) {
      auto track = panel.track(ell, m);
      in.read(reinterpret_cast<char*>(track.data()),
              static_cast<std::streamsize>(track.size() * sizeof(double)));
      if (!in) throw IoError("panel binary: truncated data");
    }
  }
  if (meta) panel.set_meta(*meta);
  return panel;
}

void write_panel(const CoefficientPanel& panel, const std::filesystem::path& path) {
  const bool binary = path.extension() == ".bin";
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  if (binary) write_panel_binary(panel, out);
  else write_panel_csv(panel, out);
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

CoefficientPanel read_panel(const std::filesystem::path& path) {
  const bool binary = path.extension() == ".bin";
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return binary ? read_panel_binary(in) : read_panel_csv(in);
}

}  // namespace sphar
