#include "sbridge/snapshot_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/core.h>

#include "json.hpp"
#include "sbridge/error.hpp"

namespace sbridge {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

double parse_double(std::string_view text, const fs::path& path, std::size_t line) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw Error(fmt::format("{}:{}: malformed number '{}'", path.string(), line, text));
  return v;
}

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

void write_snapshot(const fs::path& path, const ScalarField& field, double t, const std::string& quantity) {
  const Grid2D& g = field.grid();
  std::string text = fmt::format("# t={:.17g} nx={} ny={} x1min={:.17g} x1max={:.17g} x2min={:.17g} x2max={:.17g} "
                                 "quantity={}\n",
                                 t, g.nx(), g.ny(), g.x1_min(), g.x1_max(), g.x2_min(), g.x2_max(), quantity);
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      if (i) text += ',';
      text += fmt::format("{:.17g}", field(i, j));
    }
    text += '\n';
  }
  std::ofstream out = open_out(path);
  out << text;
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

SnapshotFile read_snapshot(const fs::path& path) {
  std::istringstream in(slurp(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw Error(fmt::format("{}: missing snapshot header", path.string()));

  std::map<std::string, std::string> meta;
  std::istringstream header(line.substr(2));
  std::string token;
  while (header >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw Error(fmt::format("{}: bad header token '{}'", path.string(), token));
    meta[token.substr(0, eq)] = token.substr(eq + 1);
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw Error(fmt::format("{}: header lacks '{}'", path.string(), key));
    return it->second;
  };
  auto count = [&](const char* key) {
    const double v = parse_double(get(key), path, 1);
    if (!(v >= 3.0) || v != std::floor(v)) throw Error(fmt::format("{}: bad {} in header", path.string(), key));
    return static_cast<std::size_t>(v);
  };
  const std::size_t nx = count("nx"), ny = count("ny");
  const Grid2D grid(parse_double(get("x1min"), path, 1), parse_double(get("x1max"), path, 1),
                    parse_double(get("x2min"), path, 1), parse_double(get("x2max"), path, 1), nx, ny);
  SnapshotFile out{parse_double(get("t"), path, 1), get("quantity"), ScalarField(grid)};

  for (std::size_t j = 0; j < ny; ++j) {
    if (!std::getline(in, line)) throw Error(fmt::format("{}: expected {} rows, found {}", path.string(), ny, j));
    std::size_t i = 0, start = 0;
    std::string_view row(line);
    while (true) {
      const auto comma = row.find(',', start);
      const std::string cell = trim(row.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (i >= nx) throw Error(fmt::format("{}:{}: more than {} values", path.string(), j + 2, nx));
      out.field(i++, j) = parse_double(cell, path, j + 2);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (i != nx) throw Error(fmt::format("{}:{}: expected {} values, found {}", path.string(), j + 2, nx, i));
  }
  while (std::getline(in, line))
    if (!trim(line).empty()) throw Error(fmt::format("{}: trailing data after {} rows", path.string(), ny));
  return out;
}

void write_manifest(const fs::path& dir, const Manifest& m) {
  ordered_json j;
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  j["tol"] = m.tol;
  j["times"] = m.times;
  ordered_json files = ordered_json::array();
  for (const ManifestEntry& e : m.files)
    files.push_back({{"file", e.file}, {"quantity", e.quantity}, {"t", e.t}, {"step", e.step}});
  j["files"] = std::move(files);
  std::ofstream out = open_out(dir / "manifest.json");
  out << j.dump(2) << '\n';
}

Manifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(slurp(path));
    m.converged = j.at("converged").get<bool>();
    m.iterations = j.at("iterations").get<int>();
    m.tol = j.at("tol").get<double>();
    m.times = j.at("times").get<std::vector<double>>();
    for (const auto& e : j.at("files"))
      m.files.push_back({e.at("file").get<std::string>(), e.at("quantity").get<std::string>(),
                         e.at("t").get<double>(), e.at("step").get<int>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("{}: malformed manifest ({})", path.string(), e.what()));
  }
  return m;
}

void write_convergence(const fs::path& path, const std::vector<TraceEntry>& trace) {
  std::string text = "iter,err_hilbert\n";
  for (const TraceEntry& e : trace) text += fmt::format("{},{:.17g}\n", e.iteration, e.err);
  std::ofstream out = open_out(path);
  out << text;
}

std::vector<TraceEntry> read_convergence(const fs::path& path) {
  std::istringstream in(slurp(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != "iter,err_hilbert")
    throw Error(fmt::format("{}: missing 'iter,err_hilbert' header", path.string()));
  std::vector<TraceEntry> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(fmt::format("{}:{}: expected two columns", path.string(), n));
    out.push_back({static_cast<int>(parse_double(trim(line.substr(0, comma)), path, n)),
                   parse_double(trim(line.substr(comma + 1)), path, n)});
  }
  return out;
}

OutputLock::OutputLock(const fs::path& dir) : path_(dir / ".sbridge.lock") {
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f)
    throw Error(fmt::format("output directory '{}' is in use by another writer (remove {} if stale)",
                            dir.string(), path_.filename().string()));
  std::fclose(f);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

std::vector<std::size_t> evenly_spaced(std::size_t n, std::size_t count) {
  std::vector<std::size_t> out;
  if (n == 0 || count == 0) return out;
  if (count == 1) return {n - 1};
  for (std::size_t k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(k) * static_cast<double>(n - 1) / static_cast<double>(count - 1)));
    if (out.empty() || out.back() != idx) out.push_back(idx);
  }
  return out;
}

}  // namespace sbridge
