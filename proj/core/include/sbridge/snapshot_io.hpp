#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sbridge/grid.hpp"
#include "sbridge/sinkhorn.hpp"

namespace sbridge {

/// Snapshot CSV layout:
///   # t=<t> nx=<nx> ny=<ny> x1min=<..> x1max=<..> x2min=<..> x2max=<..> quantity=<name>
/// followed by ny rows; row j holds the nx values f(0, j) ... f(nx-1, j)
/// (x2 increasing down the file, x1 increasing along a row). Every number is
/// printed with 17 significant digits, so a write/read round trip is exact.
struct SnapshotFile {
  double t = 0.0;
  std::string quantity;
  ScalarField field;
};

void write_snapshot(const std::filesystem::path& path, const ScalarField& field, double t,
                    const std::string& quantity);
SnapshotFile read_snapshot(const std::filesystem::path& path);

struct ManifestEntry {
  std::string file;  // relative to the manifest's directory
  std::string quantity;
  double t = 0.0;
  int step = 0;
};

struct Manifest {
  bool converged = false;
  int iterations = 0;
  double tol = 0.0;
  std::vector<double> times;  // every recovery time of the solution
  std::vector<ManifestEntry> files;
};

void write_manifest(const std::filesystem::path& dir, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& dir);

/// "iter,err_hilbert" header, one row per trace entry.
void write_convergence(const std::filesystem::path& path, const std::vector<TraceEntry>& trace);
std::vector<TraceEntry> read_convergence(const std::filesystem::path& path);

/// Exclusive claim on an output directory for the lifetime of the object.
/// A second writer fails with Error instead of interleaving files.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

/// `count` indices evenly spread over [0, n), always including 0 and n - 1
/// when count >= 2; duplicates are dropped.
std::vector<std::size_t> evenly_spaced(std::size_t n, std::size_t count);

}  // namespace sbridge
