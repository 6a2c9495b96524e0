#ifndef FLRWKG_REPORT_HPP
#define FLRWKG_REPORT_HPP

// Report artifacts: JSON documents, CSV tables with '#' metadata lines, raw
// field snapshots and a plotting script. Files are written to a temporary
// name and renamed into place.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "flrwkg/config.hpp"
#include "flrwkg/spectral_solver.hpp"

namespace flrwkg {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::ordered_json;

/// Shortest decimal that round-trips.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, p);
}

/// JSON number, or the strings "inf"/"-inf"/"nan".
inline json jnum(double x) {
  if (std::isfinite(x)) return json(x);
  return json(fmt(x));
}

inline json jopt(const std::optional<double>& x) { return x ? jnum(*x) : json(nullptr); }

inline void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("rename failed for " + path.string() + ": " + ec.message());
}

inline json report_header(const RunConfig& c, const std::string& command) {
  json j;
  j["tool"] = "flrwkg";
  j["version"] = kVersion;
  j["command"] = command;
  j["scenario"] = c.name;
  j["config_hash"] = hex64(c.hash);
  j["seed"] = c.seed;
  return j;
}

class CsvTable {
 public:
  CsvTable(const RunConfig& c, const std::string& command, std::vector<std::string> columns)
      : cols_(std::move(columns)) {
    meta_ = "# flrwkg " + std::string(kVersion) + "\n# command " + command + "\n# scenario " + c.name +
            "\n# config_hash " + hex64(c.hash) + "\n# seed " + std::to_string(c.seed) + "\n";
  }

  void note(const std::string& line) { meta_ += "# " + line + "\n"; }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_.size()) throw std::logic_error("csv row width mismatch");
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    rows_ += s + "\n";
  }

  std::string str() const {
    std::string h;
    for (std::size_t i = 0; i < cols_.size(); ++i) h += (i ? "," : "") + cols_[i];
    return meta_ + h + "\n" + rows_;
  }

 private:
  std::vector<std::string> cols_;
  std::string meta_, rows_;
};

inline const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> c{
      "t",         "a",        "M2",         "E",           "E_V",         "ut_l2",      "grad_l2",
      "mass_l2",   "sup_ut",   "sup_grad",   "sup_mass",    "spacetime",   "cdot_term",  "D_lin",
      "D_nl",      "linf_u",   "tail_fraction"};
  return c;
}

inline std::string trajectory_csv(const RunConfig& c, const Trajectory& tr) {
  CsvTable t(c, "simulate", trajectory_columns());
  t.note("status " + status_name(tr.status) + (tr.status_t ? " at t=" + fmt(*tr.status_t) : ""));
  t.note("grid " + std::to_string(tr.grid.points) + "^" + std::to_string(tr.grid.n) + " L=" + fmt(tr.grid.L));
  for (const auto& e : tr.samples)
    t.row({fmt(e.t), fmt(e.a), fmt(e.M2), fmt(e.E), fmt(e.E_V), fmt(e.ut_l2), fmt(e.grad_l2), fmt(e.mass_l2),
           fmt(e.sup_ut), fmt(e.sup_grad), fmt(e.sup_mass), fmt(e.spacetime), fmt(e.cdot_term),
           fmt(e.integrals.D_lin), fmt(e.integrals.D_nl), fmt(e.linf_u), fmt(e.tail_fraction)});
  return t.str();
}

/// Binary snapshot: "FKG1", uint32 n, uint32 points, uint32 fields, char[4]
/// dtype "f8le", double L, double t, then each field row-major (u, then v).
inline std::string snapshot_bytes(const TorusGrid& g, const FieldState& s) {
  std::string b = "FKG1";
  auto put = [&b](const void* p, std::size_t n) { b.append(static_cast<const char*>(p), n); };
  const std::uint32_t n = static_cast<std::uint32_t>(g.n), P = static_cast<std::uint32_t>(g.points), F = 2;
  put(&n, 4);
  put(&P, 4);
  put(&F, 4);
  b += "f8le";
  put(&g.L, 8);
  put(&s.t, 8);
  put(s.u.data(), s.u.size() * sizeof(double));
  put(s.v.data(), s.v.size() * sizeof(double));
  return b;
}

struct Snapshot {
  TorusGrid grid;
  FieldState state;
};

inline Snapshot read_snapshot(const std::string& bytes) {
  if (bytes.size() < 36 || bytes.compare(0, 4, "FKG1") != 0) throw std::runtime_error("not an FKG1 snapshot");
  std::size_t off = 4;
  auto get = [&](void* p, std::size_t n) {
    if (off + n > bytes.size()) throw std::runtime_error("truncated snapshot");
    std::memcpy(p, bytes.data() + off, n);
    off += n;
  };
  std::uint32_t n = 0, P = 0, F = 0;
  get(&n, 4);
  get(&P, 4);
  get(&F, 4);
  if (bytes.compare(off, 4, "f8le") != 0) throw std::runtime_error("unsupported snapshot dtype");
  off += 4;
  Snapshot s;
  s.grid.n = static_cast<int>(n);
  s.grid.points = static_cast<int>(P);
  get(&s.grid.L, 8);
  get(&s.state.t, 8);
  const std::size_t N = s.grid.total();
  s.state.u.resize(N);
  s.state.v.resize(N);
  get(s.state.u.data(), N * sizeof(double));
  if (F > 1) get(s.state.v.data(), N * sizeof(double));
  return s;
}

inline std::string plot_script(const std::string& csv_name) {
  return "import sys\n"
         "import numpy as np\n"
         "import matplotlib\n"
         "matplotlib.use('Agg')\n"
         "import matplotlib.pyplot as plt\n\n"
         "path = sys.argv[1] if len(sys.argv) > 1 else '" +
         csv_name +
         "'\n"
         "d = np.genfromtxt(path, delimiter=',', names=True, comments='#')\n"
         "fig, ax = plt.subplots(1, 2, figsize=(11, 4))\n"
         "ax[0].semilogy(d['t'], d['E'], label='E')\n"
         "ax[0].semilogy(d['t'], d['E_V'], '--', label='E_V')\n"
         "ax[0].set_xlabel('t')\n"
         "ax[0].legend()\n"
         "for k in ('sup_ut', 'sup_grad', 'sup_mass', 'spacetime'):\n"
         "    ax[1].plot(d['t'], d[k], label=k)\n"
         "ax[1].set_xlabel('t')\n"
         "ax[1].set_title('X-norm components')\n"
         "ax[1].legend()\n"
         "fig.tight_layout()\n"
         "fig.savefig(path.rsplit('.', 1)[0] + '.png', dpi=120)\n";
}

}  // namespace flrwkg

#endif  // FLRWKG_REPORT_HPP
