#pragma once

// Binary value-field snapshots, the JSON manifest that indexes them, and the
// per-slice diagnostics CSV.
//
// Snapshot layout (little-endian):
//   "PHJB1" (5 bytes) | u64 dims | dims x (f64 count, f64 lower, f64 upper)
//   | f64 z1 | f64 t_f | f64 kappa | size x f64 values (row-major)
// Periodicity is not stored; readers take it from the manifest.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "phjb/core.hpp"
#include "phjb/grid.hpp"
#include "phjb/hjb_solver.hpp"

namespace phjb {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

inline constexpr char kSnapshotMagic[5] = {'P', 'H', 'J', 'B', '1'};

struct Snapshot {
  Grid grid;
  double z1 = 0.0;
  double t_f = 0.0;
  double kappa = 0.0;
  std::vector<double> values;
};

namespace detail {

inline void put_f64(std::string& out, double v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

inline void put_u64(std::string& out, std::uint64_t v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : b_(bytes) {}
  template <class T>
  T get() {
    if (pos_ + sizeof(T) > b_.size()) throw Error("snapshot: truncated file");
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_snapshot(const Snapshot& s) {
  if (s.values.size() != s.grid.size()) throw ConfigError("snapshot: value count mismatch");
  std::string out(kSnapshotMagic, 5);
  detail::put_u64(out, s.grid.dims());
  for (std::size_t d = 0; d < s.grid.dims(); ++d) {
    detail::put_f64(out, double(s.grid.count(d)));
    detail::put_f64(out, s.grid.lower(d));
    detail::put_f64(out, s.grid.upper(d));
  }
  detail::put_f64(out, s.z1);
  detail::put_f64(out, s.t_f);
  detail::put_f64(out, s.kappa);
  out.reserve(out.size() + 8 * s.values.size());
  out.append(reinterpret_cast<const char*>(s.values.data()), 8 * s.values.size());
  return out;
}

/// `periodic` restores dimension periodicity (not part of the binary header).
inline Snapshot decode_snapshot(const std::string& bytes, const std::vector<bool>& periodic = {}) {
  if (bytes.size() < 13 || std::memcmp(bytes.data(), kSnapshotMagic, 5) != 0)
    throw Error("snapshot: bad magic");
  detail::Reader r(bytes);
  for (int i = 0; i < 5; ++i) r.get<char>();
  const auto dims = r.get<std::uint64_t>();
  if (dims == 0 || dims > kMaxDims) throw Error("snapshot: bad dimension count");
  std::vector<double> lo(dims), hi(dims);
  std::vector<std::size_t> counts(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    counts[d] = std::size_t(r.get<double>());
    lo[d] = r.get<double>();
    hi[d] = r.get<double>();
  }
  std::vector<bool> per = periodic;
  per.resize(dims, false);
  Snapshot s{Grid(lo, hi, counts, per), 0.0, 0.0, 0.0, {}};
  s.z1 = r.get<double>();
  s.t_f = r.get<double>();
  s.kappa = r.get<double>();
  if (r.remaining() != 8 * s.grid.size()) throw Error("snapshot: payload size mismatch");
  s.values.resize(s.grid.size());
  std::memcpy(s.values.data(), bytes.data() + (bytes.size() - r.remaining()), r.remaining());
  return s;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw Error("write failed: " + p.string());
}

/// FNV-1a, 64-bit.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

inline void write_diagnostics_csv(std::ostream& os, const std::vector<StepDiagnostic>& diag) {
  os.precision(17);
  os << "step,kappa,max_change,dt\n";
  for (const auto& d : diag) os << d.step << ',' << d.kappa << ',' << d.max_change << ',' << d.dt << '\n';
}

struct ManifestEntry {
  double z1 = 0.0;
  double t_f = 0.0;
  bool ok = false;
  std::string file;         // relative to the manifest directory
  std::string checksum;     // fnv1a64, hex
  std::string diagnostics;  // CSV, relative
  std::size_t steps = 0;
  std::string error;
};

struct Manifest {
  std::string schema = "pareto-hjb/1";
  std::string scenario;  // canonical scenario JSON
  std::vector<double> z1s, t_fs;
  std::vector<ManifestEntry> slices;  // t_f-major

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["schema"] = schema;
    j["scenario"] = nlohmann::ordered_json::parse(scenario);
    j["z1"] = z1s;
    j["t_f"] = t_fs;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : slices) {
      nlohmann::ordered_json s;
      s["z1"] = e.z1;
      s["t_f"] = e.t_f;
      s["status"] = e.ok ? "ok" : "failed";
      if (e.ok) {
        s["file"] = e.file;
        s["checksum"] = e.checksum;
        s["steps"] = e.steps;
      } else {
        s["error"] = e.error;
      }
      s["diagnostics"] = e.diagnostics;
      arr.push_back(s);
    }
    j["slices"] = arr;
    return j;
  }

  static Manifest from_json(const nlohmann::ordered_json& j) {
    Manifest m;
    try {
      m.schema = j.at("schema").get<std::string>();
      if (m.schema != "pareto-hjb/1") throw ConfigError("manifest: unsupported schema " + m.schema);
      m.scenario = j.at("scenario").dump();
      m.z1s = j.at("z1").get<std::vector<double>>();
      m.t_fs = j.at("t_f").get<std::vector<double>>();
      for (const auto& s : j.at("slices")) {
        ManifestEntry e;
        e.z1 = s.at("z1").get<double>();
        e.t_f = s.at("t_f").get<double>();
        e.ok = s.at("status").get<std::string>() == "ok";
        e.diagnostics = s.value("diagnostics", "");
        if (e.ok) {
          e.file = s.at("file").get<std::string>();
          e.checksum = s.at("checksum").get<std::string>();
          e.steps = s.at("steps").get<std::size_t>();
        } else {
          e.error = s.value("error", "");
        }
        m.slices.push_back(std::move(e));
      }
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(std::string("manifest: ") + ex.what());
    }
    return m;
  }
};

}  // namespace phjb
