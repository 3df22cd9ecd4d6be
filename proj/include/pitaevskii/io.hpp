#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "pitaevskii/diagnostics.hpp"
#include "pitaevskii/stability.hpp"

namespace pitaevskii {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Snapshot decode failures. kind() says which check failed.
class SnapshotError : public IoError {
 public:
  enum class Kind { Corrupt, Magic, Version, DimensionMismatch };
  SnapshotError(Kind k, const std::string& what) : IoError(what), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Shortest-safe decimal: 17 significant digits reparse to the same double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- time series ----------------------------------------------------------

inline void write_timeseries(std::ostream& os, std::span<const DiagnosticsRecord> records, std::size_t every = 1) {
  const auto cols = DiagnosticsRecord::csv_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';
  if (every == 0) every = 1;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i % every != 0 && i + 1 != records.size()) continue;
    const auto& r = records[i];
    const double v[] = {r.t,       r.energy,  r.d_visc,      r.d_relax,     r.m_sf,        r.m_fluid, r.rho_min,
                        r.rho_max, r.X,       r.Y,           r.sob_psi,     r.sob_u,       r.sob_bpsi, r.dt_psi,
                        r.dt_u,    r.dt_rho,  r.momentum[0], r.momentum[1], r.momentum[2], r.div_u,   r.step_dt};
    static_assert(std::size(v) == cols.size());
    for (std::size_t c = 0; c < std::size(v); ++c) os << (c ? "," : "") << format_double(v[c]);
    os << '\n';
  }
}

inline void write_timeseries(std::span<const DiagnosticsRecord> records, const std::string& path,
                             std::size_t every = 1) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  write_timeseries(f, records, every);
  if (!f) throw IoError("write to '" + path + "' failed");
}

// ---- stability report -------------------------------------------------------

/// One row per diagnostic time (D components, H and its terms), then a
/// '#'-prefixed summary block.
inline void write_stability_report(std::ostream& os, const StabilityReport& rep) {
  os << "t,phi,grad_phi,Phi,sigma,D,H,H_integral";
  for (const char* n : GronwallBundle::names()) os << ',' << n;
  os << '\n';
  for (const auto& r : rep.rows) {
    const double v[] = {r.diff.t, r.diff.phi, r.diff.grad_phi, r.diff.Phi, r.diff.sigma, r.diff.D, r.diff.H,
                        r.H_integral};
    for (std::size_t c = 0; c < std::size(v); ++c) os << (c ? "," : "") << format_double(v[c]);
    for (double x : r.bundle.terms) os << ',' << format_double(x);
    os << '\n';
  }
  os << "# c_hat = " << format_double(rep.c_hat) << '\n'
     << "# envelope_max_ratio = " << format_double(rep.envelope_max_ratio) << '\n'
     << "# envelope_margin = " << format_double(rep.envelope_margin) << '\n'
     << "# envelope_pass = " << (rep.envelope_pass ? "true" : "false") << '\n'
     << "# sup_growth = " << format_double(rep.sup_growth) << '\n'
     << "# H_integral_total = " << format_double(rep.H_integral_total) << '\n'
     << "# determinism_ok = " << (rep.determinism_ok ? "true" : "false") << '\n'
     << "# completed = " << (rep.completed ? "true" : "false") << '\n';
  if (rep.stop) os << "# stop = " << rep.stop->message << '\n';
}

// ---- snapshots ------------------------------------------------------------
//
// "PITV", version byte 1, then little-endian:
//   u32 d; u32 n[d]; f64 len[d]; f64 t;
//   f64 lambda, mu, nu, m, M, epsilon, delta, gamma;
//   f64 rho[N]; f64 u_0[N] .. u_{d-1}[N]; f64 (re, im) psi[N]
// Arrays are row-major, axis 0 slowest.

inline constexpr char kSnapshotMagic[4] = {'P', 'I', 'T', 'V'};
inline constexpr std::uint8_t kSnapshotVersion = 1;

struct Snapshot {
  State state;
  Params params;
};

namespace detail {

template <class U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U r = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) r |= ((v >> (8 * i)) & 0xFF) << (8 * (sizeof(U) - 1 - i));
    return r;
  } else {
    return v;
  }
}

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { put(to_little(v)); }
  void f64(double v) { put(to_little(std::bit_cast<std::uint64_t>(v))); }
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  const std::string& bytes() const { return buf_; }

 private:
  template <class U>
  void put(U v) {
    char b[sizeof(U)];
    std::memcpy(b, &v, sizeof(U));
    buf_.append(b, sizeof(U));
  }
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string data) : data_(std::move(data)) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() { return to_little(get<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(to_little(get<std::uint64_t>())); }
  const char* take(std::size_t n) {
    if (data_.size() - pos_ < n)
      throw SnapshotError(SnapshotError::Kind::Corrupt, "corrupt snapshot: truncated at byte " + std::to_string(pos_));
    const char* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  template <class U>
  U get() {
    U v;
    std::memcpy(&v, take(sizeof(U)), sizeof(U));
    return v;
  }
  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_snapshot(const State& s, const Params& p) {
  s.check_consistent();
  const Grid& g = s.grid();
  detail::ByteWriter w;
  w.raw(kSnapshotMagic, 4);
  w.u8(kSnapshotVersion);
  w.u32(static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) w.u32(static_cast<std::uint32_t>(g.n(a)));
  for (int a = 0; a < g.dim(); ++a) w.f64(g.len(a));
  w.f64(s.t);
  for (double v : {p.lambda, p.mu, p.nu, p.m, p.M, p.epsilon, p.delta, p.gamma}) w.f64(v);
  for (double v : s.rho.values()) w.f64(v);
  for (int a = 0; a < g.dim(); ++a)
    for (double v : s.u[a].values()) w.f64(v);
  for (const cplx& z : s.psi.values()) {
    w.f64(z.real());
    w.f64(z.imag());
  }
  return w.bytes();
}

/// Decodes a snapshot. If expected is given, the stored grid must match it.
inline Snapshot decode_snapshot(std::string bytes, const Grid* expected = nullptr) {
  detail::ByteReader r(std::move(bytes));
  const char* magic = r.take(4);
  if (std::memcmp(magic, kSnapshotMagic, 4) != 0)
    throw SnapshotError(SnapshotError::Kind::Magic, "corrupt snapshot: bad magic");
  if (const auto v = r.u8(); v != kSnapshotVersion)
    throw SnapshotError(SnapshotError::Kind::Version, "unsupported snapshot version " + std::to_string(v));
  const std::uint32_t d = r.u32();
  if (d < 1 || d > kMaxDim) throw SnapshotError(SnapshotError::Kind::Corrupt, "corrupt snapshot: bad dimension");
  std::vector<std::size_t> n(d);
  std::vector<double> len(d);
  for (auto& x : n) x = r.u32();
  for (auto& x : len) x = r.f64();
  GridPtr grid;
  try {
    grid = make_grid(static_cast<int>(d), n, len);
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(SnapshotError::Kind::Corrupt, std::string("corrupt snapshot: ") + e.what());
  }
  if (expected && !(*expected == *grid))
    throw SnapshotError(SnapshotError::Kind::DimensionMismatch, "snapshot grid does not match the expected grid");
  // Check the payload size before allocating fields.
  const std::size_t N = grid->size();
  const std::size_t payload = 8 * (9 + N * (1 + d + 2));
  if (r.remaining() < payload) throw SnapshotError(SnapshotError::Kind::Corrupt, "corrupt snapshot: truncated");
  if (r.remaining() > payload) throw SnapshotError(SnapshotError::Kind::Corrupt, "corrupt snapshot: trailing bytes");

  Snapshot out;
  State& s = out.state;
  s = make_state(grid);
  s.t = r.f64();
  Params& p = out.params;
  for (double* v : {&p.lambda, &p.mu, &p.nu, &p.m, &p.M, &p.epsilon, &p.delta, &p.gamma}) *v = r.f64();
  for (auto& v : s.rho.values()) v = r.f64();
  for (std::uint32_t a = 0; a < d; ++a)
    for (auto& v : s.u[a].values()) v = r.f64();
  for (auto& z : s.psi.values()) {
    const double re = r.f64();
    z = cplx(re, r.f64());
  }
  return out;
}

inline void write_snapshot(const State& s, const Params& p, const std::string& path) {
  const auto bytes = encode_snapshot(s, p);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write to '" + path + "' failed");
}

inline Snapshot read_snapshot(const std::string& path, const Grid* expected = nullptr) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_snapshot(std::move(ss).str(), expected);
}

}  // namespace pitaevskii
