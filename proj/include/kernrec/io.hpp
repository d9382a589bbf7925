#pragma once

/// \file
/// Text and binary writers. All numbers go through format_double, so output
/// is locale-independent and round-trips exactly.
///
/// Formats:
///   taps text     "# <header>" then one "t k(t)" line per t = -T..T
///   taps binary   2T+1 little-endian float64 values, k(-T) first, no header
///   time signal   "# <header>" then "t x(t)" lines, t = -S..S
///   spectrum      "# <header>" then "omega Re Im" lines on the grid
///   reports CSV   "# key: value" header lines, a column-name row, data rows

#include <bit>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernrec/format.hpp"
#include "kernrec/kernel.hpp"
#include "kernrec/recovery.hpp"
#include "kernrec/signals.hpp"

namespace kernrec {

inline constexpr const char* tool_version = "0.1.0";

/// A file could not be opened or read.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc
                                 : std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  return out;
}

inline std::string kernel_header(const KernelSpec& spec, int T) {
  return "kernel family=" + std::string(to_string(spec.weight.family())) +
         " nu=" + format_double(spec.weight.nu()) +
         " a=" + format_double(spec.weight.a()) +
         " p=" + format_double(spec.weight.p()) + " n=" + std::to_string(spec.n) +
         " T=" + std::to_string(T) + " epsilon_n=" + format_double(spec.epsilon_n) +
         " kappa=" + format_double(spec.kappa);
}

inline void write_taps_text(std::ostream& out, const KernelTaps& taps) {
  out << "# " << kernel_header(taps.spec, taps.half_length) << '\n';
  for (int t = -taps.half_length; t <= taps.half_length; ++t) {
    out << t << ' ' << format_double(taps.at(t)) << '\n';
  }
}

inline void write_taps_binary(std::ostream& out, const KernelTaps& taps) {
  for (double v : taps.taps) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(bytes, 8);
  }
}

/// Inverse of write_taps_binary; the element count must be odd.
inline std::vector<double> read_taps_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::vector<double> out;
  char bytes[8];
  while (in.read(bytes, 8)) {
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(bytes[i]);
    out.push_back(std::bit_cast<double>(bits));
  }
  if (in.gcount() != 0 || out.size() % 2 == 0) {
    throw io_error("'" + path + "' is not a tap array");
  }
  return out;
}

inline void write_time_signal(std::ostream& out, const TimeSignal& ts) {
  out << "# " << ts.description << '\n';
  for (int t = -ts.half_length; t <= ts.half_length; ++t) {
    out << t << ' ' << format_double(ts.at(t)) << '\n';
  }
}

inline void write_spectral_signal(std::ostream& out, const SpectralSignal& s) {
  out << "# " << s.description << " M=" << s.grid_size << '\n';
  for (int j = 0; j < s.grid_size; ++j) {
    const auto v = s.values[static_cast<std::size_t>(j)];
    out << format_double(s.omega(j)) << ' ' << format_double(v.real()) << ' '
        << format_double(v.imag()) << '\n';
  }
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* recovery_columns =
    "n,epsilon_n,kappa,estimate,truth,abs_error,spectral_bound,I2,I3,"
    "robust_bound,zero_residual,T,S,seed";

/// Quotes a field when it contains a comma, quote or newline.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

inline std::string join_messages(const RecoveryReport& r) {
  std::string out = r.error;
  for (const auto& w : r.warnings) {
    if (!out.empty()) out += "; ";
    out += w;
  }
  return out;
}

/// The fourteen recovery columns; robust_bound is empty without noise.
inline std::string recovery_row(const RecoveryReport& r) {
  std::string row;
  auto put = [&](const std::string& s) {
    if (!row.empty()) row += ',';
    row += s;
  };
  put(std::to_string(r.n));
  put(format_double(r.epsilon_n));
  put(format_double(r.kappa));
  put(format_double(r.estimate));
  put(format_double(r.truth));
  put(format_double(r.abs_error));
  put(format_double(r.spectral_bound));
  put(format_double(r.I2));
  put(format_double(r.I3));
  put(r.robust_bound ? format_double(*r.robust_bound) : std::string());
  put(format_double(r.zero_residual));
  put(std::to_string(r.T));
  put(std::to_string(r.S));
  put(std::to_string(r.seed));
  return row;
}

inline void write_header_lines(std::ostream& out,
                               const std::vector<std::pair<std::string, std::string>>& kv) {
  for (const auto& [k, v] : kv) out << "# " << k << ": " << v << '\n';
}

inline void write_recovery_csv(std::ostream& out,
                               const std::vector<RecoveryReport>& reports) {
  out << recovery_columns << ",errors\n";
  for (const auto& r : reports) {
    out << recovery_row(r) << ',' << csv_field(join_messages(r)) << '\n';
  }
}

/// Recovery columns plus sigma, truncation_slack, violation and errors,
/// then a "# summary" line.
inline std::size_t write_robustness_csv(std::ostream& out,
                                        const std::vector<RecoveryReport>& reports) {
  out << recovery_columns << ",sigma,truncation_slack,violation,errors\n";
  std::size_t violations = 0;
  for (const auto& r : reports) {
    if (r.violation) ++violations;
    out << recovery_row(r) << ','
        << (r.sigma ? format_double(*r.sigma) : std::string()) << ','
        << format_double(r.truncation_slack) << ',' << (r.violation ? 1 : 0) << ','
        << csv_field(join_messages(r)) << '\n';
  }
  out << "# summary: cells=" << reports.size() << " violations=" << violations << '\n';
  return violations;
}

}  // namespace kernrec
