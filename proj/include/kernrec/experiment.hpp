#pragma once

/// \file
/// Subcommand drivers behind the kernrec CLI. Each returns a process exit
/// code (0 ok, 2 numerical failure) and lets config_error propagate.
/// Nothing schedule-dependent (thread count, time, paths) reaches an output
/// file, so outputs are byte-identical across runs and thread counts.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kernrec/config.hpp"
#include "kernrec/format.hpp"
#include "kernrec/io.hpp"
#include "kernrec/kernel.hpp"
#include "kernrec/recovery.hpp"
#include "kernrec/signals.hpp"
#include "kernrec/weights.hpp"

namespace kernrec {

struct RunOptions {
  /// Output file (recover, robustness, validate-weight) or directory
  /// (kernel). Empty means the config's output_path.
  std::string out;
  unsigned threads = 1;
  std::function<void(const std::string&)> log = [](const std::string&) {};
};

namespace detail {

inline std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string s;
  for (auto v : seeds) {
    if (!s.empty()) s += ' ';
    s += std::to_string(v);
  }
  return s;
}

inline std::vector<std::pair<std::string, std::string>> run_header(
    const ExperimentConfig& cfg, const std::string& command,
    const std::string& signal_description) {
  std::vector<std::pair<std::string, std::string>> kv{
      {"tool", std::string("kernrec ") + tool_version},
      {"command", command},
      {"config_hash", config_hash(cfg)},
      {"config", serialize_config(cfg)},
  };
  if (!signal_description.empty()) kv.emplace_back("signal", signal_description);
  kv.emplace_back("signal_seed", std::to_string(cfg.signal.seed));
  kv.emplace_back("noise_seeds", cfg.noise ? join_seeds(cfg.noise->seeds) : "none");
  return kv;
}

inline std::string output_file(const ExperimentConfig& cfg, const RunOptions& opt) {
  return opt.out.empty() ? cfg.output_path : opt.out;
}

inline void ensure_parent(const std::string& file) {
  const auto parent = std::filesystem::path(file).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

inline std::size_t count_failed(const std::vector<RecoveryReport>& reports) {
  std::size_t k = 0;
  for (const auto& r : reports) k += r.error.empty() ? 0 : 1;
  return k;
}

}  // namespace detail

/// taps_n<n>.txt, taps_n<n>.bin and kernel_summary.csv in the out directory.
inline int run_kernel(const ExperimentConfig& cfg, const RunOptions& opt) {
  const std::filesystem::path dir = opt.out.empty() ? "kernel_out" : opt.out;
  std::filesystem::create_directories(dir);

  std::ostringstream summary;
  auto header = detail::run_header(cfg, "kernel", "");
  write_header_lines(summary, header);
  summary << "n,epsilon_n,kappa,zero_residual,tail_fraction,tail_warning,"
             "normalization_residual,max_quadrature_error,T\n";

  TapOptions tap_opt;
  tap_opt.threads = opt.threads;
  for (int n : cfg.n_values) {
    opt.log("kernel: n=" + std::to_string(n) + " solving epsilon_n");
    const KernelSpec spec = detail::tag_with_n(n, [&] { return make_kernel_spec(cfg.weight, n); });
    opt.log("kernel: n=" + std::to_string(n) + " synthesizing " +
            std::to_string(2 * cfg.T + 1) + " taps");
    const KernelTaps taps =
        detail::tag_with_n(n, [&] { return synthesize_taps(spec, cfg.T, tap_opt); });

    const std::string stem = "taps_n" + std::to_string(n);
    {
      auto f = open_output((dir / (stem + ".txt")).string());
      write_taps_text(f, taps);
    }
    {
      auto f = open_output((dir / (stem + ".bin")).string(), true);
      write_taps_binary(f, taps);
    }
    summary << n << ',' << format_double(spec.epsilon_n) << ','
            << format_double(spec.kappa) << ',' << format_double(taps.zero_residual)
            << ',' << format_double(taps.tail_fraction) << ','
            << (taps.tail_warning ? 1 : 0) << ','
            << format_double(normalization_residual(spec)) << ','
            << format_double(taps.max_quadrature_error) << ',' << cfg.T << '\n';
    if (taps.tail_warning) {
      opt.log("kernel: n=" + std::to_string(n) + " warning: l2 tail fraction " +
              format_double(taps.tail_fraction) + " exceeds " +
              format_double(taps.tail_tolerance));
    }
  }
  auto f = open_output((dir / "kernel_summary.csv").string());
  f << summary.str();
  opt.log("kernel: wrote " + (dir / "kernel_summary.csv").string());
  return 0;
}

/// One row per n (clean) or per (n, sigma, seed) when the config has noise.
inline int run_recover(const ExperimentConfig& cfg, const RunOptions& opt) {
  opt.log("recover: generating " + std::string(to_string(cfg.signal.kind)) +
          " signal on M=" + std::to_string(cfg.grid_size));
  const SpectralSignal signal = make_signal(cfg.signal, cfg.grid_size);

  std::vector<RecoveryReport> reports;
  if (cfg.noise) {
    opt.log("recover: noisy sweep over " + std::to_string(cfg.n_values.size()) +
            " n values");
    RobustnessOptions ro;
    ro.T = cfg.T;
    ro.S = cfg.S;
    ro.threads = opt.threads;
    ro.capture_errors = true;
    reports = robustness_study(cfg.weight, signal, cfg.n_values, cfg.noise->sigmas,
                               cfg.noise->seeds, ro);
  } else {
    opt.log("recover: sweep over " + std::to_string(cfg.n_values.size()) + " n values");
    SweepOptions so;
    so.T = cfg.T;
    so.S = cfg.S;
    so.seed = cfg.signal.seed;
    so.threads = opt.threads;
    so.capture_errors = true;
    reports = convergence_sweep(cfg.weight, signal, cfg.n_values, so);
  }

  const std::string path = detail::output_file(cfg, opt);
  detail::ensure_parent(path);
  auto f = open_output(path);
  write_header_lines(f, detail::run_header(cfg, "recover", signal.description));
  write_recovery_csv(f, reports);
  const auto failed = detail::count_failed(reports);
  if (failed > 0) {
    opt.log("recover: " + std::to_string(failed) + " row(s) failed, see errors column");
  }
  opt.log("recover: wrote " + path);
  return 0;
}

/// Per (n, sigma, seed) rows plus a summary line; exit 2 on any violation.
inline int run_robustness(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (!cfg.noise) {
    throw config_error("noise", "robustness requires a noise record with >= 1 seed");
  }
  opt.log("robustness: generating " + std::string(to_string(cfg.signal.kind)) +
          " signal on M=" + std::to_string(cfg.grid_size));
  const SpectralSignal signal = make_signal(cfg.signal, cfg.grid_size);
  opt.log("robustness: " +
          std::to_string(cfg.n_values.size() * cfg.noise->sigmas.size() *
                         cfg.noise->seeds.size()) +
          " cells");
  RobustnessOptions ro;
  ro.T = cfg.T;
  ro.S = cfg.S;
  ro.threads = opt.threads;
  ro.capture_errors = true;
  const auto reports = robustness_study(cfg.weight, signal, cfg.n_values,
                                        cfg.noise->sigmas, cfg.noise->seeds, ro);

  const std::string path = detail::output_file(cfg, opt);
  detail::ensure_parent(path);
  auto f = open_output(path);
  write_header_lines(f, detail::run_header(cfg, "robustness", signal.description));
  const auto violations = write_robustness_csv(f, reports);
  opt.log("robustness: wrote " + path + " (violations=" + std::to_string(violations) +
          ")");
  if (detail::count_failed(reports) > 0) {
    opt.log("robustness: some cells failed, see errors column");
  }
  return violations == 0 ? 0 : 2;
}

/// check,verdict,value,detail rows; exit 2 unless every check passes.
inline int run_validate_weight(const ExperimentConfig& cfg, const RunOptions& opt,
                               std::ostream* fallback = nullptr) {
  opt.log("validate-weight: " + std::string(to_string(cfg.weight.family())) +
          " nu=" + format_double(cfg.weight.nu()));
  const ValidationReport report = validate_weight(cfg.weight);

  std::ostringstream body;
  write_header_lines(body, detail::run_header(cfg, "validate-weight", ""));
  body << "check,verdict,value,detail\n";
  for (const auto& c : report.checks) {
    body << c.name << ',' << to_string(c.verdict) << ',' << format_double(c.value)
         << ',' << csv_field(c.detail) << '\n';
  }
  if (opt.out.empty() && fallback) {
    *fallback << body.str();
  } else {
    const std::string path = detail::output_file(cfg, opt);
    detail::ensure_parent(path);
    auto f = open_output(path);
    f << body.str();
    opt.log("validate-weight: wrote " + path);
  }
  for (const auto& c : report.checks) {
    if (c.verdict != Verdict::Pass) {
      opt.log("validate-weight: " + c.name + " " + std::string(to_string(c.verdict)) +
              ": " + c.detail);
    }
  }
  return report.passed() ? 0 : 2;
}

}  // namespace kernrec
