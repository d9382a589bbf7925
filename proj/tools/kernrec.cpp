// kernrec: batch runner for recovering-kernel experiments.
//
//   kernrec kernel          --config c.json [--out dir]  [--threads k]
//   kernrec recover         --config c.json [--out file] [--threads k]
//   kernrec robustness      --config c.json [--out file] [--threads k]
//   kernrec validate-weight --config c.json [--out file]
//
// Exit codes: 0 ok, 1 config error, 2 numerical failure.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kernrec/config.hpp"
#include "kernrec/error.hpp"
#include "kernrec/experiment.hpp"
#include "kernrec/parallel.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kNumerical = 2 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recovering-kernel experiments: kernels, recovery sweeps, robustness"};
  app.set_version_flag("--version", std::string("kernrec ") + kernrec::tool_version);
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  unsigned threads = 1;

  auto add_common = [&](CLI::App* sub, bool with_threads) {
    sub->add_option("--config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output file, or directory for 'kernel'");
    if (with_threads) {
      sub->add_option("--threads", threads, "worker threads, 0 = all cores")
          ->check(CLI::NonNegativeNumber);
    }
  };
  auto* kernel = app.add_subcommand("kernel", "write taps and a per-n kernel summary");
  auto* recover = app.add_subcommand("recover", "recovery sweep over n to CSV");
  auto* robust = app.add_subcommand("robustness", "noise robustness study to CSV");
  auto* validate = app.add_subcommand("validate-weight", "check the weight conditions");
  add_common(kernel, true);
  add_common(recover, true);
  add_common(robust, true);
  add_common(validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  kernrec::RunOptions opt;
  opt.out = out;
  opt.threads = kernrec::resolve_threads(threads);
  opt.log = [](const std::string& line) { std::cerr << "[kernrec] " << line << '\n'; };

  kernrec::ExperimentConfig cfg;
  try {
    opt.log("config: loading " + config_path);
    cfg = kernrec::load_config(config_path);
  } catch (const kernrec::config_error& e) {
    std::cerr << "[kernrec] config error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    if (kernel->parsed()) return kernrec::run_kernel(cfg, opt);
    if (recover->parsed()) return kernrec::run_recover(cfg, opt);
    if (robust->parsed()) return kernrec::run_robustness(cfg, opt);
    return kernrec::run_validate_weight(cfg, opt, &std::cout);
  } catch (const kernrec::config_error& e) {
    std::cerr << "[kernrec] " << stage << ": config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "[kernrec] " << stage << ": invalid parameters: " << e.what() << '\n';
    return kConfig;
  } catch (const kernrec::io_error& e) {
    std::cerr << "[kernrec] " << stage << ": I/O error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "[kernrec] " << stage << ": I/O error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "[kernrec] " << stage << ": numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}
