// Command-line front end: configuration-driven verifier runs, CSV field
// exports, and registry listings.  Exit codes: 0 all verdicts pass, 1 any
// fail or inconclusive verdict, 2 configuration or evaluation error.

#include <anoflow/anoflow.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

void write_bytes(const std::string& path, const std::string& bytes) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec)
      throw anoflow::ConfigError("cannot create directory " +
                                 p.parent_path().string() + ": " +
                                 ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw anoflow::ConfigError("cannot open output file: " + path);
  out << bytes;
  if (!out) throw anoflow::ConfigError("failed while writing: " + path);
}

int run_command(const std::string& config_path, int workers,
                std::optional<std::uint64_t> seed,
                std::optional<std::string> out_path) {
  anoflow::RunConfig cfg = anoflow::load_config(config_path);
  if (seed) {
    cfg.seed = *seed;
    cfg.grid.seed = *seed;
  }
  if (out_path) cfg.report_path = *out_path;

  std::ostream* progress = cfg.verbosity >= 1 ? &std::cerr : nullptr;
  const anoflow::RunOutcome outcome =
      anoflow::run_verifiers(cfg, workers, progress);
  const std::string bytes = anoflow::render_document(outcome.document);
  if (cfg.report_path.empty())
    std::cout << bytes;
  else
    write_bytes(cfg.report_path, bytes);
  if (progress)
    *progress << "[" << anoflow::tool_name << "] " << outcome.n_pass
              << " pass, " << outcome.n_fail << " fail, "
              << outcome.n_inconclusive << " inconclusive\n";
  return outcome.all_pass() ? kExitPass : kExitFail;
}

int export_command(const std::string& config_path,
                   std::optional<std::string> out_path) {
  anoflow::RunConfig cfg = anoflow::load_config(config_path);
  if (cfg.exports.empty())
    throw anoflow::ConfigError(
        "config has no output.exports entries; nothing to export");
  if (out_path && cfg.exports.size() != 1)
    throw anoflow::ConfigError(
        "--out overrides a single export path, but the config lists " +
        std::to_string(cfg.exports.size()));
  const anoflow::FlowModel model = anoflow::make_model(cfg);
  for (auto spec : cfg.exports) {
    if (out_path) spec.path = *out_path;
    const std::string csv =
        anoflow::export_field_csv(model, spec.field, spec.n);
    write_bytes(spec.path, csv);
    if (cfg.verbosity >= 1)
      std::cerr << "[" << anoflow::tool_name << "] wrote " << spec.field
                << " (" << spec.n << "^3 lattice) to " << spec.path << "\n";
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification runs on explicit 3-manifold flow models"};
  app.require_subcommand(1);

  std::string config_path;
  int workers = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_path;

  auto add_common = [&](CLI::App* cmd, bool with_seed) {
    cmd->add_option("--config", config_path, "configuration file (JSON)")
        ->required();
    cmd->add_option("--workers", workers, "parallel workers for grid scans")
        ->check(CLI::Range(1, 64));
    if (with_seed)
      cmd->add_option("--seed", seed, "override the configured sample seed");
    cmd->add_option("--out", out_path, "override the configured output path");
  };

  CLI::App* run_cmd =
      app.add_subcommand("run", "execute the configured verifiers and write "
                                "the report document");
  add_common(run_cmd, true);

  CLI::App* export_cmd = app.add_subcommand(
      "export", "write the configured CSV field exports");
  add_common(export_cmd, false);

  CLI::App* list_models_cmd =
      app.add_subcommand("list-models", "list available models");
  CLI::App* list_verifiers_cmd =
      app.add_subcommand("list-verifiers", "list available verifiers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitError;
  }

  try {
    if (run_cmd->parsed()) return run_command(config_path, workers, seed, out_path);
    if (export_cmd->parsed()) return export_command(config_path, out_path);
    if (list_models_cmd->parsed()) {
      std::cout << anoflow::list_models_text();
      return kExitPass;
    }
    if (list_verifiers_cmd->parsed()) {
      std::cout << anoflow::list_verifiers_text();
      return kExitPass;
    }
  } catch (const anoflow::Error& e) {
    std::cerr << "[" << anoflow::tool_name << "] error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "[" << anoflow::tool_name << "] unexpected error: " << e.what()
              << "\n";
    return kExitError;
  }
  return kExitError;
}
