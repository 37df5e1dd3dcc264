#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hypflow/config.hpp"
#include "hypflow/report.hpp"
#include "hypflow/runner.hpp"
#include "hypflow/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hypflow: random-walk flow laboratory on hyperbolic groups"};
  app.set_version_flag("--version", hypflow::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("--config", config_path, "JSON config file")->required();
  CLI::Option* seed_opt = run->add_option("--seed", seed, "override the master seed");
  run->add_option("--out", out_dir, "override the output directory");
  run->add_option("--threads", threads,
                  "worker threads (default: HYPFLOW_THREADS or hardware)");

  std::string report_dir;
  std::string export_dir;
  CLI::App* report = app.add_subcommand("report", "render result records");
  report->add_option("dir", report_dir, "directory of .jsonl records")->required();
  report->add_option("--export", export_dir, "write CSV/SVG exports here");

  CLI::App* list = app.add_subcommand("list-experiments", "print the registry");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      hypflow::Config config = hypflow::Config::load_file(config_path);
      if (seed_opt->count() > 0) config.override_seed(seed);
      if (!out_dir.empty()) config.override_out_dir(out_dir);
      if (threads > 0) config.override_threads(threads);
      std::string record_path;
      const int code = hypflow::run_and_persist(config, &record_path);
      std::cout << "wrote " << record_path << "\n";
      if (code == hypflow::kExitUndecidedBreach) {
        std::cerr << "undecided-rate threshold breached\n";
      }
      return code;
    }
    if (report->parsed()) {
      return hypflow::write_reports(report_dir, export_dir, std::cout);
    }
    if (list->parsed()) {
      for (const auto& name : hypflow::list_experiments()) {
        std::cout << name << "\n";
      }
      return 0;
    }
  } catch (const hypflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return hypflow::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
