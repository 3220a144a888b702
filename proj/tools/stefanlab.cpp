/// Command-line front end: run, sweep, presets, validate.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "stefanlab.hpp"

namespace fs = std::filesystem;
using namespace stefanlab;

namespace {

struct Source {
  std::string config_path;
  std::string preset;
  std::string output;
};

void add_source(CLI::App* cmd, Source& src) {
  cmd->add_option("config", src.config_path, "Configuration file (INI sections: run, grid, equation, initial, "
                                              "boundary, time, solver, modulus, constants)");
  cmd->add_option("--preset", src.preset, "Start from a built-in scenario instead of a file");
  cmd->add_option("-o,--output", src.output, "Output directory (overrides run.output)");
}

RunConfig load(const Source& src) {
  if (!src.config_path.empty() && !src.preset.empty())
    throw ConfigError("run.preset", "give either a config file or --preset, not both");
  if (!src.config_path.empty()) return load_config(src.config_path);
  if (!src.preset.empty()) return preset_config(src.preset);
  throw ConfigError("config", "no configuration given");
}

/// Relative output paths live under STEFANLAB_OUTPUT_ROOT when it is set.
fs::path output_dir(const Source& src, const std::string& configured) {
  fs::path p = src.output.empty() ? fs::path(configured) : fs::path(src.output);
  if (const char* root = std::getenv("STEFANLAB_OUTPUT_ROOT"); root && *root && p.is_relative()) p = fs::path(root) / p;
  return p;
}

int report_error(const json& record, const std::optional<fs::path>& dir) {
  std::cerr << record.dump() << '\n';
  if (dir) {
    try {
      write_file(*dir / "error.json", record.dump(2) + "\n");
    } catch (const Error&) {
    }
  }
  return record["status"].get<int>();
}

template <class F>
int guarded(F&& body, std::optional<fs::path>& dir) {
  try {
    return body();
  } catch (const ConfigError& e) {
    return report_error(error_record(exit_config_error, "config", e.what(), e.field()), dir);
  } catch (const SolverError& e) {
    return report_error(error_record(exit_solver_failed, "solver", e.what(), "", e.time()), dir);
  } catch (const Error& e) {
    return report_error(error_record(exit_config_error, "input", e.what()), dir);
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Enthalpy-method solver for regularized p-Laplacian Stefan problems with estimate checks.\n"
               "Exit status: 0 all checks pass, 1 a check failed, 2 configuration error, 3 solver failure.\n"
               "Environment: STEFANLAB_OUTPUT_ROOT prefixes relative output directories."};
  app.require_subcommand(1);

  Source run_src;
  auto* run = app.add_subcommand("run", "Solve one scenario, run its checks and write all artifacts");
  add_source(run, run_src);

  Source sweep_src;
  std::vector<std::string> axis_specs;
  auto* sweep = app.add_subcommand("sweep", "Run the cross product of parameter axes and aggregate the results");
  add_source(sweep, sweep_src);
  sweep->add_option("-a,--axis", axis_specs,
                    "Axis as name=v1,v2,... with name in {p, eps, resolution, latent_heat, preset}; repeatable");

  std::string show;
  auto* presets = app.add_subcommand("presets", "List built-in scenarios");
  presets->add_option("--show", show, "Print the resolved configuration of one preset");

  Source val_src;
  auto* validate = app.add_subcommand("validate", "Check a configuration and print its resolved form");
  add_source(validate, val_src);

  CLI11_PARSE(app, argc, argv);

  std::optional<fs::path> dir;
  if (*run) {
    return guarded(
        [&] {
          if (!run_src.output.empty()) dir = output_dir(run_src, "");
          const RunConfig cfg = load(run_src);
          dir = output_dir(run_src, cfg.output);
          const RunResult res = execute(cfg);
          const json summary = write_artifacts(res, *dir);
          std::cout << summary.dump(2) << '\n';
          return res.status;
        },
        dir);
  }
  if (*sweep) {
    return guarded(
        [&] {
          if (!sweep_src.output.empty()) dir = output_dir(sweep_src, "");
          const RunConfig cfg = load(sweep_src);
          std::vector<SweepAxis> axes;
          for (const auto& s : axis_specs) axes.push_back(parse_axis(s));
          dir = output_dir(sweep_src, cfg.output);
          const SweepResult res = run_sweep(cfg, axes, *dir);
          std::cout << res.csv;
          return res.status;
        },
        dir);
  }
  if (*presets) {
    return guarded(
        [&] {
          if (!show.empty()) {
            std::cout << to_ini(preset_config(show).resolved());
            return 0;
          }
          for (const auto& name : preset_names()) std::cout << name << "\t" << preset_description(name) << '\n';
          return 0;
        },
        dir);
  }
  return guarded(
      [&] {
        const RunConfig cfg = load(val_src);
        cfg.validate();
        std::cout << to_ini(prepare(cfg));
        return 0;
      },
      dir);
}
