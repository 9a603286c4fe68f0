#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "gxm/error.hpp"
#include "gxm/scenario.hpp"

namespace fs = std::filesystem;

namespace {

// A bare name resolves to <scenario-dir>/<name>.json.
fs::path resolve(const std::string& arg, const fs::path& dir) {
  fs::path p(arg);
  if (fs::exists(p)) return p;
  fs::path bundled = dir / p;
  if (bundled.extension() != ".json") bundled += ".json";
  if (fs::exists(bundled)) return bundled;
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gxm: pressures, Gibbs measures and spectral radii of group extensions of Markov shifts"};
  app.require_subcommand(1);

  std::string scenario_dir = GXM_SCENARIO_DIR;
  app.add_option("--scenario-dir", scenario_dir, "Directory of bundled scenarios");

  auto* run = app.add_subcommand("run", "Run every task of a scenario");
  std::string run_file;
  std::string out_dir = "results";
  std::string output;
  bool strict = false;
  std::size_t threads = 1;
  double tol = 0.0;
  run->add_option("scenario", run_file, "Scenario file or bundled scenario name")->required();
  run->add_option("--out", out_dir, "Results directory")->capture_default_str();
  run->add_option("--output", output, "Output format (overrides the scenario)")->check(CLI::IsMember({"csv", "json"}));
  run->add_flag("--strict", strict, "Treat pruning warnings as errors");
  run->add_option("--threads", threads, "Thread budget")->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  auto* tol_opt = run->add_option("--tol", tol, "Tolerance for verdicts and audits")->check(CLI::NonNegativeNumber);

  auto* validate = app.add_subcommand("validate", "Check scenario files against the schema without running");
  std::vector<std::string> validate_files;
  validate->add_option("scenarios", validate_files, "Scenario files or bundled names (default: all bundled)");

  auto* list = app.add_subcommand("list-scenarios", "List bundled scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& p : gxm::list_scenarios(scenario_dir)) {
        gxm::Scenario s = gxm::load_scenario(p);
        std::cout << p.stem().string() << "\t" << s.tasks.size() << " task(s)\t" << p.string() << "\n";
      }
      return 0;
    }
    if (*validate) {
      std::vector<fs::path> files;
      for (const auto& f : validate_files) files.push_back(resolve(f, scenario_dir));
      if (files.empty()) files = gxm::list_scenarios(scenario_dir);
      int status = 0;
      for (const auto& f : files) {
        try {
          gxm::Scenario s = gxm::load_scenario(f);
          std::cout << "ok\t" << f.string() << " (" << s.tasks.size() << " task(s))\n";
        } catch (const gxm::InputError& e) {
          std::cout << "invalid\t" << e.what() << "\n";
          status = 2;
        }
      }
      return status;
    }
    fs::path file = resolve(run_file, scenario_dir);
    gxm::Scenario s = gxm::load_scenario(file);
    gxm::RunOptions opts;
    opts.out_dir = out_dir;
    if (!output.empty()) opts.output = output;
    opts.strict = strict;
    opts.threads = threads;
    if (*tol_opt) opts.tolerance = tol;
    opts.source = file.string();
    gxm::RunReport rep = gxm::run_scenario(s, opts, std::cout);
    std::cout << "results in " << (fs::path(out_dir) / s.name).string() << "\n";
    return rep.exit_code;
  } catch (const gxm::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
