#include <CLI11.hpp>

#include <iostream>

#include "geonet/config.hpp"
#include "geonet/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"geonet: minimal triods on the ball and theta-networks on the sphere "
               "for near-standard metrics"};
  app.require_subcommand(1);

  std::string configPath;
  std::string outDir = ".";
  std::uint64_t seedOverride = 0;
  bool haveSeed = false;

  auto addCommon = [&](CLI::App* cmd, bool needConfig = true) {
    auto* copt = cmd->add_option("--config", configPath, "run configuration (JSON)");
    if (needConfig) copt->required();
    cmd->add_option("--out", outDir, "output directory");
    cmd->add_option("--seed", seedOverride, "override the multistart seed")
        ->each([&](const std::string&) { haveSeed = true; });
  };

  auto* oracle = app.add_subcommand("oracle-check",
                                    "run the standard-metric oracle suite for the configured "
                                    "dimension");
  addCommon(oracle);
  auto* solveBall = app.add_subcommand("solve-ball", "search minimal triods on the ball");
  addCommon(solveBall);
  auto* solveSphere =
      app.add_subcommand("solve-sphere", "search minimal theta-networks on the sphere");
  addCommon(solveSphere);
  auto* verify = app.add_subcommand("verify", "re-verify the networks stored in a report");
  addCommon(verify);
  auto* exportCmd = app.add_subcommand("export", "export report networks as polyline CSV");
  addCommon(exportCmd);

  CLI11_PARSE(app, argc, argv);

  geonet::RunConfig cfg;
  try {
    cfg = geonet::RunConfig::fromFile(configPath);
    if (haveSeed) cfg.searchSeed = seedOverride;
    if (solveBall->parsed() && !cfg.isBall())
      throw geonet::ConfigError("solve-ball requires metric.space == \"ball\"");
    if (solveSphere->parsed() && cfg.isBall())
      throw geonet::ConfigError("solve-sphere requires metric.space == \"sphere\"");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return geonet::kExitConfigError;
  }

  try {
    if (oracle->parsed()) return geonet::runOracleCheck(cfg, std::cout);
    if (solveBall->parsed() || solveSphere->parsed())
      return geonet::runSolve(cfg, outDir, std::cout);
    if (verify->parsed()) return geonet::runVerify(cfg, outDir, std::cout);
    if (exportCmd->parsed()) return geonet::runExport(cfg, outDir, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return geonet::kExitSolverFailure;
  }
  return geonet::kExitConfigError;
}
