#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geonet/ball_reduction.hpp"
#include "geonet/metric.hpp"
#include "geonet/search.hpp"
#include "geonet/shooting.hpp"
#include "geonet/sphere_reduction.hpp"

#include <json.hpp>

namespace geonet {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct MetricConfig {
  std::string space = "ball";  // "ball" | "sphere"
  int dim = 2;
  std::string kind = "standard";  // "standard" | "conformal" | "bilinear"
  double epsilon = 0.0;
  std::vector<std::vector<PolyTerm>> poly;  // one list (conformal) or upper triangle (bilinear)
};

/// Full run configuration. Parsing is strict: unknown keys are rejected with
/// their JSON path. All tolerances must be positive. Absent keys take the
/// documented defaults (the inner Newton tolerance defaults to 1e-9 on the
/// ball and 1e-8 on the sphere).
struct RunConfig {
  MetricConfig metric;
  // ode
  double odeRtol = 1e-10;
  double odeAtol = 1e-12;
  double odeFixedStep = 0.01;
  double odeMaxStep = 0.05;
  double odeInitialStep = 0.01;
  // newton (inner implicit solves)
  double newtonTol = 0.0;  // 0 = space default
  int newtonMaxIters = 20;
  // bvp
  double bvpTol = 1e-10;
  int bvpMaxIters = 30;
  double bvpFdStep = 1e-6;
  int bvpNodes = 160;
  double bvpNeighborhood = 0.3;
  // fd
  double fdStepX = 1e-5;
  double fdStepFrame = 1e-5;
  double fdStepHess = 1e-3;
  // search
  int searchCount = 64;
  std::uint64_t searchSeed = 1234;
  double searchGradTol = 1e-8;
  int searchMaxIters = 80;
  double searchFdStep = 1e-3;
  double searchDedupTol = 1e-6;
  double searchValueTol = 1e-7;
  // verification
  double verifyTol = 1e-5;
  // output
  std::string outputReport = "report.json";
  std::string outputNetworks = "networks.csv";  // empty = skip
  int outputResolution = 100;

  static RunConfig fromJson(const nlohmann::ordered_json& j);
  static RunConfig fromFile(const std::string& path);
  /// Fully materialized echo; parsing the echo reproduces this config.
  nlohmann::ordered_json toJson() const;

  bool isBall() const { return metric.space == "ball"; }
  double effectiveNewtonTol() const {
    return newtonTol > 0 ? newtonTol : (isBall() ? 1e-9 : 1e-8);
  }

  BallMetric ballMetric() const;
  SphereMetric sphereMetric() const;
  ShootOptions shootOptions() const;
  SearchOptions searchOptions() const;
  InnerSolveOptions innerBallOptions() const;
  SphereInnerOptions innerSphereOptions() const;
};

}  // namespace geonet
