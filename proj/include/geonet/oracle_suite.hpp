#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geonet/shooting.hpp"

namespace geonet {

/// One closed-form oracle check at the standard metric.
struct OracleResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // worst observed deviation (or margin, see detail)
  double tol = 0.0;
  std::string detail;
};

/// Flat-metric oracle battery for the ball pipeline: boundary-hit times
/// against the closed form, the transversality margin bound, the reduced
/// functional against its explicit formula, the origin Hessian, and the
/// endpoint-map invertibility margin.
std::vector<OracleResult> runBallOracles(int d, const ShootOptions& opt, std::uint64_t seed);

/// Round-metric oracle battery for the sphere pipeline: great-circle
/// two-point data, the shooting differential, the reduced functional value
/// and Hessian with its nullity, and the first-variation vectors with their
/// assembled-map singular value.
std::vector<OracleResult> runSphereOracles(int d, const ShootOptions& opt, std::uint64_t seed);

}  // namespace geonet
