#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace geonet {

/// Residuals certifying stationarity: geodesic defect of the edges (max |k|_g
/// on the sphere), junction tangent balance, boundary orthogonality (ball
/// endpoints; zero on the sphere) and junction angles against 2*pi/3.
struct VerificationReport {
  double geodesicResidual = 0.0;
  double balanceResidual = 0.0;
  double orthogonalityResidual = 0.0;
  double angleResidual = 0.0;
  double tol = 0.0;
  bool pass = false;

  double maxResidual() const;
};

/// One deduplicated critical point of the reduced length functional.
struct SolveReport {
  Eigen::MatrixXd canonicalFrame;  // S3-canonical parameter frame (columns)
  Eigen::VectorXd junction;        // ball: inner junction x_g(e); sphere: x
  Eigen::VectorXd junctionY;       // sphere: second junction y_g; empty on the ball
  double value = 0.0;              // critical value of F_g / E_g
  double gradNorm = 0.0;           // reduced-gradient norm at exit
  int inertiaNegative = 0, inertiaZero = 0, inertiaPositive = 0;
  int outerIterations = 0;
  int innerIterations = 0;         // last inner Newton solve
  VerificationReport verification;
  int classId = 0;
  int clusterSize = 1;
  bool manifoldClass = false;      // full-nullity value cluster (critical manifold)
  int component = 0;               // V_2(R^2) orientation sign; 0 otherwise
  std::vector<std::uint64_t> seeds;
  std::array<double, 3> edgeLengths{};
  Eigen::MatrixXd curvatureCoords; // sphere: (d-1) x 3 per-edge coordinates
};

struct StartFailure {
  std::uint64_t seed = 0;
  std::string reason;
};

struct SearchSummary {
  int started = 0;
  int converged = 0;
  int failed = 0;
  int classes = 0;
};

}  // namespace geonet
