#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "geonet/metric.hpp"
#include "geonet/rk.hpp"

namespace geonet {

class ShootingError : public std::runtime_error {
 public:
  explicit ShootingError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical controls of the shooting kernels. The embedded adaptive pair
/// (ode) drives the trajectory-facing integrations; functional evaluations
/// that feed finite differences run on fixed parameter-independent grids
/// (fixedStep, bvpNodes) so the computed lengths are smooth in the data.
struct ShootOptions {
  OdeOptions ode;
  double fixedStep = 0.01;      // boundary-hit marching grid on the ball
  int bvpNodes = 160;           // fixed node count of the rescaled two-point integration
  double bvpTol = 1e-10;        // ambient residual |gamma(L) - y|
  int bvpMaxIters = 30;
  double bvpFdStep = 1e-6;      // Gauss--Newton finite-difference Jacobian step
  double branchLo = 1.5707963267948966;   // allowed window for the two-point length
  double branchHi = 4.71238898038469;
  double epsBall = 0.3;         // admissible |y - (-x)| neighborhood
  double transversalityMin = 0.1;
  double hitHorizon = 3.0;      // arclength bound for the boundary search
  double safetyRadius = 2.0;
};

/// Sampled solution curve: per-node position, unit tangent and (sphere runs)
/// curvature vector, with 4th-order dense output for off-node queries.
struct Trajectory {
  int ambientDim = 0;
  bool sphereRun = false;
  double length = 0.0;                 // arclength of the parametrized segment
  std::vector<double> s;               // node parameters (arclength)
  std::vector<Eigen::VectorXd> gamma, tau, curv;
  DenseOutput dense;                   // over the stacked state
  int interpolationOrder = 4;

  Eigen::VectorXd position(double arc) const;
  Eigen::VectorXd tangent(double arc) const;
  Eigen::VectorXd curvature(double arc) const;   // sphere runs only
  /// Ambient derivative of the tangent block at arc (interpolant derivative).
  Eigen::VectorXd tangentDerivative(double arc) const;
};

/// First transversal crossing of the unit sphere by a ball geodesic.
struct BoundaryHit {
  double hitTime = 0.0;        // L_g(x, w)
  Eigen::VectorXd point;       // q on the boundary
  Eigen::VectorXd tangent;     // tau(L)
  double margin = 0.0;         // dS/dt at the hit
};

/// Unit-speed geodesic on the ball from x along w (normalized to |w|_g = 1
/// internally), integrated with the adaptive pair up to the arclength horizon.
Trajectory shootGeodesic(const BallMetric& g, const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                         double horizon, const ShootOptions& opt = {});

/// Boundary-hit time, point, tangent and transversality margin: fixed-grid
/// marching, sign-change bracketing of S(t) = (|gamma|^2 - 1)/2, Newton polish
/// on the continuous extension finished on the one-step flow.
BoundaryHit hitBoundary(const BallMetric& g, const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                        const ShootOptions& opt = {});

/// Constant-curvature curve on the sphere: the coupled tangent/curvature
/// system under the conformal connection, with per-step renormalization of
/// |gamma| (projection stabilization).
Trajectory shootConstantCurvature(const SphereMetric& g, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& v, const Eigen::VectorXd& k0,
                                  double horizon, const ShootOptions& opt = {});

struct TwoPointResult {
  Eigen::VectorXd curvature;   // k_g(x, v; y), tangent at x, g-orthogonal to v
  double length = 0.0;         // L_g(x, v; y)
  Trajectory trajectory;
  int iterations = 0;
  double residual = 0.0;
};

/// Warm-start data for the two-point solver. The solver reads (curvature,
/// length) as its initial guess and writes back the converged values together
/// with the finite-difference Jacobian, which is reused until it goes stale.
struct TwoPointHint {
  Eigen::VectorXd curvature;
  double length = 0.0;
  Eigen::MatrixXd jacobian;  // empty until a solve has filled it
  bool valid = false;
};

/// Unique constant-curvature connection from (x, v) to y near -x: damped
/// Gauss--Newton on the full ambient endpoint residual over (k0, L), fixed
/// rescaled integration grid, finite-difference Jacobian. Initial guess
/// (0, pi) unless a hint is given. After reaching bvpTol the root is polished
/// with two fresh-Jacobian Newton steps so the returned data sits at the
/// machine-level root of the discrete flow.
TwoPointResult solveTwoPoint(const SphereMetric& g, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& v, const Eigen::VectorXd& y,
                             const ShootOptions& opt = {}, TwoPointHint* hint = nullptr,
                             bool wantTrajectory = true);

/// Endpoint-only version of the constant-curvature shot: position after
/// arclength len, integrated on the fixed bvpNodes grid (smooth in all
/// arguments; used by the two-point residual and its finite differences).
Eigen::VectorXd constantCurvatureEndpoint(const SphereMetric& g, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& v, const Eigen::VectorXd& k0,
                                          double len, const ShootOptions& opt);

/// Cumulative two-point integration count (diagnostics; not thread-safe).
long long integrationCount();

}  // namespace geonet
