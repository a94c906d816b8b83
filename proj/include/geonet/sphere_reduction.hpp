#pragma once

#include <Eigen/Dense>
#include <array>

#include "geonet/metric.hpp"
#include "geonet/report.hpp"
#include "geonet/search.hpp"
#include "geonet/shooting.hpp"
#include "geonet/stiefel.hpp"

namespace geonet {

/// Reduction parameter: a 3-frame (x, e1, e2) and the second junction y in
/// the admissible neighborhood of -x.
struct ThetaParam {
  FramePoint frame;   // V_3(R^{d+1}); first column is the junction x
  Eigen::VectorXd y;
};

/// Three constant-curvature edges from x to y.
struct ThetaNetwork {
  std::array<Trajectory, 3> edges;
  Eigen::VectorXd junctionX, junctionY;
  Eigen::MatrixXd directions;       // (d+1) x 3 in T_x S^d, g-unit, balanced
  Eigen::MatrixXd normals;          // (d+1) x 3 oriented normals nu_j
  Eigen::MatrixXd zBasis;           // (d+1) x (d-2) shared completion of the direction plane
  Eigen::MatrixXd curvatureCoords;  // (d-1) x 3: per edge (kappa_0, ..., kappa_{d-2})
  std::array<double, 3> lengths{};
  double totalLength = 0.0;
};

/// Gram--Schmidt of (e1, e2) in g(x) restricted to T_x S^d, then the balanced
/// triple: g-unit directions tangent to the sphere at the frame's junction.
BalancedDirections phiG(const SphereMetric& g, const FramePoint& f);

/// Per-edge warm-start store for the two-point solves.
struct ThetaHints {
  std::array<TwoPointHint, 3> edge;
};

ThetaNetwork buildTheta(const SphereMetric& g, const ThetaParam& p, const ShootOptions& opt = {},
                        ThetaHints* hints = nullptr);

/// Reduced length functional: sum of the two-point lengths (endpoint-only
/// solves; no dense trajectories).
double Eg(const SphereMetric& g, const ThetaParam& p, const ShootOptions& opt = {},
          ThetaHints* hints = nullptr);

/// Frame (nu_j, z_1, ..., z_{d-2}) transported along one edge by the
/// curvature-compensated equations; stays g-orthonormal on tau^perp and keeps
/// the curvature coordinates constant.
struct TransportedFrame {
  DenseOutput dense;            // stacked columns over arclength
  int ambientDim = 0;
  int vectors = 0;              // d-1
  Eigen::MatrixXd frameAt(double s) const;
};

TransportedFrame transportFrame(const SphereMetric& g, const Trajectory& edge,
                                const Eigen::VectorXd& kappa, const Eigen::MatrixXd& initial);

/// Base network plus transported frames, reusable across variation directions.
struct PhiWorkspace {
  ThetaNetwork net;
  std::array<TransportedFrame, 3> frames;
};

PhiWorkspace makePhiWorkspace(const SphereMetric& g, const ThetaParam& p,
                              const ShootOptions& opt = {});

struct PhiVectors {
  std::array<Eigen::VectorXd, 3> Phi;  // ambient vectors in u_j^perp
  Eigen::MatrixXd coeffs;              // (d-1) x 3 coordinates in (nu_j, z_i)
};

/// The first-variation diagnostics: unit-interval integrals of the normal
/// components of the finite-difference variational field of the edge family
/// under the Stiefel tangent xi (second junction held fixed).
PhiVectors phiVectors(const SphereMetric& g, const ThetaParam& p, const PhiWorkspace& ws,
                      const StiefelTangent& xi, double fdStep, const ShootOptions& opt = {});

/// Smallest singular value of the assembled xi -> Phi map over a tangent
/// basis of V_3(R^{d+1}).
double checkPhiInvertibility(const SphereMetric& g, const ThetaParam& p,
                             const ShootOptions& opt = {}, double fdStep = 1e-4);

/// Closed-form Hessian of E_0 at (x, e; -x) on ((xi, w), (xi, w)).
double hessianE0(const FramePoint& f, const StiefelTangent& xi, const Eigen::VectorXd& w);

struct SphereInnerOptions {
  double tol = 1e-8;
  int maxIters = 20;
  double jacobianStep = 1e-4;
  // Gradient step 1e-4: the two-point lengths are smooth to ~1e-13, so the
  // finite-difference noise floor stays near 1e-9, below the 1e-8 stop.
  double gradStep = 1e-4;
};

struct SphereInnerResult {
  Eigen::VectorXd y;
  int iterations = 0;
  double gradNorm = 0.0;
};

/// Damped Newton on the sphere-tangential gradient of E in y, start y0 = -x,
/// spherical retraction, iterates confined to the eps-ball cap around -x.
SphereInnerResult innerSolveY(const SphereMetric& g, const FramePoint& f,
                              const SphereInnerOptions& nopt, const ShootOptions& sopt,
                              const Eigen::VectorXd* warmStart = nullptr,
                              Eigen::MatrixXd* jacobian = nullptr, ThetaHints* hints = nullptr);

struct SphereSearchInput {
  SphereInnerOptions inner;
  ShootOptions shoot;
  SearchOptions search;
  double verifyTol = 1e-5;
};

struct SphereSearchResult {
  std::vector<SolveReport> solutions;
  std::vector<StartFailure> failures;
  SearchSummary summary;
};

/// Multistart critical-point search of Psi(x,e) = E_g(x,e; y_g(x,e)) on
/// V_3(R^{d+1}). Deterministic per seed.
SphereSearchResult searchCriticalSphere(const SphereMetric& g, const SphereSearchInput& in);

VerificationReport verifyTheta(const SphereMetric& g, const ThetaNetwork& net, double tol);

}  // namespace geonet
