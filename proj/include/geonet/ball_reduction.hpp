#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>

#include "geonet/metric.hpp"
#include "geonet/report.hpp"
#include "geonet/search.hpp"
#include "geonet/shooting.hpp"
#include "geonet/stiefel.hpp"

namespace geonet {

/// Reduction parameter: junction in the open half ball and a 2-frame.
struct TriodParam {
  Eigen::VectorXd junction;  // |x| < 1/2
  FramePoint frame;          // V_2(R^d)
};

/// Three geodesic edges from a common junction to the boundary.
struct Triod {
  std::array<Trajectory, 3> edges;
  Eigen::VectorXd junction;
  Eigen::MatrixXd directions;  // d x 3, metric-unit, balanced
  Eigen::MatrixXd normals;     // d x 3, oriented normals to the directions
  std::array<double, 3> lengths{};
  double totalLength = 0.0;
};

/// Flat direction triple u1 = e1, u2 = -e1/2 + sqrt(3)/2 e2, u3 = -e1/2 - sqrt(3)/2 e2.
Eigen::MatrixXd directionsFlat(const FramePoint& e);

/// Metric Gram--Schmidt of the frame followed by the balanced-triple
/// construction: g(x)-unit directions with u1 + u2 + u3 = 0.
BalancedDirections psiG(const BallMetric& g, const Eigen::VectorXd& x, const FramePoint& e);

Triod buildTriod(const BallMetric& g, const TriodParam& p, const ShootOptions& opt = {});

/// Closed-form Euclidean oracles. F0 admits |x| <= 1 (continuous up to the
/// boundary); |x| > 1 is a domain error.
double F0(const Eigen::VectorXd& x, const FramePoint& e);
double F0RadialDerivative(const Eigen::VectorXd& x, const FramePoint& e);
double F0HessianOrigin(const FramePoint& e, const Eigen::VectorXd& v);

/// Reduced length functional: total length of the shot triod.
double Fg(const BallMetric& g, const TriodParam& p, const ShootOptions& opt = {});

struct BallGradient {
  Eigen::VectorXd gradX;       // Euclidean partial gradient in the junction
  StiefelTangent gradFrame;    // Riemannian gradient on V_2(R^d)
  Eigen::VectorXd frameCoeffs; // coefficients in the tangent basis used
};

/// Central finite differences: junction part over coordinate steps, frame part
/// over a tangent basis through the QR retraction.
BallGradient gradFg(const BallMetric& g, const TriodParam& p, double stepX, double stepFrame,
                    const ShootOptions& opt = {});

struct InnerSolveOptions {
  double tol = 1e-9;
  int maxIters = 20;
  double jacobianStep = 1e-4;
  double gradStep = 1e-5;    // finite-difference step of the inner gradient
  double trustRadius = 0.25;
};

struct InnerSolveResult {
  Eigen::VectorXd solution;
  int iterations = 0;
  double gradNorm = 0.0;
};

/// Damped Newton on H(x) = grad_x F_g(x, e) from x0 = 0 (or a warm start),
/// iterates confined to |x| <= trustRadius. The frozen Jacobian is cached in
/// *jacobian across calls when provided.
InnerSolveResult innerSolveX(const BallMetric& g, const FramePoint& e,
                             const InnerSolveOptions& nopt, const ShootOptions& sopt,
                             const Eigen::VectorXd* warmStart = nullptr,
                             Eigen::MatrixXd* jacobian = nullptr);

VerificationReport verifyTriod(const BallMetric& g, const Triod& t, double tol);

struct BallSearchInput {
  InnerSolveOptions inner;
  ShootOptions shoot;
  SearchOptions search;
  double verifyTol = 1e-5;
};

struct BallSearchResult {
  std::vector<SolveReport> solutions;  // deduplicated S3 classes
  std::vector<StartFailure> failures;
  SearchSummary summary;
};

/// Multistart critical-point search of Phi(e) = F_g(x_g(e), e) on V_2(R^d),
/// per connected component when d = 2. Deterministic per seed.
BallSearchResult searchCriticalBall(const BallMetric& g, const BallSearchInput& in);

}  // namespace geonet
