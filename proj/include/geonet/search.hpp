#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "geonet/report.hpp"
#include "geonet/stiefel.hpp"

namespace geonet {

struct NewtonOptions {
  double tol = 1e-9;       // inner gradient norm target
  int maxIters = 20;
  double jacobianStep = 1e-4;  // finite differences of the inner gradient
};

struct SearchOptions {
  int count = 64;
  std::uint64_t seed = 1234;
  double gradTol = 1e-8;
  int maxIters = 80;
  double fdStep = 1e-3;    // chart steps for the outer gradient (noise floor well under grad_tol)
  double hessStep = 1e-3;  // chart steps for the reported Hessian inertia
  double dedupTol = 1e-6;  // S3 class equality (max-norm on canonical data)
  double valueTol = 1e-7;  // critical-value clustering
  double nullCutoff = 1e-6;
};

/// A reduced length functional over a Stiefel manifold, evaluated in a chart
/// c(theta) = retract(base, sum theta_i xi_i). Implementations own the inner
/// implicit solve and report its iteration counts through innerIterations().
class ReducedProblem {
 public:
  virtual ~ReducedProblem() = default;
  virtual int tangentDim() const = 0;
  /// Value at the chart point (inner variables re-solved, warm).
  virtual double value(const FramePoint& base, const std::vector<StiefelTangent>& basis,
                       const Eigen::VectorXd& theta) = 0;
  /// Chart gradient at theta: inner solve once, then central differences of
  /// the partial functional over the chart coordinates.
  virtual Eigen::VectorXd gradient(const FramePoint& base,
                                   const std::vector<StiefelTangent>& basis,
                                   const Eigen::VectorXd& theta) = 0;
  virtual int innerIterations() const = 0;

  FramePoint chartPoint(const FramePoint& base, const std::vector<StiefelTangent>& basis,
                        const Eigen::VectorXd& theta) const;
};

struct LocalSearchResult {
  bool converged = false;
  FramePoint frame;
  double gradNorm = 0.0;
  int iterations = 0;
  std::string error;
};

/// Damped Newton root-finding on the chart gradient (Levenberg regularized,
/// frozen Jacobian between accepted steps). Drives |grad| to zero, so saddle
/// points are found as well as extrema.
LocalSearchResult findCriticalPoint(ReducedProblem& prob, const FramePoint& start,
                                    const SearchOptions& opt);

/// Symmetric finite-difference Hessian of the reduced functional in the chart
/// at p (central differences of the gradient with step opt.hessStep).
Eigen::MatrixXd reducedHessian(ReducedProblem& prob, const FramePoint& p,
                               const SearchOptions& opt);

/// Eigenvalue inertia with the configured null cutoff.
void hessianInertia(const Eigen::MatrixXd& H, double cutoff, int& neg, int& zero, int& pos);

/// Cluster converged reports into S3 classes: reports are first grouped by
/// critical value; within a group, frames whose canonical data agree within
/// dedupTol merge, and a group whose members all carry full nullity collapses
/// to a single critical-manifold class. Reports are re-ordered (value
/// descending, canonical frame lexicographic) and classIds assigned.
std::vector<SolveReport> clusterReports(std::vector<SolveReport> reports, int tangentDim,
                                        const SearchOptions& opt);

}  // namespace geonet
