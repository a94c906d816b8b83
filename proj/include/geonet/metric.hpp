#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "geonet/poly.hpp"

namespace geonet {

enum class MetricKind { Standard, Conformal, Bilinear };

/// Domain-violation and construction errors carry the offending point in the
/// message so failures in long pipelines are attributable.
class MetricError : public std::runtime_error {
 public:
  explicit MetricError(const std::string& what) : std::runtime_error(what) {}
};

/// Riemannian metric on the closed unit ball of R^d, either the Euclidean
/// metric, a conformal perturbation G = exp(2*eps*f) I with f polynomial of
/// total degree <= 3, or a bilinear perturbation G = I + eps*H with H a
/// symmetric polynomial matrix. Entry derivatives are exact polynomial
/// derivatives. Immutable after construction.
class BallMetric {
 public:
  static BallMetric standard(int d);
  static BallMetric conformal(int d, double eps, Polynomial f);
  // upperH: row-major upper triangle (0,0),(0,1),...,(0,d-1),(1,1),...
  static BallMetric bilinear(int d, double eps, std::vector<Polynomial> upperH);

  int dim() const { return dim_; }
  double epsilon() const { return eps_; }
  MetricKind kind() const { return kind_; }
  bool isFlat() const { return kind_ == MetricKind::Standard || eps_ == 0.0; }

  Eigen::MatrixXd at(const Eigen::VectorXd& x) const;
  /// dG[k](i,j) = d G_ij / d x_k, exact.
  std::vector<Eigen::MatrixXd> derivative(const Eigen::VectorXd& x) const;
  /// christoffel(x)[k](i,j) = Gamma^k_ij, symmetric in (i,j).
  std::vector<Eigen::MatrixXd> christoffel(const Eigen::VectorXd& x) const;
  /// -Gamma(x)(v,v): the geodesic equation right-hand side for gamma''.
  Eigen::VectorXd geodesicAcceleration(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const;

  double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  double norm(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const;

  void requireInDomain(const Eigen::VectorXd& x) const;

  // Conformal exponent eps*f(x) and its exact gradient (zero for the other kinds).
  double phi(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradPhi(const Eigen::VectorXd& x) const;
  /// Hot-path variant: writes eps * grad f(x) into out (pre-sized).
  void gradPhiInto(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;

 private:
  BallMetric() = default;
  void checkPositiveDefiniteOnGrid() const;

  MetricKind kind_ = MetricKind::Standard;
  int dim_ = 0;
  double eps_ = 0.0;
  Polynomial f_;                       // conformal
  std::vector<Polynomial> fGrad_;      // conformal, exact partials
  std::vector<Polynomial> upperH_;     // bilinear, row-major upper triangle
  std::vector<std::vector<Polynomial>> upperHGrad_;  // [entry][var]
};

/// Conformal metric g = exp(2 phi) g0 on the unit sphere S^d in R^{d+1},
/// phi(x) = eps * f(x/|x|) with f polynomial of total degree <= 3 in the
/// ambient variables (zero-homogeneous extension). Immutable.
class SphereMetric {
 public:
  static SphereMetric round(int d);
  static SphereMetric conformal(int d, double eps, Polynomial f);

  int dim() const { return dim_; }
  int ambientDim() const { return dim_ + 1; }
  double epsilon() const { return eps_; }
  MetricKind kind() const { return eps_ == 0.0 ? MetricKind::Standard : MetricKind::Conformal; }
  bool isRound() const { return eps_ == 0.0 || f_.isZero(); }

  double phi(const Eigen::VectorXd& x) const;
  /// g0-gradient of phi on the sphere (ambient coordinates, tangent to S^d at x/|x|).
  Eigen::VectorXd gradPhi(const Eigen::VectorXd& x) const;
  double conformalFactor(const Eigen::VectorXd& x) const;  // exp(2 phi)
  /// Hot-path variant: phi and its tangential gradient in one pass, no
  /// allocations (unitBuf and gradOut pre-sized to the ambient dimension).
  void conformalData(const Eigen::VectorXd& x, Eigen::VectorXd& unitBuf,
                     Eigen::VectorXd& gradOut, double& phiOut) const;

  /// g(x) as a matrix on ambient coordinates; meaningful on tangent vectors only.
  Eigen::MatrixXd at(const Eigen::VectorXd& x) const;
  double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  double norm(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const;

  void requireInDomain(const Eigen::VectorXd& x) const;

 private:
  SphereMetric() = default;
  int dim_ = 0;
  double eps_ = 0.0;
  Polynomial f_;
  std::vector<Polynomial> fGrad_;
};

/// A tuple of vectors tangent to the manifold at a base point.
struct TangentFrame {
  Eigen::VectorXd base;
  Eigen::MatrixXd vectors;  // columns are the frame vectors
  bool orthonormal = false; // with respect to the metric used to build it
};

/// Gram--Schmidt with respect to the inner product u^T G v. Columns of V must
/// be linearly independent; the first output is V.col(0) normalized.
Eigen::MatrixXd gramSchmidt(const Eigen::MatrixXd& G, const Eigen::MatrixXd& V);

TangentFrame gramSchmidtG(const BallMetric& g, const Eigen::VectorXd& x, const Eigen::MatrixXd& V);
TangentFrame gramSchmidtG(const SphereMetric& g, const Eigen::VectorXd& x, const Eigen::MatrixXd& V);

/// Covariant derivative of a field W along a curve through one sample
/// (gamma, dgamma, W, dW), primes with respect to the curve parameter.
Eigen::VectorXd covariantDerivativeAlong(const BallMetric& g, const Eigen::VectorXd& gamma,
                                         const Eigen::VectorXd& dgamma, const Eigen::VectorXd& W,
                                         const Eigen::VectorXd& dW);
Eigen::VectorXd covariantDerivativeAlong(const SphereMetric& g, const Eigen::VectorXd& gamma,
                                         const Eigen::VectorXd& dgamma, const Eigen::VectorXd& W,
                                         const Eigen::VectorXd& dW);

/// Deterministic Halton points in [0,1)^d (used by the construction-time
/// positive-definiteness sampling).
Eigen::MatrixXd haltonPoints(int d, int count);

}  // namespace geonet
