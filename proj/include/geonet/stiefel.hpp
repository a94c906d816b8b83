#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace geonet {

/// A point of the Stiefel manifold V_k(R^n): k Euclidean-orthonormal columns.
/// Construction re-orthonormalizes by triangular Gram--Schmidt, so directions
/// of the leading vectors are preserved.
struct FramePoint {
  Eigen::MatrixXd V;  // n x k

  FramePoint() = default;
  explicit FramePoint(Eigen::MatrixXd vectors);

  int n() const { return static_cast<int>(V.rows()); }
  int k() const { return static_cast<int>(V.cols()); }
  Eigen::VectorXd col(int j) const { return V.col(j); }

  /// max_ij |<v_i, v_j> - delta_ij|
  double orthonormalityDefect() const;
  /// det sign of the leading k x k block; the connected-component label of
  /// V_2(R^2) (+-1). Zero when not square.
  int orientationSign() const;
};

/// Tangent vector to V_k(R^n) at a base point: V^T Z + Z^T V = 0.
struct StiefelTangent {
  Eigen::MatrixXd Z;  // n x k

  double norm() const { return Z.norm(); }  // Frobenius (embedded Euclidean) norm
};

int stiefelDim(int n, int k);

/// Orthogonal projection of an ambient n x k matrix onto the tangent space at
/// p. Idempotent.
StiefelTangent projectTangent(const FramePoint& p, const Eigen::MatrixXd& W);

/// QR-based retraction of p + step * t (R-factor diagonal kept positive).
/// step = 0 returns p exactly.
FramePoint retract(const FramePoint& p, const StiefelTangent& t, double step);

/// Frobenius-orthonormal basis of the tangent space at p, deterministic order:
/// skew directions (i < j) first, then normal-space directions.
std::vector<StiefelTangent> tangentBasis(const FramePoint& p);

/// Draw from the orthogonal-invariant distribution on V_k(R^n): QR of a seeded
/// Gaussian matrix with sign-fixed R diagonal. Identical seeds give identical
/// frames bit for bit.
FramePoint randomPoint(int n, int k, std::uint64_t seed);

/// Balanced unit triple attached to an oriented 2-frame (u1, nu1):
/// u1, -u1/2 + sqrt(3)/2 nu1, -u1/2 - sqrt(3)/2 nu1 (columns).
Eigen::MatrixXd balancedTriple(const Eigen::VectorXd& u1, const Eigen::VectorXd& nu1);

/// A balanced direction triple with its oriented normals (nu_j is u_j rotated
/// by +pi/2 in the oriented direction plane; the normals sum to zero).
struct BalancedDirections {
  Eigen::MatrixXd u;   // n x 3
  Eigen::MatrixXd nu;  // n x 3
};

/// Directions and normals from an oriented metric-orthonormal pair.
BalancedDirections balancedDirections(const Eigen::VectorXd& u1, const Eigen::VectorXd& nu1);

/// Inverse of the direction parametrization: recover the Euclidean-orthonormal
/// 2-frame whose metric Gram--Schmidt reproduces the (already balanced,
/// metric-unit) direction triple given by columns of U.
Eigen::MatrixXd frameFromDirections(const Eigen::MatrixXd& U);

/// Representative of the S3 orbit of a frame: the direction triple of p under
/// the metric Gram matrix G at the junction is permuted through all six
/// relabelings, each pulled back to a frame, and the lexicographically
/// smallest flattened candidate is returned. For k = 3 the first column (the
/// junction on the sphere) is kept fixed. Idempotent up to solver noise.
FramePoint s3Canonicalize(const FramePoint& p, const Eigen::MatrixXd& gramAtJunction);

/// All six S3 relabelings of p (same convention as s3Canonicalize).
std::vector<FramePoint> s3Orbit(const FramePoint& p, const Eigen::MatrixXd& gramAtJunction);

}  // namespace geonet
