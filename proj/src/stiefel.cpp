#include "geonet/stiefel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "geonet/metric.hpp"

namespace geonet {

namespace {

constexpr double kSqrt3Half = 0.86602540378443864676;  // sqrt(3)/2

// Fuzzy lexicographic "less" on flattened frames: coordinates closer than tol
// are treated as ties so solver noise cannot flip the canonical choice.
bool lexLess(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol = 1e-9) {
  for (int j = 0; j < A.cols(); ++j)
    for (int i = 0; i < A.rows(); ++i) {
      const double a = A(i, j), b = B(i, j);
      if (std::abs(a - b) <= tol) continue;
      return a < b;
    }
  return false;
}

}  // namespace

FramePoint::FramePoint(Eigen::MatrixXd vectors) : V(std::move(vectors)) {
  if (V.cols() > V.rows()) throw std::invalid_argument("FramePoint: k must be <= n");
  V = gramSchmidt(Eigen::MatrixXd::Identity(V.rows(), V.rows()), V);
}

double FramePoint::orthonormalityDefect() const {
  Eigen::MatrixXd D = V.transpose() * V - Eigen::MatrixXd::Identity(k(), k());
  return D.cwiseAbs().maxCoeff();
}

int FramePoint::orientationSign() const {
  if (n() != k()) return 0;
  const double det = V.determinant();
  return det >= 0 ? 1 : -1;
}

int stiefelDim(int n, int k) { return n * k - k * (k + 1) / 2; }

StiefelTangent projectTangent(const FramePoint& p, const Eigen::MatrixXd& W) {
  Eigen::MatrixXd S = p.V.transpose() * W;
  S = 0.5 * (S + S.transpose()).eval();
  return StiefelTangent{W - p.V * S};
}

FramePoint retract(const FramePoint& p, const StiefelTangent& t, double step) {
  if (step == 0.0) {
    FramePoint q;
    q.V = p.V;  // bypass re-orthonormalization: exact zero-step identity
    return q;
  }
  Eigen::MatrixXd M = p.V + step * t.Z;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(p.n(), p.k());
  Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(p.k(), p.k());
  for (int j = 0; j < p.k(); ++j) {
    if (R(j, j) < 0) Q.col(j) *= -1.0;
    if (R(j, j) == 0.0) throw std::runtime_error("retract: rank collapse");
  }
  FramePoint q;
  q.V = std::move(Q);
  return q;
}

std::vector<StiefelTangent> tangentBasis(const FramePoint& p) {
  const int n = p.n(), k = p.k();
  std::vector<StiefelTangent> basis;
  basis.reserve(stiefelDim(n, k));
  const double inv = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, k);
      Z.col(j) = inv * p.V.col(i);
      Z.col(i) = -inv * p.V.col(j);
      basis.push_back(StiefelTangent{std::move(Z)});
    }
  // orthonormal basis of the complement of span(V)
  Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(p.V);
  Eigen::MatrixXd Qfull = qr.matrixQ();
  for (int a = k; a < n; ++a)
    for (int j = 0; j < k; ++j) {
      Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, k);
      Z.col(j) = Qfull.col(a);
      basis.push_back(StiefelTangent{std::move(Z)});
    }
  return basis;
}

FramePoint randomPoint(int n, int k, std::uint64_t seed) {
  if (k > n) throw std::invalid_argument("randomPoint: k must be <= n");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd M(n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) M(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(k, k);
  for (int j = 0; j < k; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  FramePoint p;
  p.V = std::move(Q);
  return p;
}

Eigen::MatrixXd balancedTriple(const Eigen::VectorXd& u1, const Eigen::VectorXd& nu1) {
  Eigen::MatrixXd U(u1.size(), 3);
  U.col(0) = u1;
  U.col(1) = -0.5 * u1 + kSqrt3Half * nu1;
  U.col(2) = -0.5 * u1 - kSqrt3Half * nu1;
  return U;
}

BalancedDirections balancedDirections(const Eigen::VectorXd& u1, const Eigen::VectorXd& nu1) {
  BalancedDirections out;
  out.u = balancedTriple(u1, nu1);
  out.nu.resize(u1.size(), 3);
  out.nu.col(0) = nu1;
  out.nu.col(1) = -kSqrt3Half * u1 - 0.5 * nu1;
  out.nu.col(2) = kSqrt3Half * u1 - 0.5 * nu1;
  return out;
}

Eigen::MatrixXd frameFromDirections(const Eigen::MatrixXd& U) {
  // nu1 recovered from u2 = -u1/2 + sqrt(3)/2 nu1; then the unique Euclidean
  // orthonormal pair in span(u1, nu1) with e1 along u1 and e2 on the nu1 side.
  const Eigen::VectorXd u1 = U.col(0);
  const Eigen::VectorXd nu1 = (U.col(1) + 0.5 * u1) / kSqrt3Half;
  Eigen::VectorXd e1 = u1 / u1.norm();
  Eigen::VectorXd e2 = nu1 - nu1.dot(e1) * e1;
  e2 /= e2.norm();
  Eigen::MatrixXd E(U.rows(), 2);
  E.col(0) = e1;
  E.col(1) = e2;
  return E;
}

namespace {

// Direction triple of a frame under the Gram matrix G at the junction. For
// k = 2 the frame itself parametrizes the triod directions; for k = 3 the
// first column is the junction and columns 1,2 are the tangent 2-frame.
Eigen::MatrixXd directionTriple(const FramePoint& p, const Eigen::MatrixXd& G) {
  const int k = p.k();
  Eigen::MatrixXd pair(p.n(), 2);
  if (k == 2)
    pair = p.V;
  else if (k == 3)
    pair = p.V.rightCols(2);
  else
    throw std::invalid_argument("s3Canonicalize: frame size must be 2 or 3");
  Eigen::MatrixXd on = gramSchmidt(G, pair);
  return balancedTriple(on.col(0), on.col(1));
}

FramePoint frameFromTriple(const FramePoint& like, const Eigen::MatrixXd& U) {
  Eigen::MatrixXd E = frameFromDirections(U);
  FramePoint q;
  if (like.k() == 2) {
    q.V = E;
  } else {
    q.V.resize(like.n(), 3);
    q.V.col(0) = like.V.col(0);
    q.V.col(1) = E.col(0);
    q.V.col(2) = E.col(1);
  }
  return q;
}

}  // namespace

std::vector<FramePoint> s3Orbit(const FramePoint& p, const Eigen::MatrixXd& G) {
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  const Eigen::MatrixXd U = directionTriple(p, G);
  std::vector<FramePoint> orbit;
  orbit.reserve(6);
  for (const auto& s : perms) {
    Eigen::MatrixXd Up(U.rows(), 3);
    for (int j = 0; j < 3; ++j) Up.col(j) = U.col(s[j]);
    orbit.push_back(frameFromTriple(p, Up));
  }
  return orbit;
}

FramePoint s3Canonicalize(const FramePoint& p, const Eigen::MatrixXd& G) {
  auto orbit = s3Orbit(p, G);
  int best = 0;
  for (int i = 1; i < 6; ++i)
    if (lexLess(orbit[i].V, orbit[best].V)) best = i;
  return orbit[best];
}

}  // namespace geonet
