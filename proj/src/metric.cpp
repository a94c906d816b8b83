#include "geonet/metric.hpp"

#include <cmath>
#include <sstream>

namespace geonet {

namespace {

constexpr double kSphereDomainTol = 1e-10;

std::string pointToString(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

int upperIndex(int d, int i, int j) {
  // row-major upper triangle, i <= j
  return i * d - i * (i - 1) / 2 + (j - i);
}

}  // namespace

// ---------------------------------------------------------------------------
// BallMetric

BallMetric BallMetric::standard(int d) {
  if (d < 2) throw MetricError("BallMetric: dimension must be >= 2");
  BallMetric m;
  m.kind_ = MetricKind::Standard;
  m.dim_ = d;
  return m;
}

BallMetric BallMetric::conformal(int d, double eps, Polynomial f) {
  if (d < 2) throw MetricError("BallMetric: dimension must be >= 2");
  if (eps < 0) throw MetricError("BallMetric: epsilon must be >= 0");
  if (f.vars() != d) throw MetricError("BallMetric: conformal exponent must have d variables");
  if (f.totalDegree() > 3) throw MetricError("BallMetric: conformal exponent degree must be <= 3");
  BallMetric m;
  m.kind_ = MetricKind::Conformal;
  m.dim_ = d;
  m.eps_ = eps;
  m.f_ = std::move(f);
  for (int v = 0; v < d; ++v) m.fGrad_.push_back(m.f_.partial(v));
  return m;
}

BallMetric BallMetric::bilinear(int d, double eps, std::vector<Polynomial> upperH) {
  if (d < 2) throw MetricError("BallMetric: dimension must be >= 2");
  if (eps < 0) throw MetricError("BallMetric: epsilon must be >= 0");
  if (static_cast<int>(upperH.size()) != d * (d + 1) / 2)
    throw MetricError("BallMetric: bilinear form needs d(d+1)/2 upper-triangle entries");
  for (const auto& p : upperH)
    if (p.vars() != d) throw MetricError("BallMetric: bilinear entry has wrong variable count");
  BallMetric m;
  m.kind_ = MetricKind::Bilinear;
  m.dim_ = d;
  m.eps_ = eps;
  m.upperH_ = std::move(upperH);
  m.upperHGrad_.resize(m.upperH_.size());
  for (size_t e = 0; e < m.upperH_.size(); ++e)
    for (int v = 0; v < d; ++v) m.upperHGrad_[e].push_back(m.upperH_[e].partial(v));
  m.checkPositiveDefiniteOnGrid();
  return m;
}

void BallMetric::requireInDomain(const Eigen::VectorXd& x) const {
  if (x.size() != dim_)
    throw MetricError("BallMetric: point " + pointToString(x) + " has wrong dimension");
  if (x.norm() > 1.0 + 1e-12)
    throw MetricError("BallMetric: point " + pointToString(x) + " violates |x| <= 1");
}

double BallMetric::phi(const Eigen::VectorXd& x) const {
  if (kind_ != MetricKind::Conformal || eps_ == 0.0) return 0.0;
  return eps_ * f_(x);
}

Eigen::VectorXd BallMetric::gradPhi(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g(dim_);
  gradPhiInto(x, g);
  return g;
}

void BallMetric::gradPhiInto(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  if (kind_ != MetricKind::Conformal || eps_ == 0.0) {
    out.setZero();
    return;
  }
  f_.gradientInto(x, out);
  out *= eps_;
}

Eigen::MatrixXd BallMetric::at(const Eigen::VectorXd& x) const {
  requireInDomain(x);
  switch (kind_) {
    case MetricKind::Standard:
      return Eigen::MatrixXd::Identity(dim_, dim_);
    case MetricKind::Conformal: {
      if (eps_ == 0.0) return Eigen::MatrixXd::Identity(dim_, dim_);
      return std::exp(2.0 * eps_ * f_(x)) * Eigen::MatrixXd::Identity(dim_, dim_);
    }
    case MetricKind::Bilinear: {
      Eigen::MatrixXd G = Eigen::MatrixXd::Identity(dim_, dim_);
      if (eps_ == 0.0) return G;
      for (int i = 0; i < dim_; ++i)
        for (int j = i; j < dim_; ++j) {
          double h = eps_ * upperH_[upperIndex(dim_, i, j)](x);
          G(i, j) += h;
          if (i != j) G(j, i) += h;
        }
      return G;
    }
  }
  return Eigen::MatrixXd::Identity(dim_, dim_);
}

std::vector<Eigen::MatrixXd> BallMetric::derivative(const Eigen::VectorXd& x) const {
  requireInDomain(x);
  std::vector<Eigen::MatrixXd> dG(dim_, Eigen::MatrixXd::Zero(dim_, dim_));
  if (isFlat()) return dG;
  if (kind_ == MetricKind::Conformal) {
    const double s = std::exp(2.0 * eps_ * f_(x));
    for (int k = 0; k < dim_; ++k)
      dG[k] = (2.0 * eps_ * fGrad_[k](x) * s) * Eigen::MatrixXd::Identity(dim_, dim_);
    return dG;
  }
  for (int k = 0; k < dim_; ++k)
    for (int i = 0; i < dim_; ++i)
      for (int j = i; j < dim_; ++j) {
        double v = eps_ * upperHGrad_[upperIndex(dim_, i, j)][k](x);
        dG[k](i, j) = v;
        if (i != j) dG[k](j, i) = v;
      }
  return dG;
}

std::vector<Eigen::MatrixXd> BallMetric::christoffel(const Eigen::VectorXd& x) const {
  requireInDomain(x);
  std::vector<Eigen::MatrixXd> Gamma(dim_, Eigen::MatrixXd::Zero(dim_, dim_));
  if (isFlat()) return Gamma;
  if (kind_ == MetricKind::Conformal) {
    // Gamma^k_ij = d_i(phi) delta_jk + d_j(phi) delta_ik - d_k(phi) delta_ij
    const Eigen::VectorXd gp = gradPhi(x);
    for (int k = 0; k < dim_; ++k)
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) {
          double v = 0.0;
          if (j == k) v += gp[i];
          if (i == k) v += gp[j];
          if (i == j) v -= gp[k];
          Gamma[k](i, j) = v;
        }
    return Gamma;
  }
  const Eigen::MatrixXd G = at(x);
  const std::vector<Eigen::MatrixXd> dG = derivative(x);
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw MetricError("BallMetric: metric not positive-definite at " + pointToString(x));
  for (int l = 0; l < dim_; ++l) {
    Eigen::MatrixXd lower(dim_, dim_);  // lower(i,j) = Gamma_{l,ij}
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        lower(i, j) = 0.5 * (dG[i](j, l) + dG[j](i, l) - dG[l](i, j));
    // accumulate G^{kl} * lower into Gamma[k]
    Eigen::VectorXd col = llt.solve(Eigen::VectorXd::Unit(dim_, l));
    for (int k = 0; k < dim_; ++k) Gamma[k] += col[k] * lower;
  }
  return Gamma;
}

Eigen::VectorXd BallMetric::geodesicAcceleration(const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& v) const {
  if (isFlat()) return Eigen::VectorXd::Zero(dim_);
  if (kind_ == MetricKind::Conformal) {
    // -Gamma(v,v) = |v|^2 grad(phi) - 2 (grad(phi).v) v
    const Eigen::VectorXd gp = gradPhi(x);
    return v.squaredNorm() * gp - 2.0 * gp.dot(v) * v;
  }
  const auto Gamma = christoffel(x);
  Eigen::VectorXd a(dim_);
  for (int k = 0; k < dim_; ++k) a[k] = -v.dot(Gamma[k] * v);
  return a;
}

double BallMetric::inner(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& v) const {
  if (isFlat()) return u.dot(v);
  if (kind_ == MetricKind::Conformal) return std::exp(2.0 * eps_ * f_(x)) * u.dot(v);
  return u.dot(at(x) * v);
}

double BallMetric::norm(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const {
  return std::sqrt(inner(x, v, v));
}

void BallMetric::checkPositiveDefiniteOnGrid() const {
  // Deterministic Halton sampling of the closed ball, 512 in-ball points plus
  // the axis boundary points. Sampled soundness check, not a proof.
  const int target = 512;
  Eigen::MatrixXd pts = haltonPoints(dim_, 8 * target);
  int accepted = 0;
  for (int r = 0; r < pts.rows() && accepted < target; ++r) {
    Eigen::VectorXd x = 2.0 * pts.row(r).transpose().eval() - Eigen::VectorXd::Ones(dim_);
    if (x.norm() > 1.0) continue;
    ++accepted;
    Eigen::LLT<Eigen::MatrixXd> llt(at(x));
    if (llt.info() != Eigen::Success)
      throw MetricError("BallMetric: not positive-definite at sample " + pointToString(x));
  }
  for (int i = 0; i < dim_; ++i)
    for (double s : {-1.0, 1.0}) {
      Eigen::VectorXd x = s * Eigen::VectorXd::Unit(dim_, i);
      Eigen::LLT<Eigen::MatrixXd> llt(at(x));
      if (llt.info() != Eigen::Success)
        throw MetricError("BallMetric: not positive-definite at boundary point " + pointToString(x));
    }
}

// ---------------------------------------------------------------------------
// SphereMetric

SphereMetric SphereMetric::round(int d) {
  if (d < 2) throw MetricError("SphereMetric: dimension must be >= 2");
  SphereMetric m;
  m.dim_ = d;
  m.f_ = Polynomial::zero(d + 1);
  return m;
}

SphereMetric SphereMetric::conformal(int d, double eps, Polynomial f) {
  if (d < 2) throw MetricError("SphereMetric: dimension must be >= 2");
  if (eps < 0) throw MetricError("SphereMetric: epsilon must be >= 0");
  if (f.vars() != d + 1)
    throw MetricError("SphereMetric: conformal exponent must have d+1 ambient variables");
  if (f.totalDegree() > 3) throw MetricError("SphereMetric: conformal exponent degree must be <= 3");
  SphereMetric m;
  m.dim_ = d;
  m.eps_ = eps;
  m.f_ = std::move(f);
  for (int v = 0; v < d + 1; ++v) m.fGrad_.push_back(m.f_.partial(v));
  return m;
}

void SphereMetric::requireInDomain(const Eigen::VectorXd& x) const {
  if (x.size() != ambientDim())
    throw MetricError("SphereMetric: point " + pointToString(x) + " has wrong ambient dimension");
  if (std::abs(x.norm() - 1.0) > kSphereDomainTol)
    throw MetricError("SphereMetric: point " + pointToString(x) + " violates | |x| - 1 | <= 1e-10");
}

double SphereMetric::phi(const Eigen::VectorXd& x) const {
  if (isRound()) return 0.0;
  return eps_ * f_(x / x.norm());
}

Eigen::VectorXd SphereMetric::gradPhi(const Eigen::VectorXd& x) const {
  const int n = ambientDim();
  if (isRound()) return Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd u = x / x.norm();
  Eigen::VectorXd g(n);
  for (int v = 0; v < n; ++v) g[v] = eps_ * fGrad_[v](u);
  // The zero-homogeneous extension has a purely tangential gradient on S^d.
  return g - g.dot(u) * u;
}

double SphereMetric::conformalFactor(const Eigen::VectorXd& x) const {
  return std::exp(2.0 * phi(x));
}

void SphereMetric::conformalData(const Eigen::VectorXd& x, Eigen::VectorXd& unitBuf,
                                 Eigen::VectorXd& gradOut, double& phiOut) const {
  if (isRound()) {
    gradOut.setZero();
    phiOut = 0.0;
    return;
  }
  unitBuf = x / x.norm();
  phiOut = eps_ * f_(unitBuf);
  f_.gradientInto(unitBuf, gradOut);
  gradOut *= eps_;
  gradOut -= gradOut.dot(unitBuf) * unitBuf;
}

Eigen::MatrixXd SphereMetric::at(const Eigen::VectorXd& x) const {
  requireInDomain(x);
  return conformalFactor(x) * Eigen::MatrixXd::Identity(ambientDim(), ambientDim());
}

double SphereMetric::inner(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v) const {
  return conformalFactor(x) * u.dot(v);
}

double SphereMetric::norm(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const {
  return std::sqrt(inner(x, v, v));
}

// ---------------------------------------------------------------------------
// Gram--Schmidt and covariant derivatives

Eigen::MatrixXd gramSchmidt(const Eigen::MatrixXd& G, const Eigen::MatrixXd& V) {
  const int k = static_cast<int>(V.cols());
  Eigen::MatrixXd out = V;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < i; ++j)
      out.col(i) -= (out.col(j).dot(G * out.col(i))) * out.col(j);
    double nrm = std::sqrt(out.col(i).dot(G * out.col(i)));
    if (!(nrm > 1e-12 * (1.0 + V.col(i).norm())))
      throw MetricError("gramSchmidt: input vectors are rank deficient");
    out.col(i) /= nrm;
  }
  return out;
}

TangentFrame gramSchmidtG(const BallMetric& g, const Eigen::VectorXd& x, const Eigen::MatrixXd& V) {
  TangentFrame f;
  f.base = x;
  f.vectors = gramSchmidt(g.at(x), V);
  f.orthonormal = true;
  return f;
}

TangentFrame gramSchmidtG(const SphereMetric& g, const Eigen::VectorXd& x, const Eigen::MatrixXd& V) {
  g.requireInDomain(x);
  for (int i = 0; i < V.cols(); ++i)
    if (std::abs(V.col(i).dot(x)) > 1e-12 * (1.0 + V.col(i).norm()))
      throw MetricError("gramSchmidtG: input vector " + std::to_string(i) +
                        " is not tangent to the sphere at the base point");
  TangentFrame f;
  f.base = x;
  const int n = g.ambientDim();
  f.vectors = gramSchmidt(g.conformalFactor(x) * Eigen::MatrixXd::Identity(n, n), V);
  f.orthonormal = true;
  return f;
}

Eigen::VectorXd covariantDerivativeAlong(const BallMetric& g, const Eigen::VectorXd& gamma,
                                         const Eigen::VectorXd& dgamma, const Eigen::VectorXd& W,
                                         const Eigen::VectorXd& dW) {
  if (g.isFlat()) return dW;
  if (g.kind() == MetricKind::Conformal) {
    const Eigen::VectorXd gp = g.gradPhi(gamma);
    return dW + gp.dot(dgamma) * W + gp.dot(W) * dgamma - dgamma.dot(W) * gp;
  }
  const auto Gamma = g.christoffel(gamma);
  Eigen::VectorXd out = dW;
  for (int k = 0; k < g.dim(); ++k) out[k] += dgamma.dot(Gamma[k] * W);
  return out;
}

Eigen::VectorXd covariantDerivativeAlong(const SphereMetric& g, const Eigen::VectorXd& gamma,
                                         const Eigen::VectorXd& dgamma, const Eigen::VectorXd& W,
                                         const Eigen::VectorXd& dW) {
  // Round connection along a spherical curve: ambient derivative plus
  // g0(dgamma, W) * gamma correction; then the conformal-change terms.
  Eigen::VectorXd nabla0 = dW + dgamma.dot(W) * gamma;
  if (g.isRound()) return nabla0;
  const Eigen::VectorXd gp = g.gradPhi(gamma);
  return nabla0 + gp.dot(dgamma) * W + gp.dot(W) * dgamma - dgamma.dot(W) * gp;
}

// ---------------------------------------------------------------------------
// Halton

Eigen::MatrixXd haltonPoints(int d, int count) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                               31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  if (d > static_cast<int>(std::size(primes)))
    throw MetricError("haltonPoints: dimension too large");
  Eigen::MatrixXd pts(count, d);
  for (int j = 0; j < d; ++j) {
    const int base = primes[j];
    for (int i = 0; i < count; ++i) {
      double f = 1.0, r = 0.0;
      int n = i + 1;
      while (n > 0) {
        f /= base;
        r += f * (n % base);
        n /= base;
      }
      pts(i, j) = r;
    }
  }
  return pts;
}

}  // namespace geonet
