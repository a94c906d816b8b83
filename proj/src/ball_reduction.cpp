#include "geonet/ball_reduction.hpp"

#include <cmath>

namespace geonet {

namespace {

constexpr double kTwoPiThirds = 2.0943951023931953;

Eigen::VectorXd projectOffDirection(const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  return x - x.dot(u) * u;  // P_u x onto u^perp (u Euclidean-unit)
}

}  // namespace

Eigen::MatrixXd directionsFlat(const FramePoint& e) {
  if (e.k() != 2) throw std::invalid_argument("directionsFlat: frame must have two vectors");
  return balancedTriple(e.col(0), e.col(1));
}

BalancedDirections psiG(const BallMetric& g, const Eigen::VectorXd& x, const FramePoint& e) {
  TangentFrame on = gramSchmidtG(g, x, e.V);
  return balancedDirections(on.vectors.col(0), on.vectors.col(1));
}

Triod buildTriod(const BallMetric& g, const TriodParam& p, const ShootOptions& opt) {
  if (p.junction.norm() >= 0.5)
    throw std::invalid_argument("buildTriod: junction must satisfy |x| < 1/2");
  Triod t;
  t.junction = p.junction;
  BalancedDirections dirs = psiG(g, p.junction, p.frame);
  t.directions = dirs.u;
  t.normals = dirs.nu;
  t.totalLength = 0.0;
  for (int j = 0; j < 3; ++j) {
    BoundaryHit hit = hitBoundary(g, p.junction, dirs.u.col(j), opt);
    t.lengths[j] = hit.hitTime;
    t.totalLength += hit.hitTime;
    t.edges[j] = shootGeodesic(g, p.junction, dirs.u.col(j), hit.hitTime, opt);
    t.edges[j].length = hit.hitTime;
  }
  return t;
}

double F0(const Eigen::VectorXd& x, const FramePoint& e) {
  if (x.norm() > 1.0 + 1e-12)
    throw std::domain_error("F0: |x| <= 1 required");
  const Eigen::MatrixXd u = directionsFlat(e);
  double sum = 0.0;
  for (int j = 0; j < 3; ++j)
    sum += std::sqrt(std::max(0.0, 1.0 - projectOffDirection(x, u.col(j)).squaredNorm()));
  return sum;
}

double F0RadialDerivative(const Eigen::VectorXd& x, const FramePoint& e) {
  const Eigen::MatrixXd u = directionsFlat(e);
  double sum = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double p2 = projectOffDirection(x, u.col(j)).squaredNorm();
    sum -= p2 / std::sqrt(1.0 - p2);
  }
  return sum;
}

double F0HessianOrigin(const FramePoint& e, const Eigen::VectorXd& v) {
  const Eigen::MatrixXd u = directionsFlat(e);
  double sum = 0.0;
  for (int j = 0; j < 3; ++j) sum -= projectOffDirection(v, u.col(j)).squaredNorm();
  return sum;
}

double Fg(const BallMetric& g, const TriodParam& p, const ShootOptions& opt) {
  BalancedDirections dirs = psiG(g, p.junction, p.frame);
  double sum = 0.0;
  for (int j = 0; j < 3; ++j) sum += hitBoundary(g, p.junction, dirs.u.col(j), opt).hitTime;
  return sum;
}

BallGradient gradFg(const BallMetric& g, const TriodParam& p, double stepX, double stepFrame,
                    const ShootOptions& opt) {
  const int d = g.dim();
  BallGradient out;
  out.gradX.resize(d);
  for (int i = 0; i < d; ++i) {
    TriodParam pp = p, pm = p;
    pp.junction[i] += stepX;
    pm.junction[i] -= stepX;
    out.gradX[i] = (Fg(g, pp, opt) - Fg(g, pm, opt)) / (2.0 * stepX);
  }
  const std::vector<StiefelTangent> basis = tangentBasis(p.frame);
  out.frameCoeffs.resize(static_cast<int>(basis.size()));
  out.gradFrame.Z = Eigen::MatrixXd::Zero(p.frame.n(), p.frame.k());
  for (size_t i = 0; i < basis.size(); ++i) {
    TriodParam pp = p, pm = p;
    pp.frame = retract(p.frame, basis[i], stepFrame);
    pm.frame = retract(p.frame, basis[i], -stepFrame);
    const double c = (Fg(g, pp, opt) - Fg(g, pm, opt)) / (2.0 * stepFrame);
    out.frameCoeffs[static_cast<int>(i)] = c;
    out.gradFrame.Z += c * basis[i].Z;
  }
  return out;
}

namespace {

Eigen::VectorXd innerGradient(const BallMetric& g, const Eigen::VectorXd& x, const FramePoint& e,
                              double step, const ShootOptions& opt) {
  const int d = g.dim();
  Eigen::VectorXd grad(d);
  for (int i = 0; i < d; ++i) {
    TriodParam pp{x, e}, pm{x, e};
    pp.junction[i] += step;
    pm.junction[i] -= step;
    grad[i] = (Fg(g, pp, opt) - Fg(g, pm, opt)) / (2.0 * step);
  }
  return grad;
}

}  // namespace

InnerSolveResult innerSolveX(const BallMetric& g, const FramePoint& e,
                             const InnerSolveOptions& nopt, const ShootOptions& sopt,
                             const Eigen::VectorXd* warmStart, Eigen::MatrixXd* jacobian) {
  const int d = g.dim();
  Eigen::VectorXd x = warmStart && warmStart->size() == d ? *warmStart
                                                          : Eigen::VectorXd::Zero(d);
  auto gradAt = [&](const Eigen::VectorXd& xq) {
    return innerGradient(g, xq, e, nopt.gradStep, sopt);
  };
  auto clampTrust = [&](Eigen::VectorXd& xq) {
    const double nrm = xq.norm();
    if (nrm > nopt.trustRadius) xq *= (nopt.trustRadius / nrm) * 0.999;
  };
  clampTrust(x);

  Eigen::MatrixXd Jlocal;
  Eigen::MatrixXd& J = jacobian ? *jacobian : Jlocal;
  bool haveJ = jacobian && J.rows() == d && J.cols() == d;

  Eigen::VectorXd grad = gradAt(x);
  double gn = grad.norm();
  int iters = 0;
  int stalls = 0;
  bool clamped = false;
  while (gn > nopt.tol) {
    if (iters >= nopt.maxIters)
      throw std::runtime_error("innerSolveX: no convergence after " + std::to_string(iters) +
                               " iterations, |grad_x F| = " + std::to_string(gn) +
                               (clamped ? " (iterates pinned to the trust ball |x| <= " +
                                              std::to_string(nopt.trustRadius) + ")"
                                        : " (metric too far from flat?)"));
    if (!haveJ) {
      J.resize(d, d);
      for (int i = 0; i < d; ++i) {
        Eigen::VectorXd xp = x + nopt.jacobianStep * Eigen::VectorXd::Unit(d, i);
        J.col(i) = (gradAt(xp) - grad) / nopt.jacobianStep;
      }
      haveJ = true;
    }
    Eigen::VectorXd step = J.colPivHouseholderQr().solve(-grad);
    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half < 10; ++half) {
      Eigen::VectorXd xt = x + lambda * step;
      if (xt.norm() > nopt.trustRadius) {
        clampTrust(xt);
        clamped = true;
      }
      Eigen::VectorXd gt = gradAt(xt);
      if (gt.norm() < gn) {
        if (half > 0) ++stalls;
        x = xt;
        grad = gt;
        gn = gt.norm();
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    ++iters;
    if (!accepted || stalls >= 2) {
      haveJ = false;
      stalls = 0;
      if (!accepted && iters >= nopt.maxIters)
        throw std::runtime_error("innerSolveX: Newton stalled at |grad_x F| = " +
                                 std::to_string(gn));
    }
  }
  // two full polish steps: the returned junction is a machine-level root of
  // the discrete gradient field, independent of the warm start
  for (int p = 0; p < 2 && haveJ; ++p) {
    Eigen::VectorXd step = J.colPivHouseholderQr().solve(-grad);
    Eigen::VectorXd xt = x + step;
    if (xt.norm() > nopt.trustRadius) break;
    Eigen::VectorXd gt = gradAt(xt);
    if (gt.norm() >= gn) break;
    x = xt;
    grad = gt;
    gn = gt.norm();
  }
  return InnerSolveResult{x, iters, gn};
}

VerificationReport verifyTriod(const BallMetric& g, const Triod& t, double tol) {
  VerificationReport rep;
  rep.tol = tol;

  // (a) geodesic residual: the covariant acceleration of the dense curve at
  // off-node samples
  double geo = 0.0;
  for (const auto& edge : t.edges) {
    const int samples = 48;
    for (int i = 0; i <= samples; ++i) {
      const double s = edge.length * (i + 0.37) / (samples + 1.0);
      const Eigen::VectorXd gamma = edge.position(s);
      const Eigen::VectorXd tau = edge.tangent(s);
      const Eigen::VectorXd dtau = edge.tangentDerivative(s);
      const Eigen::VectorXd acc = covariantDerivativeAlong(g, gamma, tau, tau, dtau);
      geo = std::max(geo, g.norm(gamma, acc));
    }
  }
  rep.geodesicResidual = geo;

  // (b) junction balance of the exterior tangents at x
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(t.junction.size());
  for (const auto& edge : t.edges) sum -= edge.tau.front();
  rep.balanceResidual = g.norm(t.junction, sum);

  // (c) orthogonality to the boundary sphere at the endpoints
  double ortho = 0.0;
  for (const auto& edge : t.edges) {
    const Eigen::VectorXd q = edge.gamma.back();
    const Eigen::VectorXd tau = edge.tau.back();
    Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(q);
    const Eigen::MatrixXd tangentsOfBoundary = qr.matrixQ().rightCols(q.size() - 1);
    for (int i = 0; i < tangentsOfBoundary.cols(); ++i)
      ortho = std::max(ortho, std::abs(g.inner(q, tau, tangentsOfBoundary.col(i))));
  }
  rep.orthogonalityResidual = ortho;

  // (d) junction angles against 2 pi / 3
  double ang = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const Eigen::VectorXd ta = t.edges[a].tau.front(), tb = t.edges[b].tau.front();
      const double c = g.inner(t.junction, ta, tb) /
                       (g.norm(t.junction, ta) * g.norm(t.junction, tb));
      ang = std::max(ang, std::abs(std::acos(std::clamp(c, -1.0, 1.0)) - kTwoPiThirds));
    }
  rep.angleResidual = ang;

  rep.pass = rep.maxResidual() <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Outer search

namespace {

/// Phi(e) = F_g(x_g(e), e) with warm-started inner solves. The gradient is
/// the partial frame gradient of F_g at the inner solution (the junction
/// derivative vanishes there).
class BallReducedProblem : public ReducedProblem {
 public:
  BallReducedProblem(const BallMetric& g, const BallSearchInput& in)
      : g_(g), in_(in), m_(stiefelDim(g.dim(), 2)) {}

  int tangentDim() const override { return m_; }

  double value(const FramePoint& base, const std::vector<StiefelTangent>& basis,
               const Eigen::VectorXd& theta) override {
    const FramePoint e = chartPoint(base, basis, theta);
    const Eigen::VectorXd x = solveInner(e);
    return Fg(g_, TriodParam{x, e}, in_.shoot);
  }

  Eigen::VectorXd gradient(const FramePoint& base, const std::vector<StiefelTangent>& basis,
                           const Eigen::VectorXd& theta) override {
    const FramePoint e = chartPoint(base, basis, theta);
    const Eigen::VectorXd x = solveInner(e);
    Eigen::VectorXd grad(m_);
    const double h = in_.search.fdStep;
    for (int i = 0; i < m_; ++i) {
      Eigen::VectorXd tp = theta + h * Eigen::VectorXd::Unit(m_, i);
      Eigen::VectorXd tm = theta - h * Eigen::VectorXd::Unit(m_, i);
      const double fp = Fg(g_, TriodParam{x, chartPoint(base, basis, tp)}, in_.shoot);
      const double fm = Fg(g_, TriodParam{x, chartPoint(base, basis, tm)}, in_.shoot);
      grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
  }

  int innerIterations() const override { return lastInnerIters_; }
  const Eigen::VectorXd& lastJunction() const { return warmX_; }

  void resetWarmStart() {
    warmX_.resize(0);
    innerJacobian_.resize(0, 0);
    solvedFrame_.resize(0, 0);
  }

 private:
  Eigen::VectorXd solveInner(const FramePoint& e) {
    if (solvedFrame_.size() == e.V.size() && solvedFrame_ == e.V) return warmX_;
    InnerSolveResult r = innerSolveX(g_, e, in_.inner, in_.shoot,
                                     warmX_.size() ? &warmX_ : nullptr, &innerJacobian_);
    warmX_ = r.solution;
    solvedFrame_ = e.V;
    lastInnerIters_ = r.iterations;
    return r.solution;
  }

  const BallMetric& g_;
  const BallSearchInput& in_;
  int m_;
  Eigen::VectorXd warmX_;
  Eigen::MatrixXd solvedFrame_;
  Eigen::MatrixXd innerJacobian_;
  int lastInnerIters_ = 0;
};

}  // namespace

BallSearchResult searchCriticalBall(const BallMetric& g, const BallSearchInput& in) {
  const int d = g.dim();
  BallSearchResult out;
  std::vector<SolveReport> converged;
  BallReducedProblem prob(g, in);

  for (int s = 0; s < in.search.count; ++s) {
    const std::uint64_t seed = in.search.seed + static_cast<std::uint64_t>(s);
    out.summary.started += 1;
    FramePoint start = randomPoint(d, 2, seed);
    if (d == 2) {
      // V_2(R^2) is disconnected: alternate starts across the two components
      const int want = (s % 2 == 0) ? 1 : -1;
      if (start.orientationSign() != want) start.V.col(1) *= -1.0;
    }
    prob.resetWarmStart();
    LocalSearchResult loc = findCriticalPoint(prob, start, in.search);
    if (!loc.converged) {
      out.failures.push_back(StartFailure{seed, loc.error});
      out.summary.failed += 1;
      continue;
    }
    try {
      SolveReport rep;
      rep.outerIterations = loc.iterations;
      rep.gradNorm = loc.gradNorm;
      // inner junction and value at the converged frame
      Eigen::MatrixXd innerJ;
      InnerSolveResult inner = innerSolveX(g, loc.frame, in.inner, in.shoot, nullptr, &innerJ);
      rep.innerIterations = inner.iterations;
      rep.junction = inner.solution;
      TriodParam param{inner.solution, loc.frame};
      Triod triod = buildTriod(g, param, in.shoot);
      rep.value = triod.totalLength;
      for (int j = 0; j < 3; ++j) rep.edgeLengths[j] = triod.lengths[j];
      rep.verification = verifyTriod(g, triod, in.verifyTol);
      rep.canonicalFrame = s3Canonicalize(loc.frame, g.at(inner.solution)).V;
      rep.component = d == 2 ? loc.frame.orientationSign() : 0;
      rep.seeds = {seed};
      Eigen::MatrixXd H = reducedHessian(prob, loc.frame, in.search);
      hessianInertia(H, in.search.nullCutoff, rep.inertiaNegative, rep.inertiaZero,
                     rep.inertiaPositive);
      converged.push_back(std::move(rep));
      out.summary.converged += 1;
    } catch (const std::exception& e) {
      out.failures.push_back(StartFailure{seed, e.what()});
      out.summary.failed += 1;
    }
  }
  out.solutions = clusterReports(std::move(converged), stiefelDim(d, 2), in.search);
  out.summary.classes = static_cast<int>(out.solutions.size());
  return out;
}

}  // namespace geonet
