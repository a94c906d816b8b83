#include "geonet/sphere_reduction.hpp"

#include <cmath>

namespace geonet {

long long gEgCalls = 0, gInnerCalls = 0, gInnerIters = 0, gInnerJacBuilds = 0,
          gTwoPointCalls = 0;

namespace {

constexpr double kTwoPiThirds = 2.0943951023931953;

Eigen::VectorXd junctionOf(const FramePoint& f) { return f.col(0); }

// Deterministic g-orthonormal completion of the direction plane inside
// T_x S^d: greedy pick of ambient axes with the largest residual after
// Euclidean projection off {x, u1, nu1, picked...}. Conformal metrics share
// orthogonality with the round one, so only the final normalization sees g.
Eigen::MatrixXd completeZBasis(const SphereMetric& g, const Eigen::VectorXd& x,
                               const Eigen::MatrixXd& u, const Eigen::MatrixXd& nu) {
  const int n = g.ambientDim();
  const int want = g.dim() - 2;
  Eigen::MatrixXd Z(n, want);
  if (want == 0) return Z;
  std::vector<Eigen::VectorXd> fixed;
  fixed.push_back(x / x.norm());
  fixed.push_back(u.col(0) / u.col(0).norm());
  fixed.push_back(nu.col(0) / nu.col(0).norm());
  const double scale = 1.0 / std::sqrt(g.conformalFactor(x));
  for (int made = 0; made < want; ++made) {
    int bestAxis = -1;
    double bestNorm = -1.0;
    Eigen::VectorXd bestRes;
    for (int a = 0; a < n; ++a) {
      Eigen::VectorXd r = Eigen::VectorXd::Unit(n, a);
      for (const auto& fvec : fixed) r -= r.dot(fvec) * fvec;
      const double nr = r.norm();
      if (nr > bestNorm + 1e-12) {
        bestNorm = nr;
        bestAxis = a;
        bestRes = r;
      }
    }
    (void)bestAxis;
    bestRes /= bestNorm;
    fixed.push_back(bestRes);
    Z.col(made) = scale * bestRes;  // g-unit
  }
  return Z;
}

double simpson(const Eigen::VectorXd& f) {
  const int N = static_cast<int>(f.size()) - 1;  // even
  const double h = 1.0 / N;
  double sum = f[0] + f[N];
  for (int i = 1; i < N; ++i) sum += f[i] * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

BalancedDirections phiG(const SphereMetric& g, const FramePoint& f) {
  if (f.k() != 3) throw std::invalid_argument("phiG: frame must be (x, e1, e2)");
  const Eigen::VectorXd x = junctionOf(f);
  TangentFrame on = gramSchmidtG(g, x, f.V.rightCols(2));
  return balancedDirections(on.vectors.col(0), on.vectors.col(1));
}

ThetaNetwork buildTheta(const SphereMetric& g, const ThetaParam& p, const ShootOptions& opt,
                        ThetaHints* hints) {
  ThetaNetwork net;
  net.junctionX = junctionOf(p.frame);
  net.junctionY = p.y;
  BalancedDirections dirs = phiG(g, p.frame);
  net.directions = dirs.u;
  net.normals = dirs.nu;
  net.zBasis = completeZBasis(g, net.junctionX, dirs.u, dirs.nu);
  const int d = g.dim();
  net.curvatureCoords.resize(d - 1, 3);
  for (int j = 0; j < 3; ++j) {
    TwoPointHint* hint = hints ? &hints->edge[j] : nullptr;
    TwoPointResult r;
    try {
      r = solveTwoPoint(g, net.junctionX, dirs.u.col(j), p.y, opt, hint);
    } catch (const std::exception& e) {
      throw ShootingError("buildTheta: edge " + std::to_string(j + 1) + ": " + e.what());
    }
    net.edges[j] = std::move(r.trajectory);
    net.lengths[j] = r.length;
    net.totalLength += r.length;
    net.curvatureCoords(0, j) = g.inner(net.junctionX, r.curvature, dirs.nu.col(j));
    for (int i = 0; i < d - 2; ++i)
      net.curvatureCoords(i + 1, j) = g.inner(net.junctionX, r.curvature, net.zBasis.col(i));
  }
  return net;
}

double Eg(const SphereMetric& g, const ThetaParam& p, const ShootOptions& opt,
          ThetaHints* hints) {
  ++gEgCalls;
  gTwoPointCalls += 3;
  const Eigen::VectorXd x = junctionOf(p.frame);
  BalancedDirections dirs = phiG(g, p.frame);
  double total = 0.0;
  for (int j = 0; j < 3; ++j) {
    TwoPointHint* hint = hints ? &hints->edge[j] : nullptr;
    total += solveTwoPoint(g, x, dirs.u.col(j), p.y, opt, hint, /*wantTrajectory=*/false).length;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Transported frames and Phi diagnostics

Eigen::MatrixXd TransportedFrame::frameAt(double s) const {
  Eigen::VectorXd y = dense.eval(std::clamp(s, dense.tBegin(), dense.tEnd()));
  Eigen::MatrixXd F(ambientDim, vectors);
  for (int c = 0; c < vectors; ++c) F.col(c) = y.segment(c * ambientDim, ambientDim);
  return F;
}

TransportedFrame transportFrame(const SphereMetric& g, const Trajectory& edge,
                                const Eigen::VectorXd& kappa, const Eigen::MatrixXd& initial) {
  const int n = g.ambientDim();
  const int m = static_cast<int>(initial.cols());
  if (kappa.size() != m)
    throw std::invalid_argument("transportFrame: one curvature coordinate per vector required");
  Eigen::VectorXd y0(n * m);
  for (int c = 0; c < m; ++c) y0.segment(c * n, n) = initial.col(c);

  auto rhs = [&](double s, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const Eigen::VectorXd gamma = edge.position(std::clamp(s, 0.0, edge.length));
    const Eigen::VectorXd tau = edge.tangent(std::clamp(s, 0.0, edge.length));
    dy.resize(n * m);
    const bool round = g.isRound();
    Eigen::VectorXd gp;
    double dphiTau = 0.0;
    if (!round) {
      gp = g.gradPhi(gamma);
      dphiTau = gp.dot(tau);
    }
    for (int c = 0; c < m; ++c) {
      const auto W = y.segment(c * n, n);
      const double tw = tau.dot(W);
      Eigen::VectorXd dW = -kappa[c] * tau - tw * gamma;
      if (!round) dW += -dphiTau * W - gp.dot(W) * tau + tw * gp;
      dy.segment(c * n, n) = dW;
    }
  };
  TransportedFrame out;
  out.ambientDim = n;
  out.vectors = m;
  integrateFixed(rhs, 0.0, std::move(y0), edge.length, 160, {}, &out.dense);
  return out;
}

PhiWorkspace makePhiWorkspace(const SphereMetric& g, const ThetaParam& p,
                              const ShootOptions& opt) {
  PhiWorkspace ws;
  ws.net = buildTheta(g, p, opt);
  const int d = g.dim();
  for (int j = 0; j < 3; ++j) {
    Eigen::MatrixXd initial(g.ambientDim(), d - 1);
    initial.col(0) = ws.net.normals.col(j);
    for (int i = 0; i < d - 2; ++i) initial.col(i + 1) = ws.net.zBasis.col(i);
    ws.frames[j] = transportFrame(g, ws.net.edges[j], ws.net.curvatureCoords.col(j), initial);
  }
  return ws;
}

PhiVectors phiVectors(const SphereMetric& g, const ThetaParam& p, const PhiWorkspace& ws,
                      const StiefelTangent& xi, double fdStep, const ShootOptions& opt) {
  const int d = g.dim();
  const int quadNodes = 96;  // composite Simpson panels over [0,1]

  ThetaParam pPlus = p, pMinus = p;
  pPlus.frame = retract(p.frame, xi, fdStep);
  pMinus.frame = retract(p.frame, xi, -fdStep);
  ThetaHints warm;
  for (int j = 0; j < 3; ++j) {
    warm.edge[j].curvature = ws.net.curvatureCoords(0, j) * ws.net.normals.col(j);
    for (int i = 0; i < d - 2; ++i)
      warm.edge[j].curvature += ws.net.curvatureCoords(i + 1, j) * ws.net.zBasis.col(i);
    warm.edge[j].length = ws.net.lengths[j];
    warm.edge[j].valid = true;
  }
  ThetaHints warmMinus = warm;
  ThetaNetwork netPlus = buildTheta(g, pPlus, opt, &warm);
  ThetaNetwork netMinus = buildTheta(g, pMinus, opt, &warmMinus);

  PhiVectors out;
  out.coeffs.resize(d - 1, 3);
  for (int j = 0; j < 3; ++j) {
    Eigen::MatrixXd integrand(quadNodes + 1, d - 1);
    for (int q = 0; q <= quadNodes; ++q) {
      const double t = static_cast<double>(q) / quadNodes;
      const Eigen::VectorXd gPlus = netPlus.edges[j].position(t * netPlus.lengths[j]);
      const Eigen::VectorXd gMinus = netMinus.edges[j].position(t * netMinus.lengths[j]);
      const Eigen::VectorXd X = (gPlus - gMinus) / (2.0 * fdStep);
      const Eigen::VectorXd base = ws.net.edges[j].position(t * ws.net.lengths[j]);
      const Eigen::MatrixXd frame = ws.frames[j].frameAt(t * ws.net.lengths[j]);
      for (int c = 0; c < d - 1; ++c)
        integrand(q, c) = g.inner(base, X, frame.col(c));
    }
    Eigen::VectorXd coeff(d - 1);
    for (int c = 0; c < d - 1; ++c) coeff[c] = simpson(integrand.col(c));
    out.coeffs.col(j) = coeff;
    out.Phi[j] = coeff[0] * ws.net.normals.col(j);
    for (int i = 0; i < d - 2; ++i) out.Phi[j] += coeff[i + 1] * ws.net.zBasis.col(i);
  }
  return out;
}

double checkPhiInvertibility(const SphereMetric& g, const ThetaParam& p, const ShootOptions& opt,
                             double fdStep) {
  PhiWorkspace ws = makePhiWorkspace(g, p, opt);
  const std::vector<StiefelTangent> basis = tangentBasis(p.frame);
  const int m = static_cast<int>(basis.size());
  const int rows = 3 * (g.dim() - 1);
  Eigen::MatrixXd M(rows, m);
  for (int i = 0; i < m; ++i) {
    PhiVectors pv = phiVectors(g, p, ws, basis[i], fdStep, opt);
    for (int j = 0; j < 3; ++j)
      M.block(j * (g.dim() - 1), i, g.dim() - 1, 1) = pv.coeffs.col(j);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues().minCoeff();
}

double hessianE0(const FramePoint& f, const StiefelTangent& xi, const Eigen::VectorXd& w) {
  const Eigen::MatrixXd u = balancedTriple(f.col(1), f.col(2));
  const Eigen::VectorXd v = xi.Z.col(0);
  const Eigen::VectorXd vw = v + w;
  double sum = 0.0;
  for (int j = 0; j < 3; ++j) sum += (vw - vw.dot(u.col(j)) * u.col(j)).squaredNorm();
  return -0.25 * M_PI * sum;
}

// ---------------------------------------------------------------------------
// Inner solve in the second junction

namespace {

Eigen::MatrixXd sphereTangentBasisAt(const Eigen::VectorXd& y) {
  Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.matrixQ().rightCols(y.size() - 1);
}

Eigen::VectorXd sphereRetract(const Eigen::VectorXd& y, const Eigen::VectorXd& step) {
  Eigen::VectorXd out = y + step;
  return out / out.norm();
}

}  // namespace

SphereInnerResult innerSolveY(const SphereMetric& g, const FramePoint& f,
                              const SphereInnerOptions& nopt, const ShootOptions& sopt,
                              const Eigen::VectorXd* warmStart, Eigen::MatrixXd* jacobian,
                              ThetaHints* hints) {
  const int d = g.dim();
  const Eigen::VectorXd x = f.col(0);
  const Eigen::VectorXd antipode = -x;
  Eigen::VectorXd y = warmStart && warmStart->size() == x.size() ? *warmStart : antipode;

  ThetaHints localHints;
  ThetaHints& hintRef = hints ? *hints : localHints;

  auto capClamp = [&](Eigen::VectorXd& yq) {
    const Eigen::VectorXd off = yq - antipode;
    const double r = off.norm();
    if (r > sopt.epsBall * 0.999) {
      yq = antipode + off * (sopt.epsBall * 0.999 / r);
      yq /= yq.norm();
    }
  };
  capClamp(y);

  auto energyAt = [&](const Eigen::VectorXd& yq) {
    return Eg(g, ThetaParam{f, yq}, sopt, &hintRef);
  };
  auto gradAt = [&](const Eigen::VectorXd& yq, const Eigen::MatrixXd& B) {
    Eigen::VectorXd grad(d);
    for (int i = 0; i < d; ++i) {
      const Eigen::VectorXd yp = sphereRetract(yq, nopt.gradStep * B.col(i));
      const Eigen::VectorXd ym = sphereRetract(yq, -nopt.gradStep * B.col(i));
      grad[i] = (energyAt(yp) - energyAt(ym)) / (2.0 * nopt.gradStep);
    }
    return grad;
  };

  Eigen::MatrixXd Jlocal;
  Eigen::MatrixXd& J = jacobian ? *jacobian : Jlocal;
  bool haveJ = jacobian && J.rows() == d && J.cols() == d;

  ++gInnerCalls;
  Eigen::MatrixXd B = sphereTangentBasisAt(y);
  Eigen::VectorXd grad = gradAt(y, B);
  double gn = grad.norm();
  int iters = 0;
  int stalls = 0;
  while (gn > nopt.tol) {
    ++gInnerIters;
    if (iters >= nopt.maxIters)
      throw std::runtime_error("innerSolveY: no convergence after " + std::to_string(iters) +
                               " iterations, |grad_y E| = " + std::to_string(gn));
    if (!haveJ) {
      ++gInnerJacBuilds;
      J.resize(d, d);
      for (int i = 0; i < d; ++i) {
        const Eigen::VectorXd yp = sphereRetract(y, nopt.jacobianStep * B.col(i));
        J.col(i) = (gradAt(yp, B) - grad) / nopt.jacobianStep;
      }
      haveJ = true;
    }
    Eigen::VectorXd delta = J.colPivHouseholderQr().solve(-grad);
    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half < 10; ++half) {
      Eigen::VectorXd yt = sphereRetract(y, B * (lambda * delta));
      capClamp(yt);
      const Eigen::MatrixXd Bt = sphereTangentBasisAt(yt);
      Eigen::VectorXd gt = gradAt(yt, Bt);
      if (gt.norm() < gn) {
        if (half > 0) ++stalls;
        y = yt;
        B = Bt;
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
        throw std::runtime_error("innerSolveY: Newton stalled at |grad_y E| = " +
                                 std::to_string(gn));
    }
  }
  // polish to a machine-level stationary point of the discrete functional
  for (int p = 0; p < 2 && haveJ; ++p) {
    Eigen::VectorXd delta = J.colPivHouseholderQr().solve(-grad);
    Eigen::VectorXd yt = sphereRetract(y, B * delta);
    capClamp(yt);
    const Eigen::MatrixXd Bt = sphereTangentBasisAt(yt);
    Eigen::VectorXd gt = gradAt(yt, Bt);
    if (gt.norm() >= gn) break;
    y = yt;
    B = Bt;
    grad = gt;
    gn = gt.norm();
  }
  return SphereInnerResult{y, iters, gn};
}

// ---------------------------------------------------------------------------
// Outer search

namespace {

class SphereReducedProblem : public ReducedProblem {
 public:
  SphereReducedProblem(const SphereMetric& g, const SphereSearchInput& in)
      : g_(g), in_(in), m_(stiefelDim(g.ambientDim(), 3)) {}

  int tangentDim() const override { return m_; }

  double value(const FramePoint& base, const std::vector<StiefelTangent>& basis,
               const Eigen::VectorXd& theta) override {
    const FramePoint f = chartPoint(base, basis, theta);
    const Eigen::VectorXd y = solveInner(f);
    return Eg(g_, ThetaParam{f, y}, in_.shoot, &hints_);
  }

  Eigen::VectorXd gradient(const FramePoint& base, const std::vector<StiefelTangent>& basis,
                           const Eigen::VectorXd& theta) override {
    const FramePoint f = chartPoint(base, basis, theta);
    const Eigen::VectorXd y = solveInner(f);
    Eigen::VectorXd grad(m_);
    const double h = in_.search.fdStep;
    for (int i = 0; i < m_; ++i) {
      Eigen::VectorXd tp = theta + h * Eigen::VectorXd::Unit(m_, i);
      Eigen::VectorXd tm = theta - h * Eigen::VectorXd::Unit(m_, i);
      const double fp = Eg(g_, ThetaParam{chartPoint(base, basis, tp), y}, in_.shoot, &hints_);
      const double fm = Eg(g_, ThetaParam{chartPoint(base, basis, tm), y}, in_.shoot, &hints_);
      grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
  }

  int innerIterations() const override { return lastInnerIters_; }
  const Eigen::VectorXd& lastJunctionY() const { return warmY_; }

  void resetWarmStart() {
    warmY_.resize(0);
    innerJacobian_.resize(0, 0);
    solvedFrame_.resize(0, 0);
    hints_ = ThetaHints{};
  }

 private:
  Eigen::VectorXd solveInner(const FramePoint& f) {
    if (solvedFrame_.size() == f.V.size() && solvedFrame_ == f.V) return warmY_;
    SphereInnerResult r = innerSolveY(g_, f, in_.inner, in_.shoot,
                                      warmY_.size() ? &warmY_ : nullptr, &innerJacobian_,
                                      &hints_);
    warmY_ = r.y;
    solvedFrame_ = f.V;
    lastInnerIters_ = r.iterations;
    return r.y;
  }

  const SphereMetric& g_;
  const SphereSearchInput& in_;
  int m_;
  Eigen::VectorXd warmY_;
  Eigen::MatrixXd solvedFrame_;
  Eigen::MatrixXd innerJacobian_;
  ThetaHints hints_;
  int lastInnerIters_ = 0;
};

}  // namespace

SphereSearchResult searchCriticalSphere(const SphereMetric& g, const SphereSearchInput& in) {
  const int n = g.ambientDim();
  SphereSearchResult out;
  std::vector<SolveReport> converged;
  SphereReducedProblem prob(g, in);

  for (int s = 0; s < in.search.count; ++s) {
    const std::uint64_t seed = in.search.seed + static_cast<std::uint64_t>(s);
    out.summary.started += 1;
    FramePoint start = randomPoint(n, 3, seed);
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
      Eigen::MatrixXd innerJ;
      ThetaHints hints;
      SphereInnerResult inner =
          innerSolveY(g, loc.frame, in.inner, in.shoot, nullptr, &innerJ, &hints);
      rep.innerIterations = inner.iterations;
      ThetaParam param{loc.frame, inner.y};
      ThetaNetwork net = buildTheta(g, param, in.shoot, &hints);
      rep.value = net.totalLength;
      for (int j = 0; j < 3; ++j) rep.edgeLengths[j] = net.lengths[j];
      rep.curvatureCoords = net.curvatureCoords;
      rep.junction = net.junctionX;
      rep.junctionY = inner.y;
      rep.verification = verifyTheta(g, net, in.verifyTol);
      rep.canonicalFrame = s3Canonicalize(loc.frame, g.at(net.junctionX)).V;
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
  out.solutions = clusterReports(std::move(converged), stiefelDim(n, 3), in.search);
  out.summary.classes = static_cast<int>(out.solutions.size());
  return out;
}

VerificationReport verifyTheta(const SphereMetric& g, const ThetaNetwork& net, double tol) {
  VerificationReport rep;
  rep.tol = tol;

  double kmax = 0.0;
  for (const auto& edge : net.edges) {
    const int samples = 48;
    for (int i = 0; i <= samples; ++i) {
      const double s = edge.length * i / samples;
      kmax = std::max(kmax, g.norm(edge.position(s), edge.curvature(s)));
    }
  }
  rep.geodesicResidual = kmax;

  Eigen::VectorXd sumX = Eigen::VectorXd::Zero(net.junctionX.size());
  Eigen::VectorXd sumY = Eigen::VectorXd::Zero(net.junctionY.size());
  for (const auto& edge : net.edges) {
    sumX -= edge.tau.front();  // exterior tangents at the start junction
    sumY += edge.tau.back();
  }
  rep.balanceResidual =
      std::max(g.norm(net.junctionX, sumX), g.norm(net.junctionY, sumY));

  double ang = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const auto angleAt = [&](const Eigen::VectorXd& pt, const Eigen::VectorXd& ta,
                               const Eigen::VectorXd& tb) {
        const double c = g.inner(pt, ta, tb) / (g.norm(pt, ta) * g.norm(pt, tb));
        return std::abs(std::acos(std::clamp(c, -1.0, 1.0)) - kTwoPiThirds);
      };
      ang = std::max(ang, angleAt(net.junctionX, net.edges[a].tau.front(),
                                  net.edges[b].tau.front()));
      ang = std::max(ang,
                     angleAt(net.junctionY, net.edges[a].tau.back(), net.edges[b].tau.back()));
    }
  rep.angleResidual = ang;

  rep.orthogonalityResidual = 0.0;  // no boundary on the sphere
  rep.pass = rep.maxResidual() <= tol;
  return rep;
}

}  // namespace geonet
