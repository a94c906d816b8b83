#include "geonet/shooting.hpp"

#include <cmath>
#include <sstream>

namespace geonet {

namespace {
long long gIntegrations = 0;
}  // namespace

long long integrationCount() { return gIntegrations; }

namespace {

// State layouts: ball [gamma | v], sphere [gamma | tau | k].

struct BallRhs {
  const BallMetric* g;
  Eigen::VectorXd gp;  // scratch
  void operator()(double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const int d = g->dim();
    dy.resize(2 * d);
    const auto pos = y.head(d);
    const auto vel = y.segment(d, d);
    dy.head(d) = vel;
    if (g->isFlat()) {
      dy.tail(d).setZero();
    } else if (g->kind() == MetricKind::Conformal) {
      if (gp.size() != d) gp.resize(d);
      g->gradPhiInto(pos, gp);
      dy.tail(d) = vel.squaredNorm() * gp - 2.0 * gp.dot(vel) * vel;
    } else {
      dy.tail(d) = g->geodesicAcceleration(pos, vel);
    }
  }
};

struct SphereRhs {
  const SphereMetric* g;
  double scale = 1.0;  // rescaled-time factor (ds/dsigma)
  Eigen::VectorXd ubuf, gp;  // scratch
  void operator()(double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const int n = g->ambientDim();
    const auto gamma = y.head(n);
    const auto tau = y.segment(n, n);
    const auto k = y.segment(2 * n, n);
    dy.resize(3 * n);
    const double tau2 = tau.squaredNorm();
    const double tk = tau.dot(k);
    if (g->isRound()) {
      dy.head(n) = tau;
      dy.segment(n, n) = k - tau2 * gamma;
      dy.segment(2 * n, n) = -k.squaredNorm() * tau - tk * gamma;
    } else {
      if (gp.size() != n) {
        gp.resize(n);
        ubuf.resize(n);
      }
      double phi;
      g->conformalData(gamma, ubuf, gp, phi);
      const double dphiTau = gp.dot(tau);
      const double dphiK = gp.dot(k);
      const double kg2 = std::exp(2.0 * phi) * k.squaredNorm();  // |k|_g^2
      dy.head(n) = tau;
      dy.segment(n, n) = k - 2.0 * dphiTau * tau + tau2 * gp - tau2 * gamma;
      dy.segment(2 * n, n) = -kg2 * tau - dphiTau * k - dphiK * tau + tk * gp - tk * gamma;
    }
    if (scale != 1.0) dy *= scale;
  }
};

void renormalizeSphereState(Eigen::VectorXd& y, int n) {
  y.head(n) /= y.head(n).norm();
}

std::string ptStr(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

Trajectory trajectoryFromDense(const DenseOutput& dense, int ambientDim, bool sphereRun,
                               double length) {
  Trajectory tr;
  tr.ambientDim = ambientDim;
  tr.sphereRun = sphereRun;
  tr.length = length;
  tr.dense = dense;
  tr.s.reserve(dense.steps.size() + 1);
  auto pushNode = [&](double t, const Eigen::VectorXd& y) {
    tr.s.push_back(t);
    tr.gamma.push_back(y.head(ambientDim));
    tr.tau.push_back(y.segment(ambientDim, ambientDim));
    if (sphereRun) tr.curv.push_back(y.tail(ambientDim));
  };
  pushNode(dense.steps.front().t0, dense.steps.front().r1);
  for (const auto& st : dense.steps) pushNode(st.t0 + st.h, st.r1 + st.r2);
  return tr;
}

}  // namespace

Eigen::VectorXd Trajectory::position(double arc) const { return dense.eval(arc).head(ambientDim); }
Eigen::VectorXd Trajectory::tangent(double arc) const {
  return dense.eval(arc).segment(ambientDim, ambientDim);
}
Eigen::VectorXd Trajectory::curvature(double arc) const {
  if (!sphereRun) throw ShootingError("Trajectory: curvature is only stored on sphere runs");
  return dense.eval(arc).tail(ambientDim);
}
Eigen::VectorXd Trajectory::tangentDerivative(double arc) const {
  return dense.evalDeriv(arc).segment(ambientDim, ambientDim);
}

// ---------------------------------------------------------------------------
// Ball geodesics

Trajectory shootGeodesic(const BallMetric& g, const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                         double horizon, const ShootOptions& opt) {
  g.requireInDomain(x);
  const int d = g.dim();
  const double wg = g.norm(x, w);
  if (!(wg > 0)) throw ShootingError("shootGeodesic: zero initial direction");
  Eigen::VectorXd y0(2 * d);
  y0.head(d) = x;
  y0.segment(d, d) = w / wg;

  DriverHooks hooks;
  const double safety2 = opt.safetyRadius * opt.safetyRadius;
  hooks.stopAfterStep = [&](double, const Eigen::VectorXd& y) {
    if (y.head(d).squaredNorm() >= safety2)
      throw ShootingError("shootGeodesic: trajectory escaped the safety ball of radius 2 from x = " +
                          ptStr(x));
    return false;
  };
  BallRhs rhs{&g};
  DenseOutput dense = integrateAdaptive(rhs, 0.0, std::move(y0), horizon, opt.ode, hooks);
  return trajectoryFromDense(dense, d, false, horizon);
}

namespace {

// S(y) = (|gamma|^2 - 1)/2 on a ball state.
double surfaceValue(const Eigen::VectorXd& y, int d) {
  return 0.5 * (y.head(d).squaredNorm() - 1.0);
}
double surfaceSlope(const Eigen::VectorXd& y, int d) {
  return y.head(d).dot(y.segment(d, d));
}

}  // namespace

BoundaryHit hitBoundary(const BallMetric& g, const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                        const ShootOptions& opt) {
  g.requireInDomain(x);
  if (x.norm() > 0.5 + 1e-12)
    throw ShootingError("hitBoundary: start point " + ptStr(x) + " violates |x| <= 1/2");
  const int d = g.dim();
  const double wg = g.norm(x, w);
  if (!(wg > 0)) throw ShootingError("hitBoundary: zero initial direction");

  BallRhs rhs{&g};
  dopri5::Work work;
  const double h = opt.fixedStep;
  Eigen::VectorXd y(2 * d), y1, k1(2 * d), k7, err;
  y.head(d) = x;
  y.segment(d, d) = w / wg;
  rhs(0.0, y, k1);

  // march on the fixed grid until S >= 0
  double t = 0.0;
  double sPrev = surfaceValue(y, d);
  Eigen::VectorXd yPrev = y;
  bool bracketed = false;
  while (t < opt.hitHorizon) {
    dopri5::step(rhs, t, y, h, k1, y1, k7, err, work, nullptr);
    t += h;
    yPrev = y;
    sPrev = surfaceValue(y, d);
    y = y1;
    k1 = k7;
    if (surfaceValue(y, d) >= 0.0) {
      bracketed = true;
      break;
    }
  }
  if (!bracketed)
    throw ShootingError("hitBoundary: no boundary crossing before arclength " +
                        std::to_string(opt.hitHorizon) + " from x = " + ptStr(x));

  // Newton polish on the one-step flow anchored at the bracket's left node.
  // At full step the flow equals the marching map, so the located time is a
  // continuous function of the data across grid cells.
  const double tLeft = t - h;
  double dt = h;        // current offset guess within [0, h]
  {
    // initialize from the secant through the bracket
    const double sRight = surfaceValue(y, d);
    if (sRight > sPrev) dt = h * (0.0 - sPrev) / (sRight - sPrev);
    dt = std::clamp(dt, 0.0, h);
  }
  Eigen::VectorXd kLeft(2 * d);
  rhs(tLeft, yPrev, kLeft);
  auto flowEval = [&](double offset, Eigen::VectorXd& out) {
    if (offset <= 0.0)
      out = yPrev;
    else
      dopri5::step(rhs, tLeft, yPrev, offset, kLeft, out, k7, err, work, nullptr);
  };
  Eigen::VectorXd yHit = y;
  for (int it = 0; it < 60; ++it) {
    flowEval(dt, yHit);
    const double sv = surfaceValue(yHit, d);
    const double sp = surfaceSlope(yHit, d);
    if (!(sp > 0))
      throw ShootingError("hitBoundary: non-transversal polish at x = " + ptStr(x));
    const double delta = sv / sp;
    dt = std::clamp(dt - delta, 0.0, h);
    if (std::abs(delta) < 1e-15) break;
  }
  flowEval(dt, yHit);
  if (std::abs(surfaceValue(yHit, d)) > 1e-12)
    throw ShootingError("hitBoundary: polish failed to reach |S| <= 1e-12 from x = " + ptStr(x));

  BoundaryHit hit;
  hit.hitTime = tLeft + dt;
  hit.point = yHit.head(d);
  hit.tangent = yHit.segment(d, d);
  hit.margin = surfaceSlope(yHit, d);
  if (hit.margin < opt.transversalityMin)
    throw ShootingError("hitBoundary: transversality margin " + std::to_string(hit.margin) +
                        " below " + std::to_string(opt.transversalityMin) + " at q = " +
                        ptStr(hit.point));
  return hit;
}

// ---------------------------------------------------------------------------
// Sphere constant-curvature shooting

Trajectory shootConstantCurvature(const SphereMetric& g, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& v, const Eigen::VectorXd& k0,
                                  double horizon, const ShootOptions& opt) {
  g.requireInDomain(x);
  const int n = g.ambientDim();
  const double vg = g.norm(x, v);
  if (!(vg > 0)) throw ShootingError("shootConstantCurvature: zero initial tangent");
  Eigen::VectorXd tau0 = v / vg;
  if (std::abs(tau0.dot(x)) > 1e-10)
    throw ShootingError("shootConstantCurvature: initial tangent not tangent to the sphere at " +
                        ptStr(x));
  if (k0.size() != n) throw ShootingError("shootConstantCurvature: curvature dimension mismatch");
  if (k0.norm() > 0 && std::abs(g.inner(x, k0, tau0)) > 1e-8 * g.norm(x, k0))
    throw ShootingError("shootConstantCurvature: initial curvature not g-orthogonal to the tangent");

  Eigen::VectorXd y0(3 * n);
  y0.head(n) = x / x.norm();
  y0.segment(n, n) = tau0;
  y0.tail(n) = k0;

  SphereRhs rhs{&g};
  DriverHooks hooks;
  hooks.project = [n](Eigen::VectorXd& y) { renormalizeSphereState(y, n); };
  DenseOutput dense = integrateAdaptive(rhs, 0.0, std::move(y0), horizon, opt.ode, hooks);
  Trajectory tr = trajectoryFromDense(dense, n, true, horizon);

  // invariant drift guard (10x the documented node tolerances)
  const double kg0 = g.norm(tr.gamma.front(), tr.curv.front());
  for (size_t i = 0; i < tr.s.size(); ++i) {
    if (std::abs(tr.gamma[i].norm() - 1.0) > 1e-8)
      throw ShootingError("shootConstantCurvature: sphere constraint drift beyond tolerance");
    if (std::abs(g.norm(tr.gamma[i], tr.tau[i]) - 1.0) > 1e-7)
      throw ShootingError("shootConstantCurvature: unit-speed drift beyond tolerance");
    if (std::abs(g.norm(tr.gamma[i], tr.curv[i]) - kg0) > 1e-6 * (1.0 + kg0))
      throw ShootingError("shootConstantCurvature: |k|_g drift beyond tolerance");
  }
  return tr;
}

Eigen::VectorXd constantCurvatureEndpoint(const SphereMetric& g, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& v, const Eigen::VectorXd& k0,
                                          double len, const ShootOptions& opt) {
  const int n = g.ambientDim();
  Eigen::VectorXd y0(3 * n);
  y0.head(n) = x / x.norm();
  y0.segment(n, n) = v / g.norm(x, v);
  y0.tail(n) = k0;
  SphereRhs rhs{&g, len};  // integrate over sigma in [0,1] with ds = len * dsigma
  DriverHooks hooks;
  hooks.project = [n](Eigen::VectorXd& y) { renormalizeSphereState(y, n); };
  Eigen::VectorXd yEnd = integrateFixed(rhs, 0.0, std::move(y0), 1.0, opt.bvpNodes, hooks);
  return yEnd;
}

// ---------------------------------------------------------------------------
// Two-point constant-curvature solver

TwoPointResult solveTwoPoint(const SphereMetric& g, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& v, const Eigen::VectorXd& y,
                             const ShootOptions& opt, TwoPointHint* hint, bool wantTrajectory) {
  g.requireInDomain(x);
  g.requireInDomain(y);
  const int n = g.ambientDim();
  const int d = g.dim();
  if ((y + x).norm() > opt.epsBall + 1e-12)
    throw ShootingError("solveTwoPoint: target " + ptStr(y) + " outside the |y + x| <= " +
                        std::to_string(opt.epsBall) + " neighborhood of the antipode");
  const double vg = g.norm(x, v);
  if (!(vg > 0)) throw ShootingError("solveTwoPoint: zero initial tangent");
  const Eigen::VectorXd tau0 = v / vg;

  // Euclidean-orthonormal basis of {x, v}^perp; conformal metrics share
  // orthogonality with the round one, so k0 = B * alpha is g-orthogonal to v.
  Eigen::MatrixXd span(n, 2);
  span.col(0) = x / x.norm();
  span.col(1) = tau0;
  Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(span);
  Eigen::MatrixXd B = qr.matrixQ().rightCols(n - 2);  // n x (d-1)

  const int m = d;  // unknowns: alpha in R^{d-1} and L
  Eigen::VectorXd u(m);
  u.setZero();
  u[m - 1] = M_PI;
  if (hint && hint->valid && hint->length >= opt.branchLo && hint->length <= opt.branchHi) {
    u.head(m - 1) = B.transpose() * hint->curvature;
    u[m - 1] = hint->length;
  }

  auto residual = [&](const Eigen::VectorXd& unknowns) -> Eigen::VectorXd {
    ++gIntegrations;
    const Eigen::VectorXd k0 = B * unknowns.head(m - 1);
    const double L = unknowns[m - 1];
    Eigen::VectorXd yEnd = constantCurvatureEndpoint(g, x, tau0, k0, L, opt);
    return yEnd.head(n) - y;
  };
  auto fdJacobian = [&](const Eigen::VectorXd& at, const Eigen::VectorXd& rAt,
                        Eigen::MatrixXd& J) {
    J.resize(n, m);
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd up = at;
      up[j] += opt.bvpFdStep;
      J.col(j) = (residual(up) - rAt) / opt.bvpFdStep;
    }
  };
  auto inBranch = [&](double L) { return L >= opt.branchLo && L <= opt.branchHi; };

  Eigen::VectorXd r = residual(u);
  double rn = r.norm();
  Eigen::MatrixXd J;
  bool haveJ = false;
  if (hint && hint->valid && hint->jacobian.rows() == n && hint->jacobian.cols() == m) {
    J = hint->jacobian;
    haveJ = true;
  }

  int iters = 0;
  int stalls = 0;
  // Gauss--Newton phase: frozen Jacobian while it keeps making progress.
  while (rn > opt.bvpTol) {
    if (iters >= opt.bvpMaxIters)
      throw ShootingError("solveTwoPoint: no convergence after " + std::to_string(iters) +
                          " iterations, residual " + std::to_string(rn));
    if (!haveJ) {
      fdJacobian(u, r, J);
      haveJ = true;
    }
    Eigen::VectorXd step = J.colPivHouseholderQr().solve(-r);
    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half < 10; ++half) {
      Eigen::VectorXd ut = u + lambda * step;
      if (!inBranch(ut[m - 1])) {
        lambda *= 0.5;
        continue;
      }
      Eigen::VectorXd rt = residual(ut);
      if (rt.norm() < rn) {
        if (half > 0) ++stalls;  // damping engaged: Jacobian is getting stale
        u = ut;
        r = rt;
        rn = rt.norm();
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    ++iters;
    if (!accepted || stalls >= 2) {
      if (!accepted && !inBranch(u[m - 1] + step[m - 1]))
        throw ShootingError("solveTwoPoint: length left the branch window [pi/2, 3pi/2] at L = " +
                            std::to_string(u[m - 1] + step[m - 1]));
      haveJ = false;  // refresh and retry
      stalls = 0;
      if (!accepted && iters >= opt.bvpMaxIters)
        throw ShootingError("solveTwoPoint: damped step stalled at residual " +
                            std::to_string(rn));
    }
  }
  // Newton polish with the current Jacobian: drives the root to (near)
  // machine level so downstream finite differences see a smooth length.
  // One Jacobian refresh is allowed if a stale hint stops making progress.
  if (!haveJ) {
    fdJacobian(u, r, J);
    haveJ = true;
  }
  {
    int polishSteps = 0;
    bool refreshed = false;
    while (polishSteps < 3) {
      Eigen::VectorXd step = J.colPivHouseholderQr().solve(-r);
      Eigen::VectorXd ut = u + step;
      if (!inBranch(ut[m - 1])) break;
      Eigen::VectorXd rt = residual(ut);
      if (rt.norm() < rn) {
        u = ut;
        r = rt;
        rn = rt.norm();
        ++polishSteps;
        continue;
      }
      if (!refreshed && rn > 1e-12) {
        fdJacobian(u, r, J);
        refreshed = true;
        continue;
      }
      break;  // at the roundoff floor
    }
  }
  if (!inBranch(u[m - 1]))
    throw ShootingError("solveTwoPoint: length " + std::to_string(u[m - 1]) +
                        " left the branch window [pi/2, 3pi/2]");

  TwoPointResult res;
  res.curvature = B * u.head(m - 1);
  res.length = u[m - 1];
  res.iterations = iters;
  res.residual = rn;
  if (hint) {
    hint->curvature = res.curvature;
    hint->length = res.length;
    hint->jacobian = J;
    hint->valid = true;
  }

  if (wantTrajectory) {
    Eigen::VectorXd y0(3 * n);
    y0.head(n) = x / x.norm();
    y0.segment(n, n) = tau0;
    y0.tail(n) = res.curvature;
    SphereRhs rhs{&g, res.length};
    DriverHooks hooks;
    hooks.project = [n](Eigen::VectorXd& yv) { renormalizeSphereState(yv, n); };
    DenseOutput denseSigma;
    integrateFixed(rhs, 0.0, y0, 1.0, opt.bvpNodes, hooks, &denseSigma);
    // rescale sigma-parametrized dense data to arclength
    DenseOutput dense;
    dense.steps.reserve(denseSigma.steps.size());
    for (auto& st : denseSigma.steps) {
      DenseStep s2 = st;
      s2.t0 = st.t0 * res.length;
      s2.h = st.h * res.length;
      dense.steps.push_back(std::move(s2));
    }
    res.trajectory = trajectoryFromDense(dense, n, true, res.length);
  }
  return res;
}

}  // namespace geonet
