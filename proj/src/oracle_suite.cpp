#include "geonet/oracle_suite.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "geonet/ball_reduction.hpp"
#include "geonet/search.hpp"
#include "geonet/sphere_reduction.hpp"
#include "geonet/stiefel.hpp"

namespace geonet {

namespace {

double closedFormHitTime(const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
  const double xw = x.dot(w);
  const Eigen::VectorXd proj = x - xw * w;
  return -xw + std::sqrt(1.0 - proj.squaredNorm());
}

Eigen::VectorXd randomUnit(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = gauss(rng);
  return v / v.norm();
}

Eigen::VectorXd randomBallPoint(std::mt19937_64& rng, int d, double radius) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::VectorXd v = randomUnit(rng, d);
  return radius * std::pow(uni(rng), 1.0 / d) * v;
}

OracleResult maxDeviation(const std::string& name, double worst, double tol,
                          const std::string& detail) {
  return OracleResult{name, worst <= tol, worst, tol, detail};
}

OracleResult minMargin(const std::string& name, double margin, double bound,
                       const std::string& detail) {
  return OracleResult{name, margin >= bound, margin, bound, detail};
}

}  // namespace

std::vector<OracleResult> runBallOracles(int d, const ShootOptions& opt, std::uint64_t seed) {
  std::vector<OracleResult> out;
  const BallMetric flat = BallMetric::standard(d);
  std::mt19937_64 rng(seed);

  {  // boundary-hit time against the closed form, and the margin bound
    double worst = 0.0;
    double minMarg = 1e300;
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd x = randomBallPoint(rng, d, 0.5);
      const Eigen::VectorXd w = randomUnit(rng, d);
      const BoundaryHit hit = hitBoundary(flat, x, w, opt);
      worst = std::max(worst, std::abs(hit.hitTime - closedFormHitTime(x, w)));
      minMarg = std::min(minMarg, hit.margin);
    }
    out.push_back(maxDeviation("ball.hit_time_closed_form", worst, 1e-10,
                               "|L - L0| over 100 random (x, w), |x| <= 1/2"));
    out.push_back(minMargin("ball.hit_margin_bound", minMarg, std::sqrt(3.0) / 2.0 - 1e-12,
                            "transversality margin >= sqrt(3)/2 at the flat metric"));
  }

  {  // reduced functional against its explicit formula
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd x = randomBallPoint(rng, d, 0.5);
      const FramePoint e = randomPoint(d, 2, seed + 1000 + i);
      const double viaShooting = Fg(flat, TriodParam{x, e}, opt);
      worst = std::max(worst, std::abs(viaShooting - F0(x, e)));
    }
    const FramePoint e0 = randomPoint(d, 2, seed + 7);
    worst = std::max(worst, std::abs(F0(Eigen::VectorXd::Zero(d), e0) - 3.0));
    const Eigen::MatrixXd u = directionsFlat(e0);
    for (int j = 0; j < 3; ++j)
      for (double sgn : {-1.0, 1.0})
        worst = std::max(worst, std::abs(F0(sgn * u.col(j), e0) - 2.0));
    out.push_back(maxDeviation("ball.F0_pipeline_identity", worst, 1e-9,
                               "shooting total length vs closed form; interior max 3; "
                               "boundary max 2 at x = +-u_j"));
  }

  {  // finite-difference Hessian at the origin against -sum |P_j v|^2
    const FramePoint e = randomPoint(d, 2, seed + 11);
    const double h = 1e-3;
    double worst = 0.0;
    auto hessAlong = [&](const Eigen::VectorXd& v) {
      const double fp = Fg(flat, TriodParam{h * v, e}, opt);
      const double f0 = Fg(flat, TriodParam{Eigen::VectorXd::Zero(d), e}, opt);
      const double fm = Fg(flat, TriodParam{-h * v, e}, opt);
      return (fp - 2.0 * f0 + fm) / (h * h);
    };
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd v = randomUnit(rng, d);
      worst = std::max(worst, std::abs(hessAlong(v) - F0HessianOrigin(e, v)));
    }
    worst = std::max(worst, std::abs(hessAlong(e.col(0)) - (-1.5)));
    out.push_back(maxDeviation("ball.hessian_origin", worst, 1e-4,
                               "d^2/ds^2 F(sv) at 0 vs -sum_j |P_j v|^2; value -3/2 on v = e1"));
  }

  {  // endpoint-map invertibility margin (the finite-dimensional kernel check)
    double minSigma = 1e300;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd x = randomBallPoint(rng, d, 0.45);
      const FramePoint e = randomPoint(d, 2, seed + 2000 + trial);
      const std::vector<StiefelTangent> basis = tangentBasis(e);
      const int mFrame = static_cast<int>(basis.size());
      const int mTotal = d + mFrame;
      const double h = 1e-5;
      // boundary-tangent bases at the three endpoints of the base triod
      Triod base = buildTriod(flat, TriodParam{x, e}, opt);
      std::vector<Eigen::MatrixXd> bTan;
      for (int j = 0; j < 3; ++j) {
        Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(base.edges[j].gamma.back());
        bTan.push_back(qr.matrixQ().rightCols(d - 1));
      }
      auto endpoints = [&](const Eigen::VectorXd& xq, const FramePoint& eq) {
        Eigen::MatrixXd Q(d, 3);
        const BalancedDirections dirs = psiG(flat, xq, eq);
        for (int j = 0; j < 3; ++j) {
          const BoundaryHit hit = hitBoundary(flat, xq, dirs.u.col(j), opt);
          Q.col(j) = hit.point;
        }
        return Q;
      };
      Eigen::MatrixXd M(3 * (d - 1), mTotal);
      for (int i = 0; i < mTotal; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        FramePoint ep = e, em = e;
        if (i < d) {
          xp[i] += h;
          xm[i] -= h;
        } else {
          ep = retract(e, basis[i - d], h);
          em = retract(e, basis[i - d], -h);
        }
        const Eigen::MatrixXd dQ = (endpoints(xp, ep) - endpoints(xm, em)) / (2.0 * h);
        for (int j = 0; j < 3; ++j)
          M.block(j * (d - 1), i, d - 1, 1) = bTan[j].transpose() * dQ.col(j);
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
      minSigma = std::min(minSigma, svd.singularValues().minCoeff());
    }
    out.push_back(minMargin("ball.endpoint_map_invertibility", minSigma, 0.1,
                            "sigma_min of xi -> (dq_j . xi) over 20 random (x, e)"));
  }

  return out;
}

std::vector<OracleResult> runSphereOracles(int d, const ShootOptions& opt, std::uint64_t seed) {
  std::vector<OracleResult> out;
  const SphereMetric round = SphereMetric::round(d);
  const int n = d + 1;
  std::mt19937_64 rng(seed);

  {  // great-circle geodesics and the antipodal two-point solve
    double worstShoot = 0.0, worstK = 0.0, worstL = 0.0;
    for (int i = 0; i < 10; ++i) {
      const FramePoint f = randomPoint(n, 2, seed + 3000 + i);
      const Eigen::VectorXd x = f.col(0), v = f.col(1);
      Trajectory tr = shootConstantCurvature(round, x, v, Eigen::VectorXd::Zero(n), M_PI, opt);
      worstShoot = std::max(worstShoot, (tr.position(M_PI) + x).norm());
      TwoPointResult r = solveTwoPoint(round, x, v, (-x).eval(), opt);
      worstK = std::max(worstK, r.curvature.norm());
      worstL = std::max(worstL, std::abs(r.length - M_PI));
    }
    out.push_back(maxDeviation("sphere.great_circle_antipode", worstShoot, 1e-9,
                               "|gamma(pi) + x| for zero-curvature shots"));
    out.push_back(maxDeviation("sphere.two_point_antipodal",
                               std::max(worstK, worstL), 1e-9,
                               "|k| and |L - pi| of the antipodal two-point solve"));
  }

  {  // shooting differential against 2 xi - 3 <xi, v> v
    const FramePoint f = randomPoint(n, 2, seed + 17);
    const Eigen::VectorXd x = f.col(0), v = f.col(1);
    Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(x);
    const Eigen::MatrixXd tanBasis = qr.matrixQ().rightCols(d);
    const double h = 1e-4;
    double worst = 0.0;
    auto endpoint = [&](double len, const Eigen::VectorXd& k0) {
      return constantCurvatureEndpoint(round, x, v, k0, len, opt).head(n).eval();
    };
    for (int i = 0; i < 20; ++i) {
      Eigen::VectorXd xi = tanBasis * randomUnit(rng, d);
      const double s = xi.dot(v);
      const Eigen::VectorXd kdir = xi - s * v;
      const Eigen::VectorXd diff =
          (endpoint(M_PI + h * s, h * kdir) - endpoint(M_PI - h * s, -h * kdir)) / (2.0 * h);
      const Eigen::VectorXd closed = 2.0 * xi - 3.0 * s * v;
      worst = std::max(worst, (diff - closed).cwiseAbs().maxCoeff());
    }
    out.push_back(maxDeviation("sphere.shooting_differential", worst, 1e-5,
                               "finite-difference d gamma(pi; 0) vs 2 xi - 3 <xi, v> v"));
  }

  {  // E0 value, Hessian oracle and nullity at (x, e; -x)
    const FramePoint f = randomPoint(n, 3, seed + 23);
    const Eigen::VectorXd x = f.col(0);
    const Eigen::VectorXd anti = -x;
    ThetaHints hints;
    const double e0 = Eg(round, ThetaParam{f, anti}, opt, &hints);
    const double valErr = std::abs(e0 - 3.0 * M_PI);

    const std::vector<StiefelTangent> basis = tangentBasis(f);
    const int mF = static_cast<int>(basis.size());
    Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(anti);
    const Eigen::MatrixXd yBasis = qr.matrixQ().rightCols(d);
    const int mTotal = mF + d;
    const double h = 5e-3;

    auto evalAt = [&](const Eigen::VectorXd& c) {
      StiefelTangent z;
      z.Z = Eigen::MatrixXd::Zero(n, 3);
      for (int i = 0; i < mF; ++i) z.Z += c[i] * basis[i].Z;
      FramePoint fp = retract(f, z, 1.0);
      Eigen::VectorXd y = anti + yBasis * c.tail(d);
      y /= y.norm();
      return Eg(round, ThetaParam{fp, y}, opt, &hints);
    };

    // full finite-difference Hessian over T(V_3 x S^d), central differences
    Eigen::MatrixXd H(mTotal, mTotal);
    const double base = e0;
    for (int i = 0; i < mTotal; ++i) {
      const double fp = evalAt(h * Eigen::VectorXd::Unit(mTotal, i));
      const double fm = evalAt(-h * Eigen::VectorXd::Unit(mTotal, i));
      H(i, i) = (fp - 2.0 * base + fm) / (h * h);
    }
    for (int i = 0; i < mTotal; ++i)
      for (int j = i + 1; j < mTotal; ++j) {
        auto at = [&](double si, double sj) {
          Eigen::VectorXd c = Eigen::VectorXd::Zero(mTotal);
          c[i] = si * h;
          c[j] = sj * h;
          return evalAt(c);
        };
        H(i, j) = H(j, i) =
            (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
      }

    // compare against the closed form on 20 random (xi, w)
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worstHess = 0.0;
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd c(mTotal);
      for (int i = 0; i < mTotal; ++i) c[i] = gauss(rng);
      c /= c.norm();
      StiefelTangent xi;
      xi.Z = Eigen::MatrixXd::Zero(n, 3);
      for (int i = 0; i < mF; ++i) xi.Z += c[i] * basis[i].Z;
      const Eigen::VectorXd w = yBasis * c.tail(d);
      const double fdVal = c.dot(H * c);
      worstHess = std::max(worstHess, std::abs(fdVal - hessianE0(f, xi, w)));
    }
    out.push_back(maxDeviation("sphere.E0_value", valErr, 1e-8, "E0(x, e; -x) = 3 pi"));
    out.push_back(maxDeviation("sphere.E0_hessian_oracle", worstHess, 1e-3,
                               "finite-difference d^2 E0 vs -(pi/4) sum |(v+w)^perp_j|^2"));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    int nullity = 0;
    for (int i = 0; i < mTotal; ++i)
      if (std::abs(es.eigenvalues()[i]) <= 1e-6) ++nullity;
    out.push_back(OracleResult{"sphere.E0_nullity", nullity == mF,
                               static_cast<double>(nullity), static_cast<double>(mF),
                               "Hessian nullity equals dim V_3(R^{d+1})"});
  }

  {  // Phi vectors against the closed form, and the assembled-map margin
    double worstPhi = 0.0;
    double minSigma = 1e300;
    for (int trial = 0; trial < 20; ++trial) {
      const FramePoint f = randomPoint(n, 3, seed + 4000 + trial);
      const Eigen::VectorXd x = f.col(0);
      ThetaParam param{f, (-x).eval()};
      PhiWorkspace ws = makePhiWorkspace(round, param, opt);
      const std::vector<StiefelTangent> basis = tangentBasis(f);
      const Eigen::MatrixXd u = ws.net.directions;
      Eigen::MatrixXd M(3 * (d - 1), static_cast<int>(basis.size()));
      for (size_t b = 0; b < basis.size(); ++b) {
        const PhiVectors pv = phiVectors(round, param, ws, basis[b], 1e-4, opt);
        for (int j = 0; j < 3; ++j)
          M.block(j * (d - 1), static_cast<int>(b), d - 1, 1) = pv.coeffs.col(j);
        if (trial < 5) {
          // closed form: pi Phi_j = 2(eta_j + <v,u_j> x) + (pi/2)(v - <v,u_j>u_j)
          const Eigen::VectorXd v = basis[b].Z.col(0);
          const Eigen::VectorXd xe1 = basis[b].Z.col(1), xe2 = basis[b].Z.col(2);
          for (int j = 0; j < 3; ++j) {
            Eigen::VectorXd eta;
            if (j == 0)
              eta = xe1;
            else if (j == 1)
              eta = -0.5 * xe1 + 0.86602540378443864676 * xe2;
            else
              eta = -0.5 * xe1 - 0.86602540378443864676 * xe2;
            const double vu = v.dot(u.col(j));
            const Eigen::VectorXd closed =
                (2.0 * (eta + vu * x) + 0.5 * M_PI * (v - vu * u.col(j))) / M_PI;
            worstPhi = std::max(worstPhi, (pv.Phi[j] - closed).cwiseAbs().maxCoeff());
          }
        }
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
      minSigma = std::min(minSigma, svd.singularValues().minCoeff());
    }
    out.push_back(maxDeviation("sphere.phi_closed_form", worstPhi, 1e-5,
                               "finite-difference Phi_j vs the antipodal closed form"));
    out.push_back(minMargin("sphere.phi_map_invertibility", minSigma, 0.1,
                            "sigma_min of xi -> Phi over 20 random frames"));
  }

  return out;
}

}  // namespace geonet
