#include <doctest.h>

#include <random>

#include "geonet/shooting.hpp"
#include "geonet/stiefel.hpp"

using namespace geonet;

namespace {

Polynomial linearX1(int d) {
  PolyTerm t{1.0, std::vector<int>(d, 0)};
  t.powers[0] = 1;
  return Polynomial(d, {t});
}

double closedFormHitTime(const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
  const double xw = x.dot(w);
  return -xw + std::sqrt(1.0 - (x - xw * w).squaredNorm());
}

}  // namespace

TEST_CASE("flat geodesics are straight lines") {
  const BallMetric flat = BallMetric::standard(3);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd w(3);
  w << 1.0, 0.0, 0.0;
  const Trajectory tr = shootGeodesic(flat, x, 2.0 * w, 0.9);
  CHECK((tr.position(0.5) - 0.5 * w).cwiseAbs().maxCoeff() <= 1e-10);
  Eigen::VectorXd x2(3);
  x2 << 0.1, -0.2, 0.3;
  const Trajectory tr2 = shootGeodesic(flat, x2, w, 0.6);
  CHECK((tr2.position(0.4) - (x2 + 0.4 * w)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("conformal geodesics keep unit speed") {
  const BallMetric g = BallMetric::conformal(2, 0.01, linearX1(2));
  Eigen::VectorXd x(2), w(2);
  x << 0.1, 0.05;
  w << 0.6, 0.8;
  // horizon kept inside the radius-2 safety ball
  const Trajectory tr = shootGeodesic(g, x, w, 1.8);
  CHECK(tr.s.size() > 10);
  for (size_t i = 0; i < tr.s.size(); ++i)
    CHECK(std::abs(g.norm(tr.gamma[i], tr.tau[i]) - 1.0) <= 1e-8);
}

TEST_CASE("geodesics escaping the safety ball error out") {
  const BallMetric flat = BallMetric::standard(2);
  Eigen::VectorXd x(2), w(2);
  x << 0.4, 0.0;
  w << 1.0, 0.0;
  CHECK_THROWS_AS(shootGeodesic(flat, x, w, 3.0), ShootingError);
}

TEST_CASE("boundary hit matches the closed form on the flat ball") {
  const BallMetric flat = BallMetric::standard(2);
  Eigen::VectorXd x(2), w(2);
  x << 0.3, 0.0;
  w << 1.0, 0.0;
  const BoundaryHit hit = hitBoundary(flat, x, w);
  CHECK(std::abs(hit.hitTime - 0.7) <= 1e-12);
  CHECK(std::abs(hit.point.norm() - 1.0) <= 1e-10);

  // x = 0: unit hit time in the shot direction
  const BoundaryHit hit0 = hitBoundary(flat, Eigen::VectorXd::Zero(2), w);
  CHECK(std::abs(hit0.hitTime - 1.0) <= 1e-12);
  CHECK((hit0.point - w).cwiseAbs().maxCoeff() <= 1e-10);

  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> uni;
  double worst = 0.0, minMargin = 1e9;
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd xi(2), wi(2);
    for (int c = 0; c < 2; ++c) wi[c] = gauss(rng);
    wi.normalize();
    for (int c = 0; c < 2; ++c) xi[c] = gauss(rng);
    xi = 0.5 * std::sqrt(uni(rng)) * xi.normalized();
    const BoundaryHit h = hitBoundary(flat, xi, wi);
    worst = std::max(worst, std::abs(h.hitTime - closedFormHitTime(xi, wi)));
    minMargin = std::min(minMargin, h.margin);
  }
  CHECK(worst <= 1e-10);
  CHECK(minMargin >= std::sqrt(3.0) / 2.0 - 1e-12);
}

TEST_CASE("boundary hit errors") {
  const BallMetric flat = BallMetric::standard(2);
  Eigen::VectorXd far(2);
  far << 0.8, 0.0;
  CHECK_THROWS_AS(hitBoundary(flat, far, Eigen::Vector2d(1, 0)), ShootingError);
}

TEST_CASE("round-sphere great circles and small circles") {
  const SphereMetric round = SphereMetric::round(2);
  Eigen::VectorXd x(3), v(3);
  x << 1.0, 0.0, 0.0;
  v << 0.0, 1.0, 0.0;
  const Eigen::VectorXd k0 = Eigen::VectorXd::Zero(3);
  const Trajectory tr = shootConstantCurvature(round, x, v, k0, M_PI);
  CHECK((tr.position(M_PI) + x).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((tr.tangent(M_PI) + v).cwiseAbs().maxCoeff() <= 1e-9);

  // curvature magnitude is conserved
  Eigen::VectorXd k1(3);
  k1 << 0.0, 0.0, 0.7;
  const Trajectory tc = shootConstantCurvature(round, x, v, k1, 5.0);
  for (size_t i = 0; i < tc.s.size(); ++i)
    CHECK(std::abs(tc.curv[i].norm() - 0.7) <= 1e-9);

  // small circle of curvature kappa closes after 2 pi / sqrt(1 + kappa^2)
  // (end-node comparison: interior dense queries carry the 4th-order
  // interpolation error, node states the integration error)
  const double kappa = 0.7;
  const double period = 2.0 * M_PI / std::sqrt(1.0 + kappa * kappa);
  const Trajectory tp = shootConstantCurvature(round, x, v, k1, period);
  CHECK((tp.position(period) - x).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK((tp.tangent(period) - v).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("two-point solver at the antipode and its differential") {
  const SphereMetric round = SphereMetric::round(3);
  const FramePoint f = randomPoint(4, 2, 9);
  const Eigen::VectorXd x = f.col(0), v = f.col(1);
  const TwoPointResult r = solveTwoPoint(round, x, v, (-x).eval());
  CHECK(r.curvature.norm() <= 1e-9);
  CHECK(std::abs(r.length - M_PI) <= 1e-9);
  CHECK((r.trajectory.position(r.length) + x).cwiseAbs().maxCoeff() <= 1e-8);

  // differential of the endpoint map at (pi; 0): 2 xi - 3 <xi, v> v
  ShootOptions opt;
  auto endpoint = [&](double len, const Eigen::VectorXd& k0) {
    return constantCurvatureEndpoint(round, x, v, k0, len, opt).head(4).eval();
  };
  const double h = 1e-4;
  // xi = v: differential gives -v
  Eigen::VectorXd d1 = (endpoint(M_PI + h, Eigen::VectorXd::Zero(4)) -
                        endpoint(M_PI - h, Eigen::VectorXd::Zero(4))) /
                       (2 * h);
  CHECK((d1 + v).cwiseAbs().maxCoeff() <= 1e-5);
  // xi perpendicular to v and x: differential gives 2 xi
  Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(
      (Eigen::MatrixXd(4, 2) << x, v).finished());
  const Eigen::VectorXd perp = qr.matrixQ().col(2);
  Eigen::VectorXd d2 = (endpoint(M_PI, h * perp) - endpoint(M_PI, -h * perp)) / (2 * h);
  CHECK((d2 - 2.0 * perp).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("two-point solver off the antipode under a perturbed metric") {
  PolyTerm t{1.0, {1, 0, 0, 0}};
  const SphereMetric g = SphereMetric::conformal(3, 0.01, Polynomial(4, {t}));
  const FramePoint f = randomPoint(4, 2, 13);
  const Eigen::VectorXd x = f.col(0), v = f.col(1);
  Eigen::VectorXd y = -x + 0.1 * v;
  y.normalize();
  const TwoPointResult r = solveTwoPoint(g, x, v, y);
  CHECK(r.residual <= 1e-10);
  CHECK((r.trajectory.position(r.length) - y).cwiseAbs().maxCoeff() <= 1e-8);
  // residual monotone under damping is implicit in convergence; check the
  // returned trajectory invariants
  const double kg = g.norm(x, r.curvature);
  for (size_t i = 0; i < r.trajectory.s.size(); ++i) {
    CHECK(std::abs(r.trajectory.gamma[i].norm() - 1.0) <= 1e-9);
    CHECK(std::abs(g.norm(r.trajectory.gamma[i], r.trajectory.tau[i]) - 1.0) <= 1e-8);
    CHECK(std::abs(g.norm(r.trajectory.gamma[i], r.trajectory.curv[i]) - kg) <= 1e-7);
    CHECK(std::abs(g.inner(r.trajectory.gamma[i], r.trajectory.curv[i],
                           r.trajectory.tau[i])) <= 1e-8);
  }

  // warm start converges in few iterations
  TwoPointHint hint;
  hint.curvature = r.curvature;
  hint.length = r.length;
  hint.valid = true;
  const TwoPointResult r2 = solveTwoPoint(g, x, v, y, ShootOptions{}, &hint);
  CHECK(r2.iterations <= 3);

  // wrong-branch guard
  Eigen::VectorXd nearX = -x + 0.29 * v;
  nearX.normalize();
  ShootOptions narrow;
  narrow.branchLo = 3.0;
  narrow.branchHi = 3.3;
  CHECK_THROWS_AS(solveTwoPoint(g, x, v, nearX, narrow), ShootingError);
}

TEST_CASE("two-point solver rejects targets outside the neighborhood") {
  const SphereMetric round = SphereMetric::round(2);
  Eigen::VectorXd x(3), v(3);
  x << 1.0, 0.0, 0.0;
  v << 0.0, 1.0, 0.0;
  CHECK_THROWS_AS(solveTwoPoint(round, x, v, v), ShootingError);
}
