#include <doctest.h>

#include <random>

#include "geonet/ball_reduction.hpp"

using namespace geonet;

namespace {

Polynomial genericCubic(int d) {
  // f = x1 + 0.5 x1 x2 + 0.3 x2^2 (+ 0.2 x3 in higher dimensions)
  std::vector<PolyTerm> terms;
  PolyTerm a{1.0, std::vector<int>(d, 0)};
  a.powers[0] = 1;
  terms.push_back(a);
  PolyTerm b{0.5, std::vector<int>(d, 0)};
  b.powers[0] = 1;
  b.powers[1] = 1;
  terms.push_back(b);
  PolyTerm c{0.3, std::vector<int>(d, 0)};
  c.powers[1] = 2;
  terms.push_back(c);
  if (d > 2) {
    PolyTerm e{0.2, std::vector<int>(d, 0)};
    e.powers[2] = 1;
    terms.push_back(e);
  }
  return Polynomial(d, terms);
}

Eigen::VectorXd randomInBall(std::mt19937_64& rng, int d, double r) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> uni;
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = gauss(rng);
  return r * std::pow(uni(rng), 1.0 / d) * v.normalized();
}

}  // namespace

TEST_CASE("flat directions: formulas, zero sum, equal angles") {
  FramePoint e;
  e.V = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd u = directionsFlat(e);
  CHECK((u.col(1) - Eigen::Vector2d(-0.5, std::sqrt(3.0) / 2.0)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((u.col(0) + u.col(1) + u.col(2)).cwiseAbs().maxCoeff() <= 1e-15);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      CHECK(std::abs(u.col(a).dot(u.col(b)) + 0.5) <= 1e-12);
}

TEST_CASE("psi_g: balanced metric-unit directions") {
  const BallMetric g = BallMetric::conformal(2, 0.01, genericCubic(2));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd x = randomInBall(rng, 2, 0.45);
    const FramePoint e = randomPoint(2, 2, 600 + trial);
    const BalancedDirections dirs = psiG(g, x, e);
    CHECK((dirs.u.col(0) + dirs.u.col(1) + dirs.u.col(2)).cwiseAbs().maxCoeff() <= 1e-10);
    for (int a = 0; a < 3; ++a) {
      CHECK(std::abs(g.inner(x, dirs.u.col(a), dirs.u.col(a)) - 1.0) <= 1e-10);
      for (int b = a + 1; b < 3; ++b)
        CHECK(std::abs(g.inner(x, dirs.u.col(a), dirs.u.col(b)) + 0.5) <= 1e-10);
    }
  }
  // eps = 0 recovers the flat formulas
  const BallMetric flat = BallMetric::standard(2);
  const FramePoint e = randomPoint(2, 2, 5);
  CHECK((psiG(flat, Eigen::VectorXd::Zero(2), e).u - directionsFlat(e)).cwiseAbs().maxCoeff() <=
        1e-15);
  // conformal metric at x scales the flat directions by exp(-eps f(x))
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
  const BallMetric gc = BallMetric::conformal(2, 0.01, genericCubic(2));
  const double scale = std::exp(-0.01 * genericCubic(2)(x0));
  CHECK((psiG(gc, x0, e).u - scale * directionsFlat(e)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("triod construction at the flat metric") {
  const BallMetric flat = BallMetric::standard(2);
  FramePoint e;
  e.V = Eigen::MatrixXd::Identity(2, 2);
  const Triod t = buildTriod(flat, TriodParam{Eigen::VectorXd::Zero(2), e});
  CHECK(std::abs(t.totalLength - 3.0) <= 1e-10);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(t.lengths[j] - 1.0) <= 1e-10);
    CHECK(std::abs(t.edges[j].gamma.back().norm() - 1.0) <= 1e-10);
    CHECK((t.edges[j].gamma.front()).norm() <= 1e-12);
  }

  // off-centre: edge lengths equal the closed form
  std::mt19937_64 rng(17);
  const Eigen::VectorXd x = randomInBall(rng, 2, 0.45);
  const Triod t2 = buildTriod(flat, TriodParam{x, e});
  for (int j = 0; j < 3; ++j) {
    const Eigen::VectorXd u = t2.directions.col(j);
    const double xw = x.dot(u);
    const double want = -xw + std::sqrt(1.0 - (x - xw * u).squaredNorm());
    CHECK(std::abs(t2.lengths[j] - want) <= 1e-10);
  }
}

TEST_CASE("F0 closed form: maxima and derivative") {
  FramePoint e;
  e.V = Eigen::MatrixXd::Identity(2, 2);
  CHECK(F0(Eigen::VectorXd::Zero(2), e) == doctest::Approx(3.0).epsilon(1e-15));
  const Eigen::MatrixXd u = directionsFlat(e);
  for (int j = 0; j < 3; ++j) {
    CHECK(F0(u.col(j), e) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(F0((-u.col(j)).eval(), e) == doctest::Approx(2.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(F0(2.0 * u.col(0), e), std::domain_error);

  // radial derivative is strictly negative away from the origin
  std::mt19937_64 rng(19);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd x = randomInBall(rng, 2, 0.9);
    if (x.norm() < 1e-3) continue;
    CHECK(F0RadialDerivative(x, e) < 0.0);
  }

  // Hessian at the origin on v = e1 equals -3/2
  CHECK(F0HessianOrigin(e, e.col(0)) == doctest::Approx(-1.5).epsilon(1e-14));
}

TEST_CASE("F_g agrees with F0 at eps = 0 and is S3 invariant") {
  const BallMetric flat = BallMetric::standard(3);
  std::mt19937_64 rng(23);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = randomInBall(rng, 3, 0.45);
    const FramePoint e = randomPoint(3, 2, 700 + i);
    worst = std::max(worst, std::abs(Fg(flat, TriodParam{x, e}) - F0(x, e)));
  }
  CHECK(worst <= 1e-9);

  // S3 invariance under a perturbed metric
  const BallMetric g = BallMetric::conformal(3, 0.01, genericCubic(3));
  const Eigen::VectorXd x = randomInBall(rng, 3, 0.4);
  const FramePoint e = randomPoint(3, 2, 31);
  const double base = Fg(g, TriodParam{x, e});
  for (const FramePoint& q : s3Orbit(e, g.at(x)))
    CHECK(std::abs(Fg(g, TriodParam{x, q}) - base) <= 1e-9);
}

TEST_CASE("gradient of F_g: critical manifold at eps = 0 and FD consistency") {
  const BallMetric flat = BallMetric::standard(2);
  const FramePoint e = randomPoint(2, 2, 37);
  const BallGradient grad0 =
      gradFg(flat, TriodParam{Eigen::VectorXd::Zero(2), e}, 1e-5, 1e-5);
  CHECK(grad0.gradX.cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(grad0.gradFrame.Z.cwiseAbs().maxCoeff() <= 1e-8);

  // analytic gradient of the closed form vs the pipeline gradient
  std::mt19937_64 rng(41);
  const Eigen::VectorXd x = randomInBall(rng, 2, 0.4);
  const BallGradient gr = gradFg(flat, TriodParam{x, e}, 1e-5, 1e-5);
  const Eigen::MatrixXd u = directionsFlat(e);
  Eigen::VectorXd want = Eigen::VectorXd::Zero(2);
  for (int j = 0; j < 3; ++j) {
    const Eigen::VectorXd proj = x - x.dot(u.col(j)) * u.col(j);
    want += -proj / std::sqrt(1.0 - proj.squaredNorm());
  }
  CHECK((gr.gradX - want).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("inner solve: immediate at eps = 0, linear scaling band in eps") {
  const BallMetric flat = BallMetric::standard(2);
  const FramePoint e = randomPoint(2, 2, 43);
  InnerSolveOptions nopt;
  const InnerSolveResult r0 = innerSolveX(flat, e, nopt, ShootOptions{});
  CHECK(r0.iterations <= 1);
  CHECK(r0.solution.norm() <= 1e-9);
  CHECK(r0.gradNorm <= 1e-9);

  double norms[2];
  int idx = 0;
  for (double eps : {1e-2, 1e-3}) {
    const BallMetric g = BallMetric::conformal(2, eps, genericCubic(2));
    const InnerSolveResult r = innerSolveX(g, e, nopt, ShootOptions{});
    CHECK(r.gradNorm <= 1e-9);
    norms[idx++] = r.solution.norm();
  }
  const double ratio = norms[0] / norms[1];
  CHECK(ratio >= 5.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("verify_triod: exact minimal triod and a non-critical one") {
  const BallMetric flat = BallMetric::standard(2);
  FramePoint e;
  e.V = Eigen::MatrixXd::Identity(2, 2);
  const Triod center = buildTriod(flat, TriodParam{Eigen::VectorXd::Zero(2), e});
  const VerificationReport good = verifyTriod(flat, center, 1e-9);
  CHECK(good.pass);
  CHECK(good.geodesicResidual <= 1e-9);
  CHECK(good.balanceResidual <= 1e-9);
  CHECK(good.orthogonalityResidual <= 1e-9);
  CHECK(good.angleResidual <= 1e-9);

  Eigen::VectorXd off(2);
  off << 0.3, 0.1;
  const VerificationReport bad = verifyTriod(flat, buildTriod(flat, TriodParam{off, e}), 1e-9);
  CHECK(bad.orthogonalityResidual > 1e-3);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("multistart search: flat manifold class and perturbed classes") {
  BallSearchInput in;
  in.search.count = 6;
  in.search.seed = 2024;
  in.search.maxIters = 60;

  // eps = 0: one critical-manifold class at value 3 with full nullity
  const BallMetric flat = BallMetric::standard(2);
  const BallSearchResult flatRes = searchCriticalBall(flat, in);
  CHECK(flatRes.summary.converged == 6);
  REQUIRE(flatRes.solutions.size() == 1);
  CHECK(flatRes.solutions[0].manifoldClass);
  CHECK(flatRes.solutions[0].value == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(flatRes.solutions[0].inertiaZero == stiefelDim(2, 2));

  // perturbed: every class passes verification, at least two classes
  const BallMetric g = BallMetric::conformal(2, 0.01, genericCubic(2));
  in.search.count = 10;
  const BallSearchResult res = searchCriticalBall(g, in);
  CHECK(res.summary.converged >= 8);
  CHECK(res.solutions.size() >= 2);
  for (const auto& s : res.solutions) {
    CHECK(s.verification.pass);
    CHECK(s.gradNorm <= in.search.gradTol);
  }
  // components are labeled on V_2(R^2)
  bool sawPlus = false, sawMinus = false;
  for (const auto& s : res.solutions) {
    if (s.component > 0) sawPlus = true;
    if (s.component < 0) sawMinus = true;
  }
  CHECK(sawPlus);
  CHECK(sawMinus);
}
