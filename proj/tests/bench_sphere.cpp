// Scratch benchmark for the sphere search hot path (not registered in ctest).
#include <chrono>
#include <cstdio>

#include "geonet/sphere_reduction.hpp"

using namespace geonet;
namespace geonet { extern long long gEgCalls, gInnerCalls, gInnerIters, gInnerJacBuilds, gTwoPointCalls; }
using Clock = std::chrono::steady_clock;

namespace {
Polynomial genericCubic4(int n) {
  std::vector<PolyTerm> terms;
  PolyTerm a{1.0, std::vector<int>(n, 0)};
  a.powers[0] = 1;
  terms.push_back(a);
  PolyTerm b{0.6, std::vector<int>(n, 0)};
  b.powers[1] = 1;
  b.powers[2] = 1;
  terms.push_back(b);
  PolyTerm c{0.4, std::vector<int>(n, 0)};
  c.powers[1] = 2;
  terms.push_back(c);
  return Polynomial(n, terms);
}
double ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}
}  // namespace

int main(int argc, char** argv) {
  const int d = argc > 1 ? std::atoi(argv[1]) : 2;
  const int n = d + 1;
  const SphereMetric g = SphereMetric::conformal(d, 0.01, genericCubic4(n));
  ShootOptions opt;
  const FramePoint f = randomPoint(n, 3, 4321);
  const Eigen::VectorXd x = f.col(0);

  {  // single cold Eg
    auto t0 = Clock::now();
    ThetaHints hints;
    double v = Eg(g, ThetaParam{f, (-x).eval()}, opt, &hints);
    std::printf("cold Eg: %.2f ms (value %.6f)\n", ms(t0), v);
    t0 = Clock::now();
    const int reps = 20;
    for (int i = 0; i < reps; ++i) v = Eg(g, ThetaParam{f, (-x).eval()}, opt, &hints);
    std::printf("warm Eg: %.3f ms\n", ms(t0) / reps);
  }
  {  // inner solve
    auto t0 = Clock::now();
    SphereInnerOptions nopt;
    Eigen::MatrixXd J;
    ThetaHints hints;
    SphereInnerResult r = innerSolveY(g, f, nopt, opt, nullptr, &J, &hints);
    std::printf("cold innerSolveY: %.2f ms (%d iters)\n", ms(t0), r.iterations);
    t0 = Clock::now();
    SphereInnerResult r2 = innerSolveY(g, f, nopt, opt, &r.y, &J, &hints);
    std::printf("warm innerSolveY: %.2f ms (%d iters)\n", ms(t0), r2.iterations);
  }
  {  // one local search from a random start
    SphereSearchInput in;
    in.search.count = 1;
    in.search.seed = 777;
    const long long i0 = integrationCount();
    auto t0 = Clock::now();
    SphereSearchResult res = searchCriticalSphere(g, in);
    std::printf("integrations during search: %lld\n", integrationCount() - i0);
    {
      std::printf("Eg calls %lld, twoPoint %lld, inner calls %lld, inner iters %lld, inner J builds %lld\n",
                  gEgCalls, gTwoPointCalls, gInnerCalls, gInnerIters, gInnerJacBuilds);
    }
    std::printf("1-start search: %.2f ms (converged %d, failed %d)\n", ms(t0),
                res.summary.converged, res.summary.failed);
    for (auto& fl : res.failures) std::printf("  failure: %s\n", fl.reason.c_str());
    for (auto& s : res.solutions)
      std::printf("  value %.9f, grad %.2e, outer %d\n", s.value, s.gradNorm,
                  s.outerIterations);
  }
  return 0;
}
