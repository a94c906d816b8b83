#include "geonet/search.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace geonet {

double VerificationReport::maxResidual() const {
  return std::max({geodesicResidual, balanceResidual, orthogonalityResidual, angleResidual});
}

FramePoint ReducedProblem::chartPoint(const FramePoint& base,
                                      const std::vector<StiefelTangent>& basis,
                                      const Eigen::VectorXd& theta) const {
  if (theta.size() == 0 || theta.isZero(0.0)) return base;
  StiefelTangent z;
  z.Z = Eigen::MatrixXd::Zero(base.n(), base.k());
  for (int i = 0; i < theta.size(); ++i)
    if (theta[i] != 0.0) z.Z += theta[i] * basis[i].Z;
  return retract(base, z, 1.0);
}

LocalSearchResult findCriticalPoint(ReducedProblem& prob, const FramePoint& start,
                                    const SearchOptions& opt) {
  const int m = prob.tangentDim();
  const bool trace = std::getenv("GEONET_SEARCH_TRACE") != nullptr;
  LocalSearchResult res;
  FramePoint base = start;
  try {
    std::vector<StiefelTangent> basis = tangentBasis(base);
    Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd G = prob.gradient(base, basis, theta0);
    double gn = G.norm();
    double mu = 1e-4;
    Eigen::MatrixXd H(m, m);
    bool haveH = false;
    int iter = 0;
    while (true) {
      if (gn <= opt.gradTol) {
        res.converged = true;
        break;
      }
      if (iter >= opt.maxIters) {
        res.error = "no convergence after " + std::to_string(iter) +
                    " iterations, |grad| = " + std::to_string(gn);
        break;
      }
      // Full finite-difference builds of the gradient Jacobian are expensive
      // (each column re-solves the inner variables); between builds the
      // curvature is maintained by symmetric rank-one updates from the
      // gradient pairs the iteration produces anyway.
      // Cheap build: forward differences (H noise ~ gradient noise / step).
      // Careful build: central differences at the Hessian step, resolving the
      // weakly curved modes an eps-small perturbation produces.
      auto buildH = [&](bool careful) {
        for (int i = 0; i < m; ++i) {
          if (careful) {
            const double h = std::max(opt.hessStep, 10.0 * opt.fdStep);
            Eigen::VectorXd gp = prob.gradient(base, basis, h * Eigen::VectorXd::Unit(m, i));
            Eigen::VectorXd gm = prob.gradient(base, basis, -h * Eigen::VectorXd::Unit(m, i));
            H.col(i) = (gp - gm) / (2.0 * h);
          } else {
            Eigen::VectorXd Gi =
                prob.gradient(base, basis, opt.fdStep * Eigen::VectorXd::Unit(m, i));
            H.col(i) = (Gi - G) / opt.fdStep;
          }
        }
        H = 0.5 * (H + H.transpose()).eval();
        haveH = true;
      };
      if (!haveH) buildH(false);
      // Damped Newton on the gradient field. The step is assembled in the
      // eigenbasis of H with sign-corrected, mu-floored curvatures, so saddle
      // directions are walked toward and near-flat directions are not crushed
      // the way a plain (H^T H + mu I) regularization would.
      bool accepted = false;
      bool rebuilt = false;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
      for (int attempt = 0; attempt < 18; ++attempt) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
        for (int i = 0; i < m; ++i) {
          const double lam = es.eigenvalues()[i];
          const double sgn = lam >= 0 ? 1.0 : -1.0;
          const double c = es.eigenvectors().col(i).dot(G);
          s -= (sgn * c / (std::abs(lam) + mu)) * es.eigenvectors().col(i);
        }
        if (s.norm() > 0.5) s *= 0.5 / s.norm();  // chart trust cap
        Eigen::VectorXd Gt;
        try {
          Gt = prob.gradient(base, basis, s);
        } catch (const std::exception&) {
          // trial left the solvable neighborhood: treat as a rejection
          mu *= 6.0;
          continue;
        }
        if (Gt.norm() < gn) {
          // SR1 update in the outgoing chart before recentring
          const Eigen::VectorXd r = (Gt - G) - H * s;
          const double denom = r.dot(s);
          if (std::abs(denom) > 1e-8 * r.norm() * s.norm())
            H += (r * r.transpose()) / denom;
          base = prob.chartPoint(base, basis, s);
          basis = tangentBasis(base);
          G = prob.gradient(base, basis, theta0);  // recentred gradient (memoized inner)
          gn = G.norm();
          mu = std::max(mu / 10.0, 1e-14);
          accepted = true;
          break;
        }
        mu *= 6.0;
        if (attempt == 4 && !rebuilt) {
          buildH(true);  // stale or under-resolved curvature may be blocking
          es.compute(H);
          mu = 1e-6;
          rebuilt = true;
        }
      }
      ++iter;
      if (trace) {
        std::printf("  [search] iter %2d  |grad| %.3e  mu %.1e  %s", iter, gn, mu,
                    accepted ? "" : "STALL");
        if (rebuilt || !accepted) {
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esd(H, Eigen::EigenvaluesOnly);
          std::printf("  spec[");
          for (int i = 0; i < m; ++i) std::printf(" %.2e", esd.eigenvalues()[i]);
          std::printf(" ]");
        }
        std::printf("\n");
        std::fflush(stdout);
      }
      if (!accepted) {
        res.error = "step search stalled at |grad| = " + std::to_string(gn);
        break;
      }
    }
    res.frame = base;
    res.gradNorm = gn;
    res.iterations = iter;
  } catch (const std::exception& e) {
    res.converged = false;
    res.error = e.what();
    res.frame = base;
  }
  return res;
}

Eigen::MatrixXd reducedHessian(ReducedProblem& prob, const FramePoint& p,
                               const SearchOptions& opt) {
  const int m = prob.tangentDim();
  std::vector<StiefelTangent> basis = tangentBasis(p);
  Eigen::MatrixXd H(m, m);
  const double h = opt.hessStep;
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd gp = prob.gradient(p, basis, h * Eigen::VectorXd::Unit(m, i));
    Eigen::VectorXd gm = prob.gradient(p, basis, -h * Eigen::VectorXd::Unit(m, i));
    H.col(i) = (gp - gm) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose()).eval();
}

void hessianInertia(const Eigen::MatrixXd& H, double cutoff, int& neg, int& zero, int& pos) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  neg = zero = pos = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double ev = es.eigenvalues()[i];
    if (std::abs(ev) <= cutoff)
      ++zero;
    else if (ev < 0)
      ++neg;
    else
      ++pos;
  }
}

namespace {

Eigen::VectorXd flattenSolution(const SolveReport& r) {
  Eigen::VectorXd out(r.canonicalFrame.size() + r.junction.size() + r.junctionY.size());
  int at = 0;
  for (int j = 0; j < r.canonicalFrame.cols(); ++j) {
    out.segment(at, r.canonicalFrame.rows()) = r.canonicalFrame.col(j);
    at += static_cast<int>(r.canonicalFrame.rows());
  }
  out.segment(at, r.junction.size()) = r.junction;
  at += static_cast<int>(r.junction.size());
  if (r.junctionY.size()) out.segment(at, r.junctionY.size()) = r.junctionY;
  return out;
}

bool lexFrameLess(const SolveReport& a, const SolveReport& b) {
  const Eigen::VectorXd fa = flattenSolution(a), fb = flattenSolution(b);
  for (int i = 0; i < fa.size(); ++i) {
    if (std::abs(fa[i] - fb[i]) <= 1e-12) continue;
    return fa[i] < fb[i];
  }
  return false;
}

}  // namespace

std::vector<SolveReport> clusterReports(std::vector<SolveReport> reports, int tangentDim,
                                        const SearchOptions& opt) {
  std::sort(reports.begin(), reports.end(), [](const SolveReport& a, const SolveReport& b) {
    if (a.value != b.value) return a.value > b.value;
    return lexFrameLess(a, b);
  });
  std::vector<SolveReport> out;
  size_t i = 0;
  while (i < reports.size()) {
    // value group [i, j)
    size_t j = i + 1;
    while (j < reports.size() &&
           std::abs(reports[j].value - reports[i].value) <=
               opt.valueTol * std::max(1.0, std::abs(reports[i].value)))
      ++j;
    bool manifold = true;
    for (size_t k = i; k < j; ++k)
      if (reports[k].inertiaZero != tangentDim) manifold = false;
    if (manifold && j > i) {
      SolveReport rep = reports[i];
      rep.manifoldClass = true;
      rep.clusterSize = static_cast<int>(j - i);
      for (size_t k = i + 1; k < j; ++k)
        rep.seeds.insert(rep.seeds.end(), reports[k].seeds.begin(), reports[k].seeds.end());
      out.push_back(std::move(rep));
    } else {
      // greedy frame-based clustering inside the value group
      std::vector<bool> used(j - i, false);
      for (size_t a = i; a < j; ++a) {
        if (used[a - i]) continue;
        SolveReport rep = reports[a];
        used[a - i] = true;
        const Eigen::VectorXd fa = flattenSolution(reports[a]);
        for (size_t b = a + 1; b < j; ++b) {
          if (used[b - i]) continue;
          const Eigen::VectorXd fb = flattenSolution(reports[b]);
          if ((fa - fb).cwiseAbs().maxCoeff() <= opt.dedupTol) {
            used[b - i] = true;
            rep.clusterSize += 1;
            rep.seeds.insert(rep.seeds.end(), reports[b].seeds.begin(), reports[b].seeds.end());
          }
        }
        out.push_back(std::move(rep));
      }
    }
    i = j;
  }
  for (size_t k = 0; k < out.size(); ++k) {
    out[k].classId = static_cast<int>(k);
    std::sort(out[k].seeds.begin(), out[k].seeds.end());
  }
  return out;
}

}  // namespace geonet
