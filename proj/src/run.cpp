#include "geonet/run.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "geonet/ball_reduction.hpp"
#include "geonet/oracle_suite.hpp"
#include "geonet/sphere_reduction.hpp"

namespace geonet {

using ordered_json = nlohmann::ordered_json;

// report.cpp
ordered_json buildReportJson(const RunConfig& cfg, const std::vector<SolveReport>& solutions,
                             const std::vector<StartFailure>& failures,
                             const SearchSummary& summary);
SolveReport solveReportFromJson(const ordered_json& j);
ordered_json verificationToJson(const VerificationReport& v);
void writePolylineCsv(std::ostream& os, int networkId, int edgeId,
                      const std::vector<double>& arcs,
                      const std::vector<Eigen::VectorXd>& points);

namespace {

namespace fs = std::filesystem;

struct RebuiltNetwork {
  std::array<Trajectory, 3> edges;
  std::array<double, 3> lengths{};
};

RebuiltNetwork rebuild(const RunConfig& cfg, const SolveReport& rep) {
  RebuiltNetwork nets;
  if (cfg.isBall()) {
    const BallMetric g = cfg.ballMetric();
    FramePoint f;
    f.V = rep.canonicalFrame;
    Triod t = buildTriod(g, TriodParam{rep.junction, f}, cfg.shootOptions());
    nets.edges = std::move(t.edges);
    nets.lengths = t.lengths;
  } else {
    const SphereMetric g = cfg.sphereMetric();
    FramePoint f;
    f.V = rep.canonicalFrame;
    ThetaNetwork t = buildTheta(g, ThetaParam{f, rep.junctionY}, cfg.shootOptions());
    nets.edges = std::move(t.edges);
    nets.lengths = t.lengths;
  }
  return nets;
}

void exportNetworks(const RunConfig& cfg, const std::vector<SolveReport>& solutions,
                    const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "network_id,edge_id,s";
  const int n = cfg.isBall() ? cfg.metric.dim : cfg.metric.dim + 1;
  for (int c = 0; c < n; ++c) os << ",x_" << c;
  os << "\n";
  const int res = cfg.outputResolution;
  for (const auto& rep : solutions) {
    RebuiltNetwork net = rebuild(cfg, rep);
    for (int e = 0; e < 3; ++e) {
      std::vector<double> arcs;
      std::vector<Eigen::VectorXd> pts;
      for (int i = 0; i <= res; ++i) {
        const double s = net.lengths[e] * i / res;
        arcs.push_back(s);
        pts.push_back(net.edges[e].position(s));
      }
      writePolylineCsv(os, rep.classId, e, arcs, pts);
    }
  }
}

ordered_json loadReport(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report: " + path);
  return ordered_json::parse(in);
}

}  // namespace

int runSolve(const RunConfig& cfg, const std::string& outDir, std::ostream& log) {
  fs::create_directories(outDir);
  std::vector<SolveReport> solutions;
  std::vector<StartFailure> failures;
  SearchSummary summary;
  if (cfg.isBall()) {
    BallSearchInput in;
    in.inner = cfg.innerBallOptions();
    in.shoot = cfg.shootOptions();
    in.search = cfg.searchOptions();
    in.verifyTol = cfg.verifyTol;
    BallSearchResult res = searchCriticalBall(cfg.ballMetric(), in);
    solutions = std::move(res.solutions);
    failures = std::move(res.failures);
    summary = res.summary;
  } else {
    SphereSearchInput in;
    in.inner = cfg.innerSphereOptions();
    in.shoot = cfg.shootOptions();
    in.search = cfg.searchOptions();
    in.verifyTol = cfg.verifyTol;
    SphereSearchResult res = searchCriticalSphere(cfg.sphereMetric(), in);
    solutions = std::move(res.solutions);
    failures = std::move(res.failures);
    summary = res.summary;
  }

  const ordered_json j = buildReportJson(cfg, solutions, failures, summary);
  {
    std::ofstream os(fs::path(outDir) / cfg.outputReport);
    if (!os) {
      log << "cannot write report\n";
      return kExitSolverFailure;
    }
    os << j.dump(2) << "\n";
  }
  if (!cfg.outputNetworks.empty() && !solutions.empty())
    exportNetworks(cfg, solutions, (fs::path(outDir) / cfg.outputNetworks).string());

  int verified = 0;
  for (const auto& s : solutions)
    if (s.verification.pass) ++verified;
  log << "starts " << summary.started << ", converged " << summary.converged << ", classes "
      << summary.classes << ", verified classes " << verified << "\n";
  for (const auto& f : failures) log << "  start seed " << f.seed << " failed: " << f.reason << "\n";
  for (const auto& s : solutions)
    log << "  class " << s.classId << ": value " << std::setprecision(12) << s.value
        << ", cluster " << s.clusterSize << ", inertia (" << s.inertiaNegative << ","
        << s.inertiaZero << "," << s.inertiaPositive << ")"
        << (s.verification.pass ? "" : "  [verification FAILED]") << "\n";
  return verified > 0 ? kExitOk : kExitSolverFailure;
}

int runVerify(const RunConfig& cfg, const std::string& outDir, std::ostream& log) {
  const ordered_json rep = loadReport((fs::path(outDir) / cfg.outputReport).string());
  bool all = true;
  int count = 0;
  for (const auto& sj : rep.at("solutions")) {
    SolveReport s = solveReportFromJson(sj);
    VerificationReport v;
    if (cfg.isBall()) {
      const BallMetric g = cfg.ballMetric();
      FramePoint f;
      f.V = s.canonicalFrame;
      Triod t = buildTriod(g, TriodParam{s.junction, f}, cfg.shootOptions());
      v = verifyTriod(g, t, cfg.verifyTol);
    } else {
      const SphereMetric g = cfg.sphereMetric();
      FramePoint f;
      f.V = s.canonicalFrame;
      ThetaNetwork t = buildTheta(g, ThetaParam{f, s.junctionY}, cfg.shootOptions());
      v = verifyTheta(g, t, cfg.verifyTol);
    }
    log << "class " << s.classId << ": geodesic " << v.geodesicResidual << ", balance "
        << v.balanceResidual << ", orthogonality " << v.orthogonalityResidual << ", angle "
        << v.angleResidual << " -> " << (v.pass ? "pass" : "FAIL") << "\n";
    all = all && v.pass;
    ++count;
  }
  if (count == 0) {
    log << "report contains no solutions\n";
    return kExitSolverFailure;
  }
  return all ? kExitOk : kExitSolverFailure;
}

int runExport(const RunConfig& cfg, const std::string& outDir, std::ostream& log) {
  const ordered_json rep = loadReport((fs::path(outDir) / cfg.outputReport).string());
  if (!rep.contains("solutions") || rep.at("solutions").empty())
    throw std::runtime_error("report contains no trajectory data to export");
  std::vector<SolveReport> solutions;
  for (const auto& sj : rep.at("solutions")) solutions.push_back(solveReportFromJson(sj));
  const std::string name = cfg.outputNetworks.empty() ? "networks.csv" : cfg.outputNetworks;
  const std::string path = (fs::path(outDir) / name).string();
  exportNetworks(cfg, solutions, path);
  log << "wrote " << path << " (" << solutions.size() << " networks, resolution "
      << cfg.outputResolution << ")\n";
  return kExitOk;
}

int runOracleCheck(const RunConfig& cfg, std::ostream& log) {
  const int d = cfg.metric.dim;
  ShootOptions opt = cfg.shootOptions();
  std::vector<OracleResult> results = runBallOracles(d, opt, cfg.searchSeed);
  std::vector<OracleResult> sphere = runSphereOracles(d, opt, cfg.searchSeed + 500);
  results.insert(results.end(), sphere.begin(), sphere.end());
  bool all = true;
  log << std::left;
  for (const auto& r : results) {
    log << (r.pass ? "PASS  " : "FAIL  ") << std::setw(36) << r.name << " observed "
        << std::setprecision(3) << std::scientific << r.worst << " vs " << r.tol
        << std::defaultfloat << "  (" << r.detail << ")\n";
    all = all && r.pass;
  }
  log << (all ? "all oracle checks passed" : "ORACLE CHECKS FAILED") << "\n";
  return all ? kExitOk : kExitSolverFailure;
}

}  // namespace geonet
