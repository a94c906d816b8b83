#include <json.hpp>

#include <cstdio>
#include <fstream>

#include "geonet/config.hpp"
#include "geonet/report.hpp"
#include "geonet/run.hpp"

namespace geonet {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json vectorToJson(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// frames serialize as row lists: one row per frame vector
ordered_json frameToJson(const Eigen::MatrixXd& V) {
  ordered_json a = ordered_json::array();
  for (int j = 0; j < V.cols(); ++j) a.push_back(vectorToJson(V.col(j)));
  return a;
}

Eigen::VectorXd vectorFromJson(const ordered_json& a) {
  Eigen::VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

Eigen::MatrixXd frameFromJson(const ordered_json& a) {
  const int k = static_cast<int>(a.size());
  const int n = static_cast<int>(a.at(0).size());
  Eigen::MatrixXd V(n, k);
  for (int j = 0; j < k; ++j) V.col(j) = vectorFromJson(a.at(j));
  return V;
}

ordered_json contextBlock(const RunConfig& cfg) {
  // Paper-asserted reporting constants; the tool never computes these.
  ordered_json ctx;
  ctx["note"] =
      "multiplicity lower bounds and Lusternik-Schnirelmann category values are "
      "paper-asserted, not computed";
  const int d = cfg.metric.dim;
  ordered_json cat;
  int bound = 0;
  if (cfg.isBall()) {
    cat["manifold"] = "V_2(R^" + std::to_string(d) + ")";
    cat["value"] = (d <= 3) ? 4 : 3;
    cat["exact"] = true;
    bound = (d == 2) ? 2 : (d == 3 ? 4 : 3);
  } else {
    cat["manifold"] = "V_3(R^" + std::to_string(d + 1) + ")";
    if (d == 2) {
      cat["value"] = 8;
      cat["exact"] = true;
    } else if (d <= 4) {
      cat["value"] = 5;
      cat["exact"] = false;  // lower bound only
    } else {
      cat["value"] = 4;
      cat["exact"] = true;
    }
    bound = (d == 3 || d == 4) ? 5 : 4;
  }
  ctx["category"] = std::move(cat);
  ctx["multiplicity_lower_bound"] = bound;
  return ctx;
}

}  // namespace

ordered_json verificationToJson(const VerificationReport& v) {
  ordered_json j;
  j["geodesic"] = v.geodesicResidual;
  j["balance"] = v.balanceResidual;
  j["orthogonality"] = v.orthogonalityResidual;
  j["angle"] = v.angleResidual;
  j["tol"] = v.tol;
  j["pass"] = v.pass;
  return j;
}

ordered_json solveReportToJson(const SolveReport& r) {
  ordered_json j;
  j["class_id"] = r.classId;
  j["cluster_size"] = r.clusterSize;
  j["manifold_class"] = r.manifoldClass;
  j["component"] = r.component;
  j["value"] = r.value;
  j["grad_norm"] = r.gradNorm;
  j["inertia"] = {{"negative", r.inertiaNegative},
                  {"zero", r.inertiaZero},
                  {"positive", r.inertiaPositive}};
  j["iterations"] = {{"outer", r.outerIterations}, {"inner", r.innerIterations}};
  j["frame"] = frameToJson(r.canonicalFrame);
  j["junction"] = vectorToJson(r.junction);
  if (r.junctionY.size()) j["junction_y"] = vectorToJson(r.junctionY);
  j["edge_lengths"] = {r.edgeLengths[0], r.edgeLengths[1], r.edgeLengths[2]};
  if (r.curvatureCoords.size()) j["curvature_coords"] = frameToJson(r.curvatureCoords);
  j["verification"] = verificationToJson(r.verification);
  j["seeds"] = r.seeds;
  return j;
}

ordered_json buildReportJson(const RunConfig& cfg, const std::vector<SolveReport>& solutions,
                             const std::vector<StartFailure>& failures,
                             const SearchSummary& summary) {
  ordered_json j;
  j["schema"] = "geonet-report/1";
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["config"] = cfg.toJson();
  j["context"] = contextBlock(cfg);
  j["summary"] = {{"started", summary.started},
                  {"converged", summary.converged},
                  {"failed", summary.failed},
                  {"classes", summary.classes}};
  ordered_json sols = ordered_json::array();
  for (const auto& s : solutions) sols.push_back(solveReportToJson(s));
  j["solutions"] = std::move(sols);
  ordered_json fails = ordered_json::array();
  for (const auto& f : failures) fails.push_back({{"seed", f.seed}, {"reason", f.reason}});
  j["failures"] = std::move(fails);
  return j;
}

SolveReport solveReportFromJson(const ordered_json& j) {
  SolveReport r;
  r.classId = j.at("class_id").get<int>();
  r.clusterSize = j.at("cluster_size").get<int>();
  r.manifoldClass = j.at("manifold_class").get<bool>();
  r.component = j.at("component").get<int>();
  r.value = j.at("value").get<double>();
  r.gradNorm = j.at("grad_norm").get<double>();
  r.canonicalFrame = frameFromJson(j.at("frame"));
  r.junction = vectorFromJson(j.at("junction"));
  if (j.contains("junction_y")) r.junctionY = vectorFromJson(j.at("junction_y"));
  for (int e = 0; e < 3; ++e) r.edgeLengths[e] = j.at("edge_lengths").at(e).get<double>();
  return r;
}

void writePolylineCsv(std::ostream& os, int networkId, int edgeId,
                      const std::vector<double>& arcs,
                      const std::vector<Eigen::VectorXd>& points) {
  char buf[64];
  for (size_t i = 0; i < arcs.size(); ++i) {
    os << networkId << "," << edgeId;
    std::snprintf(buf, sizeof(buf), ",%.12f", arcs[i]);
    os << buf;
    for (int c = 0; c < points[i].size(); ++c) {
      std::snprintf(buf, sizeof(buf), ",%.12f", points[i][c]);
      os << buf;
    }
    os << "\n";
  }
}

}  // namespace geonet
