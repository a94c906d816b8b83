#include "geonet/config.hpp"

#include <fstream>
#include <set>

namespace geonet {

namespace {

using ordered_json = nlohmann::ordered_json;

void rejectUnknown(const ordered_json& j, const std::set<std::string>& known,
                   const std::string& path) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("unknown key \"" + path + it.key() + "\"");
}

double positive(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError("\"" + path + "\" must be a number");
  const double v = j.get<double>();
  if (!(v > 0)) throw ConfigError("\"" + path + "\" must be > 0");
  return v;
}

int positiveInt(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError("\"" + path + "\" must be an integer");
  const int v = j.get<int>();
  if (v <= 0) throw ConfigError("\"" + path + "\" must be > 0");
  return v;
}

std::vector<PolyTerm> parseTermList(const ordered_json& j, int nvars, const std::string& path) {
  if (!j.is_array()) throw ConfigError("\"" + path + "\" must be an array of terms");
  std::vector<PolyTerm> terms;
  int idx = 0;
  for (const auto& t : j) {
    const std::string tp = path + "[" + std::to_string(idx++) + "].";
    if (!t.is_object()) throw ConfigError("\"" + path + "\" entries must be objects");
    rejectUnknown(t, {"coeff", "powers"}, tp);
    if (!t.contains("coeff") || !t.contains("powers"))
      throw ConfigError("\"" + tp + "\" needs coeff and powers");
    PolyTerm term;
    term.coeff = t.at("coeff").get<double>();
    for (const auto& p : t.at("powers")) term.powers.push_back(p.get<int>());
    if (static_cast<int>(term.powers.size()) != nvars)
      throw ConfigError("\"" + tp + "powers\" must have " + std::to_string(nvars) + " entries");
    terms.push_back(std::move(term));
  }
  return terms;
}

ordered_json termListToJson(const std::vector<PolyTerm>& terms) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : terms) {
    ordered_json o;
    o["coeff"] = t.coeff;
    o["powers"] = t.powers;
    arr.push_back(std::move(o));
  }
  return arr;
}

}  // namespace

RunConfig RunConfig::fromJson(const ordered_json& j) {
  RunConfig c;
  rejectUnknown(j, {"schema", "metric", "ode", "newton", "bvp", "fd", "search", "verify",
                    "output"},
                "");
  if (j.contains("schema") && j.at("schema").get<std::string>() != "geonet-config/1")
    throw ConfigError("\"schema\" must be \"geonet-config/1\"");
  if (!j.contains("metric")) throw ConfigError("missing \"metric\" section");

  const auto& m = j.at("metric");
  rejectUnknown(m, {"space", "dim", "kind", "epsilon", "poly"}, "metric.");
  c.metric.space = m.value("space", std::string("ball"));
  if (c.metric.space != "ball" && c.metric.space != "sphere")
    throw ConfigError("\"metric.space\" must be \"ball\" or \"sphere\"");
  if (!m.contains("dim")) throw ConfigError("missing \"metric.dim\"");
  c.metric.dim = m.at("dim").get<int>();
  if (c.metric.dim < 2) throw ConfigError("\"metric.dim\" must be >= 2");
  c.metric.kind = m.value("kind", std::string("standard"));
  if (c.metric.kind != "standard" && c.metric.kind != "conformal" && c.metric.kind != "bilinear")
    throw ConfigError("\"metric.kind\" must be standard, conformal or bilinear");
  if (c.metric.kind == "bilinear" && c.metric.space == "sphere")
    throw ConfigError("sphere metrics are conformal only");
  c.metric.epsilon = m.value("epsilon", 0.0);
  if (c.metric.epsilon < 0) throw ConfigError("\"metric.epsilon\" must be >= 0");
  const int nvars = c.metric.space == "ball" ? c.metric.dim : c.metric.dim + 1;
  if (c.metric.kind != "standard") {
    if (!m.contains("poly")) throw ConfigError("missing \"metric.poly\"");
    const auto& poly = m.at("poly");
    if (c.metric.kind == "conformal") {
      c.metric.poly.push_back(parseTermList(poly, nvars, "metric.poly"));
    } else {
      const int want = c.metric.dim * (c.metric.dim + 1) / 2;
      if (!poly.is_array() || static_cast<int>(poly.size()) != want)
        throw ConfigError("\"metric.poly\" must list " + std::to_string(want) +
                          " upper-triangle entries");
      int idx = 0;
      for (const auto& entry : poly)
        c.metric.poly.push_back(
            parseTermList(entry, nvars, "metric.poly[" + std::to_string(idx++) + "]"));
    }
  }

  if (j.contains("ode")) {
    const auto& o = j.at("ode");
    rejectUnknown(o, {"rtol", "atol", "fixed_step", "max_step", "initial_step"}, "ode.");
    if (o.contains("rtol")) c.odeRtol = positive(o.at("rtol"), "ode.rtol");
    if (o.contains("atol")) c.odeAtol = positive(o.at("atol"), "ode.atol");
    if (o.contains("fixed_step")) c.odeFixedStep = positive(o.at("fixed_step"), "ode.fixed_step");
    if (o.contains("max_step")) c.odeMaxStep = positive(o.at("max_step"), "ode.max_step");
    if (o.contains("initial_step"))
      c.odeInitialStep = positive(o.at("initial_step"), "ode.initial_step");
  }
  if (j.contains("newton")) {
    const auto& o = j.at("newton");
    rejectUnknown(o, {"tol", "max_iters"}, "newton.");
    if (o.contains("tol")) c.newtonTol = positive(o.at("tol"), "newton.tol");
    if (o.contains("max_iters")) c.newtonMaxIters = positiveInt(o.at("max_iters"), "newton.max_iters");
  }
  if (j.contains("bvp")) {
    const auto& o = j.at("bvp");
    rejectUnknown(o, {"tol", "max_iters", "fd_step", "nodes", "neighborhood"}, "bvp.");
    if (o.contains("tol")) c.bvpTol = positive(o.at("tol"), "bvp.tol");
    if (o.contains("max_iters")) c.bvpMaxIters = positiveInt(o.at("max_iters"), "bvp.max_iters");
    if (o.contains("fd_step")) c.bvpFdStep = positive(o.at("fd_step"), "bvp.fd_step");
    if (o.contains("nodes")) c.bvpNodes = positiveInt(o.at("nodes"), "bvp.nodes");
    if (o.contains("neighborhood"))
      c.bvpNeighborhood = positive(o.at("neighborhood"), "bvp.neighborhood");
  }
  if (j.contains("fd")) {
    const auto& o = j.at("fd");
    rejectUnknown(o, {"step_x", "step_frame", "step_hess"}, "fd.");
    if (o.contains("step_x")) c.fdStepX = positive(o.at("step_x"), "fd.step_x");
    if (o.contains("step_frame")) c.fdStepFrame = positive(o.at("step_frame"), "fd.step_frame");
    if (o.contains("step_hess")) c.fdStepHess = positive(o.at("step_hess"), "fd.step_hess");
  }
  if (j.contains("search")) {
    const auto& o = j.at("search");
    rejectUnknown(o, {"count", "seed", "grad_tol", "max_iters", "fd_step", "dedup_tol",
                      "value_tol"},
                  "search.");
    if (o.contains("count")) c.searchCount = positiveInt(o.at("count"), "search.count");
    if (o.contains("seed")) c.searchSeed = o.at("seed").get<std::uint64_t>();
    if (o.contains("grad_tol")) c.searchGradTol = positive(o.at("grad_tol"), "search.grad_tol");
    if (o.contains("max_iters"))
      c.searchMaxIters = positiveInt(o.at("max_iters"), "search.max_iters");
    if (o.contains("fd_step")) c.searchFdStep = positive(o.at("fd_step"), "search.fd_step");
    if (o.contains("dedup_tol")) c.searchDedupTol = positive(o.at("dedup_tol"), "search.dedup_tol");
    if (o.contains("value_tol")) c.searchValueTol = positive(o.at("value_tol"), "search.value_tol");
  }
  if (j.contains("verify")) {
    const auto& o = j.at("verify");
    rejectUnknown(o, {"tol"}, "verify.");
    if (o.contains("tol")) c.verifyTol = positive(o.at("tol"), "verify.tol");
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    rejectUnknown(o, {"report", "networks", "resolution"}, "output.");
    if (o.contains("report")) c.outputReport = o.at("report").get<std::string>();
    if (o.contains("networks")) {
      if (o.at("networks").is_null())
        c.outputNetworks.clear();
      else
        c.outputNetworks = o.at("networks").get<std::string>();
    }
    if (o.contains("resolution"))
      c.outputResolution = positiveInt(o.at("resolution"), "output.resolution");
  }
  return c;
}

RunConfig RunConfig::fromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return fromJson(j);
}

nlohmann::ordered_json RunConfig::toJson() const {
  ordered_json j;
  j["schema"] = "geonet-config/1";
  ordered_json m;
  m["space"] = metric.space;
  m["dim"] = metric.dim;
  m["kind"] = metric.kind;
  m["epsilon"] = metric.epsilon;
  if (metric.kind == "conformal")
    m["poly"] = termListToJson(metric.poly.at(0));
  else if (metric.kind == "bilinear") {
    ordered_json arr = ordered_json::array();
    for (const auto& entry : metric.poly) arr.push_back(termListToJson(entry));
    m["poly"] = std::move(arr);
  }
  j["metric"] = std::move(m);
  j["ode"] = {{"rtol", odeRtol},
              {"atol", odeAtol},
              {"fixed_step", odeFixedStep},
              {"max_step", odeMaxStep},
              {"initial_step", odeInitialStep}};
  j["newton"] = {{"tol", effectiveNewtonTol()}, {"max_iters", newtonMaxIters}};
  j["bvp"] = {{"tol", bvpTol},
              {"max_iters", bvpMaxIters},
              {"fd_step", bvpFdStep},
              {"nodes", bvpNodes},
              {"neighborhood", bvpNeighborhood}};
  j["fd"] = {{"step_x", fdStepX}, {"step_frame", fdStepFrame}, {"step_hess", fdStepHess}};
  j["search"] = {{"count", searchCount},     {"seed", searchSeed},
                 {"grad_tol", searchGradTol}, {"max_iters", searchMaxIters},
                 {"fd_step", searchFdStep},   {"dedup_tol", searchDedupTol},
                 {"value_tol", searchValueTol}};
  j["verify"] = {{"tol", verifyTol}};
  ordered_json out;
  out["report"] = outputReport;
  if (outputNetworks.empty())
    out["networks"] = nullptr;
  else
    out["networks"] = outputNetworks;
  out["resolution"] = outputResolution;
  j["output"] = std::move(out);
  return j;
}

BallMetric RunConfig::ballMetric() const {
  if (metric.space != "ball") throw ConfigError("config selects a sphere metric");
  const int d = metric.dim;
  if (metric.kind == "standard" || metric.epsilon == 0.0) {
    if (metric.kind == "conformal" && !metric.poly.empty())
      return BallMetric::conformal(d, 0.0, Polynomial(d, metric.poly.at(0)));
    return BallMetric::standard(d);
  }
  if (metric.kind == "conformal")
    return BallMetric::conformal(d, metric.epsilon, Polynomial(d, metric.poly.at(0)));
  std::vector<Polynomial> entries;
  entries.reserve(metric.poly.size());
  for (const auto& t : metric.poly) entries.emplace_back(d, t);
  return BallMetric::bilinear(d, metric.epsilon, std::move(entries));
}

SphereMetric RunConfig::sphereMetric() const {
  if (metric.space != "sphere") throw ConfigError("config selects a ball metric");
  const int d = metric.dim;
  if (metric.kind == "standard" || metric.epsilon == 0.0 || metric.poly.empty())
    return SphereMetric::round(d);
  return SphereMetric::conformal(d, metric.epsilon, Polynomial(d + 1, metric.poly.at(0)));
}

ShootOptions RunConfig::shootOptions() const {
  ShootOptions o;
  o.ode.rtol = odeRtol;
  o.ode.atol = odeAtol;
  o.ode.initialStep = odeInitialStep;
  o.ode.maxStep = odeMaxStep;
  o.fixedStep = odeFixedStep;
  o.bvpNodes = bvpNodes;
  o.bvpTol = bvpTol;
  o.bvpMaxIters = bvpMaxIters;
  o.bvpFdStep = bvpFdStep;
  o.epsBall = bvpNeighborhood;
  return o;
}

SearchOptions RunConfig::searchOptions() const {
  SearchOptions o;
  o.count = searchCount;
  o.seed = searchSeed;
  o.gradTol = searchGradTol;
  o.maxIters = searchMaxIters;
  o.fdStep = searchFdStep;
  o.hessStep = fdStepHess;
  o.dedupTol = searchDedupTol;
  o.valueTol = searchValueTol;
  return o;
}

InnerSolveOptions RunConfig::innerBallOptions() const {
  InnerSolveOptions o;
  o.tol = effectiveNewtonTol();
  o.maxIters = newtonMaxIters;
  o.gradStep = fdStepX;
  return o;
}

SphereInnerOptions RunConfig::innerSphereOptions() const {
  SphereInnerOptions o;
  o.tol = effectiveNewtonTol();
  o.maxIters = newtonMaxIters;
  // the default 1e-4 gradient step is kept: the 1e-5 ball step sits at the
  // finite-difference noise floor of the two-point lengths
  return o;
}

}  // namespace geonet
