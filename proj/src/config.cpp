#include "saussol/config.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "saussol/util.hpp"

namespace saussol {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + path + ": " + what);
}

json loadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }
  return j;
}

Vector toVector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of numbers");
  Vector v(static_cast<long>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(where, "expected a number");
    v[static_cast<long>(i)] = j[i].get<double>();
  }
  return v;
}

MapFamily parseCustomFamily(const json& fam) {
  MapFamily out;
  out.alpha = fam.value("alpha", 0.5);
  if (!fam.contains("eps0")) fail("family.eps0", "missing");
  out.eps0 = fam.at("eps0").get<double>();
  if (!fam.contains("S")) fail("family.S", "missing");
  out.S = fam.at("S").get<double>();
  if (!fam.contains("maps") || !fam.at("maps").is_object()) fail("family.maps", "missing");
  if (!fam.contains("domain")) fail("family.domain", "missing [lo, hi] box");
  const Box C(toVector(fam.at("domain")[0], "family.domain[0]"),
              toVector(fam.at("domain")[1], "family.domain[1]"));
  for (const auto& [key, branches] : fam.at("maps").items()) {
    SaussolMap map;
    map.label = fam.value("label", std::string("custom")) + ":" + key;
    map.C = C;
    if (!branches.is_array() || branches.empty()) fail("family.maps." + key, "expected branches");
    for (std::size_t i = 0; i < branches.size(); ++i) {
      const auto& br = branches[i];
      const std::string where = "family.maps." + key + "[" + std::to_string(i) + "]";
      if (!br.contains("domain") || !br.contains("matrix") || !br.contains("offset"))
        fail(where, "branch needs domain, matrix, offset");
      const Box dom(toVector(br.at("domain")[0], where + ".domain[0]"),
                    toVector(br.at("domain")[1], where + ".domain[1]"));
      const auto& rows = br.at("matrix");
      Matrix A(static_cast<long>(rows.size()), static_cast<long>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const Vector row = toVector(rows[r], where + ".matrix");
        if (row.size() != A.cols()) fail(where + ".matrix", "ragged rows");
        A.row(static_cast<long>(r)) = row.transpose();
      }
      const Vector b = toVector(br.at("offset"), where + ".offset");
      Box ext = br.contains("ext")
                    ? Box(toVector(br.at("ext")[0], where + ".ext[0]"),
                          toVector(br.at("ext")[1], where + ".ext[1]"))
                    : dom.inflated(2.0 * out.eps0);
      map.branches.push_back(Branch::makeAffine(dom, std::move(ext), A, b));
    }
    out.maps.emplace(std::stoi(key), std::move(map));
  }
  out.validate();
  return out;
}

}  // namespace

OscParams ExperimentConfig::oscParams() const {
  OscParams p;
  p.alpha = family.alpha;
  p.epsTilde0 = family.epsTilde0();
  p.ladderSize = ladderSize;
  p.ladderRatio = ladderRatio;
  p.validate();
  return p;
}

BaseProcess ExperimentConfig::buildProcess(std::uint64_t seedOverride) const {
  const std::uint64_t seed = seedOverride ? seedOverride : process.seed;
  if (process.kind == "iid") {
    Eigen::VectorXd p(static_cast<long>(process.probabilities.size()));
    for (std::size_t i = 0; i < process.probabilities.size(); ++i)
      p[static_cast<long>(i)] = process.probabilities[i];
    return BaseProcess::iid(std::move(p), seed);
  }
  const long n = static_cast<long>(process.transition.size());
  Eigen::MatrixXd P(n, n);
  for (long i = 0; i < n; ++i) {
    if (static_cast<long>(process.transition[static_cast<std::size_t>(i)].size()) != n)
      throw std::invalid_argument("config: process.transition: not square");
    for (long j = 0; j < n; ++j)
      P(i, j) = process.transition[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return BaseProcess::markov(std::move(P), seed);
}

ExperimentConfig loadConfig(const std::string& path) {
  const json j = loadJson(path);
  ExperimentConfig c;
  c.name = j.value("name", std::string("unnamed"));

  if (!j.contains("family")) fail("family", "missing");
  const auto& fam = j.at("family");
  if (fam.contains("builtin")) {
    c.familyBuiltin = fam.at("builtin").get<std::string>();
    c.family = builtinFamily(c.familyBuiltin);
    if (fam.contains("alpha")) c.family.alpha = fam.at("alpha").get<double>();
    if (fam.contains("eps0")) c.family.eps0 = fam.at("eps0").get<double>();
    if (fam.contains("S")) c.family.S = fam.at("S").get<double>();
    c.family.validate();
  } else {
    c.family = parseCustomFamily(fam);
  }

  if (j.contains("process")) {
    const auto& pr = j.at("process");
    c.process.kind = pr.value("kind", std::string("iid"));
    if (c.process.kind != "iid" && c.process.kind != "markov")
      fail("process.kind", "must be \"iid\" or \"markov\"");
    if (pr.contains("probabilities"))
      c.process.probabilities = pr.at("probabilities").get<std::vector<double>>();
    if (pr.contains("transition"))
      c.process.transition = pr.at("transition").get<std::vector<std::vector<double>>>();
    if (c.process.kind == "markov" && c.process.transition.empty())
      fail("process.transition", "required for a markov process");
    c.process.seed = pr.value("seed", std::uint64_t{1});
  }
  if (c.process.kind == "iid" &&
      static_cast<int>(c.process.probabilities.size()) != static_cast<int>(c.family.maps.size()))
    fail("process.probabilities", "length must match the number of symbols");

  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    c.gridN = g.value("n", 128);
    if (c.gridN < 4 || c.gridN > 4096) fail("grid.n", "out of range [4, 4096]");
    const std::string b = g.value("backend", std::string("ulam"));
    if (b == "ulam")
      c.backend = Backend::Ulam;
    else if (b == "branch-sum")
      c.backend = Backend::BranchSum;
    else
      fail("grid.backend", "must be \"ulam\" or \"branch-sum\"");
  }

  if (j.contains("osc")) {
    const auto& o = j.at("osc");
    c.ladderSize = o.value("ladder_size", 16);
    c.ladderRatio = o.value("ladder_ratio", 0.75);
    if (c.ladderSize < 2 || c.ladderSize > 64) fail("osc.ladder_size", "out of range [2, 64]");
    if (!(c.ladderRatio > 0.0 && c.ladderRatio < 1.0)) fail("osc.ladder_ratio", "needs (0,1)");
  }

  if (j.contains("ly")) {
    const auto& l = j.at("ly");
    c.lyRandomBoxes = l.value("random_boxes", 30);
    c.lyTrigSamples = l.value("trig_samples", 20);
    c.lyEnsembleSeed = l.value("ensemble_seed", std::uint64_t{7});
    c.xi = l.value("xi", 0.75);
    c.runVerifyLy = l.value("run_verify", true);
    if (!(c.xi > 0.5 && c.xi < 1.0)) fail("ly.xi", "needs (1/2, 1)");
  }

  if (j.contains("density")) {
    const auto& d = j.at("density");
    c.sMax = d.value("s_max", 256L);
    c.tolL1 = d.value("tol_l1", 1e-6);
    if (c.sMax < 2) fail("density.s_max", "needs >= 2");
    if (!(c.tolL1 > 0.0)) fail("density.tol_l1", "needs > 0");
  }

  if (j.contains("analysis")) {
    const auto& a = j.at("analysis");
    if (a.contains("anchors")) c.anchors = a.at("anchors").get<std::vector<std::int64_t>>();
    if (c.anchors.empty()) fail("analysis.anchors", "needs at least one anchor");
    c.kMax = a.value("k_max", 200L);
    c.normStride = a.value("norm_stride", 10L);
    c.clusterTol = a.value("cluster_tol", 0.05);
    c.partitionPerAxis = a.value("partition_per_axis", 2);
    c.randomBoxes = a.value("random_boxes", 4);
    c.numX0 = a.value("num_x0", 100);
    c.birkhoffN = a.value("birkhoff_n", 10000L);
    if (c.kMax < 1) fail("analysis.k_max", "needs >= 1");
    if (!(c.clusterTol > 0.0)) fail("analysis.cluster_tol", "needs > 0");
    if (c.numX0 < 1) fail("analysis.num_x0", "needs >= 1");
    if (c.birkhoffN < 1) fail("analysis.birkhoff_n", "needs >= 1");
  }

  if (j.contains("output")) c.outputDir = j.at("output").value("dir", std::string("out"));
  return c;
}

std::uint64_t configHash(const std::string& path) {
  return fnv1a64(loadJson(path).dump());
}

void saveManifest(const RunManifest& m, const std::string& path) {
  json j;
  j["subcommand"] = m.subcommand;
  j["config"] = m.configPath;
  j["config_hash"] = m.configHash;
  j["seed_override"] = m.seedOverride;
  j["threads"] = m.threads;
  j["artifacts"] = m.artifacts;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write manifest " + path);
  out << j.dump(2) << "\n";
}

RunManifest loadManifest(const std::string& path) {
  const json j = loadJson(path);
  RunManifest m;
  m.subcommand = j.at("subcommand").get<std::string>();
  m.configPath = j.at("config").get<std::string>();
  m.configHash = j.at("config_hash").get<std::uint64_t>();
  m.seedOverride = j.value("seed_override", std::uint64_t{0});
  m.threads = j.value("threads", 1);
  m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
  return m;
}

}  // namespace saussol
