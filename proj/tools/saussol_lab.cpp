// saussol_lab: experiment runner for random expanding-on-average piecewise
// maps — PE checks, Lasota-Yorke constants, random invariant densities,
// spectral diagnostics, ergodic component counting, and Birkhoff physicality.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "saussol/config.hpp"
#include "saussol/density.hpp"
#include "saussol/ergodic.hpp"
#include "saussol/ly.hpp"
#include "saussol/maps.hpp"
#include "saussol/osc.hpp"
#include "saussol/process.hpp"
#include "saussol/transfer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace saussol;

namespace {

struct Session {
  ExperimentConfig cfg;
  std::string configPath;
  std::uint64_t seedOverride = 0;
  int threads = 1;
  std::string outDir;

  BaseProcess proc;
  GridPtr grid;
  TransferCache cache;
  std::optional<LYConstants> constants;
  std::vector<std::string> artifacts;

  Session(const std::string& cfgPath, const std::string& outOverride, int nThreads,
          std::uint64_t seed)
      : cfg(loadConfig(cfgPath)),
        configPath(cfgPath),
        seedOverride(seed),
        threads(nThreads),
        proc(cfg.buildProcess(seed)) {
    outDir = outOverride.empty() ? cfg.outputDir : outOverride;
    fs::create_directories(outDir);
    const Box& C = cfg.family.maps.begin()->second.C;
    grid = makeGrid(C, cfg.gridN, cfg.family.epsTilde0());
  }

  const LYConstants& ly() {
    if (!constants) constants = computeLyConstants(cfg.family, cfg.xi);
    return *constants;
  }

  ThetaParams thetaParams() {
    ThetaParams tp;
    tp.xi = cfg.xi;
    tp.xiHat = std::exp(averageCondition(ly(), proc, 64).exact);
    tp.Dtilde = ly().Dtilde;
    tp.mC = cfg.family.maps.begin()->second.C.volume();
    return tp;
  }

  DensityParams densityParams() const {
    DensityParams dp;
    dp.sMax = cfg.sMax;
    dp.tolL1 = cfg.tolL1;
    dp.backend = cfg.backend;
    return dp;
  }

  void writeJson(const json& j, const std::string& name) {
    const std::string path = (fs::path(outDir) / name).string();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
    artifacts.push_back(name);
  }

  void writeCsv(const std::string& name, const std::string& header,
                const std::vector<std::vector<double>>& rows) {
    const std::string path = (fs::path(outDir) / name).string();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << header << "\n";
    out.precision(17);
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << "\n";
    }
    artifacts.push_back(name);
  }

  void writeManifest(const std::string& subcommand) {
    RunManifest m;
    m.subcommand = subcommand;
    m.configPath = fs::absolute(configPath).string();
    m.configHash = configHash(configPath);
    m.seedOverride = seedOverride;
    m.threads = threads;
    m.artifacts = artifacts;
    saveManifest(m, (fs::path(outDir) / "manifest.json").string());
  }
};

json gProfileJson(const GProfile& p) {
  json j;
  j["eps0"] = p.eps0;
  j["S"] = p.S;
  j["s"] = p.s;
  j["ball_radius"] = p.ballRadius;
  j["eps"] = p.eps;
  j["G"] = p.value;
  j["example_bound_cap"] = p.exampleBoundCap;
  return j;
}

bool runCheckPe(Session& ses) {
  json rep;
  rep["name"] = ses.cfg.name;
  bool pass = true;
  for (const auto& [w, map] : ses.cfg.family.maps) {
    json m;
    const double s = map.contractionCoefficient();
    m["label"] = map.label;
    m["s"] = s;
    m["hoelder_c"] = map.hoelderConstant(ses.cfg.family.alpha, ses.cfg.family.eps0);
    const Pe2Result pe2 = map.checkPe2(ses.cfg.family.eps0);
    m["pe2_pass"] = pe2.pass;
    m["pe2_worst_margin"] = pe2.worstMargin;
    const double defect = map.pe4Defect();
    m["pe4_defect"] = defect;
    m["Y"] = map.branchMultiplicity();
    const double lambda = map.lambdaValue(ses.cfg.family.alpha, ses.cfg.family.S);
    m["lambda"] = lambda;
    const bool ok = pe2.pass && std::abs(defect) < 1e-9 && s < 1.0 && lambda < 1.0;
    m["pass"] = ok;
    pass = pass && ok;
    rep["maps"][std::to_string(w)] = std::move(m);
    std::cout << "[check-pe] symbol " << w << ": s=" << s << " lambda=" << lambda << " "
              << (ok ? "pass" : "FAIL") << "\n";
  }
  rep["pass"] = pass;
  ses.writeJson(rep, "check_pe.json");
  return pass;
}

bool runVerifyLySub(Session& ses) {
  const LYConstants& c = ses.ly();
  const OscParams osc = ses.cfg.oscParams();
  json rep;
  rep["name"] = ses.cfg.name;
  rep["alpha"] = c.alpha;
  rep["eps0"] = c.eps0;
  rep["S"] = c.S;
  rep["eps_tilde0"] = c.epsTilde0;
  rep["xi"] = c.xi;
  rep["D_tilde"] = c.Dtilde;
  bool pass = true;
  const std::vector<GridFunction> ensemble = makeTestEnsemble(
      ses.grid, ses.cfg.lyRandomBoxes, ses.cfg.lyTrigSamples, ses.cfg.lyEnsembleSeed);
  for (const auto& [w, map] : ses.cfg.family.maps) {
    json m;
    m["s"] = c.s.at(w);
    m["c"] = c.c.at(w);
    m["zeta"] = c.zeta.at(w);
    m["eta"] = c.eta.at(w);
    m["D"] = c.D.at(w);
    m["lambda"] = c.lambda.at(w);
    m["g_profile"] = gProfileJson(c.profiles.at(w));
    if (ses.cfg.runVerifyLy) {
      const LYVerifyResult v =
          verifyLy(map, c.eta.at(w), c.D.at(w), ensemble, osc, ses.threads);
      m["backend"] = v.backend;
      m["slacks"] = v.slack;
      m["min_slack"] = v.minSlack;
      m["tol_discr"] = v.tolDiscr;
      m["inequality_pass"] = v.pass;
      pass = pass && v.pass;
      std::cout << "[verify-ly] symbol " << w << ": eta=" << c.eta.at(w) << " D=" << c.D.at(w)
                << " min_slack=" << v.minSlack << " " << (v.pass ? "pass" : "FAIL") << "\n";
    }
    rep["maps"][std::to_string(w)] = std::move(m);
  }
  const AverageCondition avg = averageCondition(c, ses.proc, 4096);
  rep["E_log_eta_exact"] = avg.exact;
  rep["E_log_eta_empirical"] = avg.empirical;
  rep["expanding_on_average"] = avg.pass;
  pass = pass && avg.pass;
  std::cout << "[verify-ly] E log eta = " << avg.exact << " ("
            << (avg.pass ? "expanding on average" : "NOT expanding on average") << ")\n";
  rep["pass"] = pass;
  ses.writeJson(rep, "verify_ly.json");
  return pass;
}

bool runBuildDensity(Session& ses) {
  const OscParams osc = ses.cfg.oscParams();
  const ThetaParams tp = ses.thetaParams();
  const DensityParams dp = ses.densityParams();
  json rep;
  rep["name"] = ses.cfg.name;
  rep["xi"] = tp.xi;
  rep["xi_hat"] = tp.xiHat;
  bool pass = true;
  for (const auto anchor : ses.cfg.anchors) {
    DensityRecord rec = invariantDensity(ses.cfg.family, ses.proc, anchor, ses.grid, dp,
                                         ses.ly(), tp, osc, ses.cache, ses.threads);
    DensityRecord next = invariantDensity(ses.cfg.family, ses.proc, anchor + 1, ses.grid, dp,
                                          ses.ly(), tp, osc, ses.cache, ses.threads);
    const double residual =
        invarianceResidual(ses.cfg.family, ses.proc, anchor, rec, next, ses.cache, ses.threads);
    const PositivityBall ball = positivityBall(rec.h, osc, ses.threads);
    json a;
    a["anchor"] = anchor;
    a["backend"] = rec.backend;
    a["converged"] = rec.converged;
    a["s_final"] = rec.sFinal;
    a["final_increment"] = rec.finalIncrement;
    a["theta"] = rec.theta.theta;
    a["Theta"] = rec.theta.Theta;
    a["j0"] = rec.theta.j0;
    a["j0_witnessed"] = rec.theta.j0Witnessed;
    a["max_alpha_norm"] = rec.maxAlphaNorm;
    a["alpha_bound_holds"] = rec.alphaBoundHolds;
    a["invariance_residual"] = residual;
    a["positivity_radius"] = ball.radius;
    a["positivity_inf"] = ball.infValue;
    a["positivity_found"] = ball.found;
    const std::string stem = "density_anchor_" + std::to_string(anchor);
    saveBinary(rec.h, (fs::path(ses.outDir) / (stem + ".bin")).string());
    ses.artifacts.push_back(stem + ".bin");
    std::vector<std::vector<double>> trace;
    for (std::size_t i = 0; i < rec.traceK.size(); ++i)
      trace.push_back({static_cast<double>(rec.traceK[i]), rec.alphaNormTrace[i]});
    ses.writeCsv(stem + "_trace.csv", "k,alpha_norm", trace);
    const bool ok =
        rec.converged && rec.alphaBoundHolds && ball.found && residual <= 2.0 * dp.tolL1 + 1e-12;
    a["pass"] = ok;
    pass = pass && ok;
    rep["anchors"].push_back(std::move(a));
    std::cout << "[build-density] anchor " << anchor << ": s=" << rec.sFinal
              << " increment=" << rec.finalIncrement << " Theta=" << rec.theta.Theta << " "
              << (ok ? "pass" : "FAIL") << "\n";
  }
  rep["pass"] = pass;
  ses.writeJson(rep, "build_density.json");
  return pass;
}

bool runLyapunov(Session& ses) {
  const OscParams osc = ses.cfg.oscParams();
  const double mC = ses.cfg.family.maps.begin()->second.C.volume();
  GridFunction f = GridFunction::constant(ses.grid, 1.0 / mC);
  const SpectralReport density = lyapunovEstimate(
      ses.cfg.family, ses.proc, ses.cfg.anchors.front(), f, ses.cfg.kMax, ses.cfg.backend,
      ses.ly(), osc, ses.cache, ses.threads, ses.cfg.normStride);
  const SpectralReport kappa = kappaBound(ses.ly(), ses.proc);
  json rep;
  rep["name"] = ses.cfg.name;
  rep["per_k"] = density.perK;
  rep["lambda_estimate"] = density.estimate;
  rep["window_slope"] = density.windowSlope;
  rep["kappa_bound"] = kappa.kappaBound;
  rep["quasi_compact"] = kappa.quasiCompact;
  const bool pass = std::abs(density.estimate) <= 0.02 && kappa.kappaBound <= -0.05;
  rep["pass"] = pass;
  ses.writeJson(rep, "lyapunov.json");
  std::cout << "[lyapunov] lambda*=" << density.estimate << " K*<=" << kappa.kappaBound << " "
            << (pass ? "pass" : "FAIL") << "\n";
  return pass;
}

bool runCountErgodic(Session& ses) {
  const OscParams osc = ses.cfg.oscParams();
  const ThetaParams tp = ses.thetaParams();
  const std::vector<GridFunction> initials = initialDensities(
      ses.grid, ses.cfg.partitionPerAxis, ses.cfg.randomBoxes, ses.proc.masterSeed() ^ 0xb0c5ULL);
  const ErgodicCount count =
      countErgodic(ses.cfg.family, ses.proc, ses.cfg.anchors, initials, ses.cfg.clusterTol,
                   ses.densityParams(), ses.ly(), tp, osc, ses.cache, ses.threads);
  const SkewBound bound = skewBound(ses.cfg.family, ses.proc, ses.cfg.anchors, ses.ly(), tp);
  json rep;
  rep["name"] = ses.cfg.name;
  rep["r_emp"] = count.rEmp;
  rep["mixtures"] = count.mixtures;
  rep["excluded"] = count.excluded;
  rep["consistent_across_anchors"] = count.consistentAcrossAnchors;
  rep["skew_bound"] = bound.bound;
  rep["theta_min"] = bound.thetaMin;
  rep["gamma_N"] = bound.gammaN;
  std::vector<std::vector<double>> dist;
  for (const auto& row : count.dist) dist.push_back(row);
  ses.writeCsv("ergodic_distances.csv", "l1_distance_matrix_row_per_limit", dist);
  const bool pass = count.rEmp >= 1 && static_cast<double>(count.rEmp) <= bound.bound &&
                    count.consistentAcrossAnchors;
  rep["pass"] = pass;
  ses.writeJson(rep, "count_ergodic.json");
  std::cout << "[count-ergodic] r_emp=" << count.rEmp << " bound=" << bound.bound << " "
            << (pass ? "pass" : "FAIL") << "\n";
  return pass;
}

bool runPhysical(Session& ses) {
  const OscParams osc = ses.cfg.oscParams();
  const ThetaParams tp = ses.thetaParams();
  const DensityParams dp = ses.densityParams();
  // marginal: omega-average of the computed densities over the anchors
  GridFunction nu = GridFunction::zero(ses.grid);
  for (const auto anchor : ses.cfg.anchors) {
    DensityRecord rec = invariantDensity(ses.cfg.family, ses.proc, anchor, ses.grid, dp,
                                         ses.ly(), tp, osc, ses.cache, ses.threads);
    nu.v += rec.h.v;
  }
  nu.v /= static_cast<double>(ses.cfg.anchors.size());
  const auto observables = standardObservables(ses.cfg.family.maps.begin()->second.C);
  const PhysicalReport rep = physicalCheck(ses.cfg.family, ses.proc, ses.cfg.anchors.front(),
                                           ses.cfg.numX0, ses.proc.masterSeed() ^ 0xf15eULL,
                                           observables, ses.cfg.birkhoffN, nu, ses.threads);
  json j;
  j["name"] = ses.cfg.name;
  j["observables"] = rep.observables;
  j["space_averages"] = rep.spaceAverages;
  j["coverage"] = rep.coverage;
  j["tol"] = rep.tol;
  j["log_log_slope"] = rep.logLogSlope;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rep.checkpoints.size(); ++i)
    rows.push_back({static_cast<double>(rep.checkpoints[i]), rep.meanDeviationAtCheckpoint[i]});
  ses.writeCsv("birkhoff_deviations.csv", "n,mean_abs_deviation", rows);
  const bool pass =
      rep.coverage >= 0.95 && rep.logLogSlope >= -0.6 && rep.logLogSlope <= -0.4;
  j["pass"] = pass;
  ses.writeJson(j, "physical.json");
  std::cout << "[physical] coverage=" << rep.coverage << " slope=" << rep.logLogSlope << " "
            << (pass ? "pass" : "FAIL") << "\n";
  return pass;
}

bool runSubcommand(Session& ses, const std::string& sub) {
  if (sub == "check-pe") return runCheckPe(ses);
  if (sub == "verify-ly") return runVerifyLySub(ses);
  if (sub == "build-density") return runBuildDensity(ses);
  if (sub == "lyapunov") return runLyapunov(ses);
  if (sub == "count-ergodic") return runCountErgodic(ses);
  if (sub == "physical") return runPhysical(ses);
  if (sub == "all") {
    bool pass = runCheckPe(ses);
    pass = runVerifyLySub(ses) && pass;
    pass = runBuildDensity(ses) && pass;
    pass = runLyapunov(ses) && pass;
    pass = runCountErgodic(ses) && pass;
    pass = runPhysical(ses) && pass;
    return pass;
  }
  throw std::invalid_argument("unknown subcommand: " + sub);
}

int runReplay(const std::string& manifestPath, int threads) {
  const RunManifest m = loadManifest(manifestPath);
  const fs::path baseDir = fs::path(manifestPath).parent_path();
  const fs::path tmpDir = baseDir / "replay_tmp";
  fs::create_directories(tmpDir);
  Session ses(m.configPath, tmpDir.string(), threads > 0 ? threads : m.threads, m.seedOverride);
  runSubcommand(ses, m.subcommand);
  ses.writeManifest(m.subcommand);
  bool identical = true;
  for (const auto& rel : m.artifacts) {
    std::ifstream a(baseDir / rel, std::ios::binary);
    std::ifstream b(tmpDir / rel, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    const bool same = a.good() == b.good() && sa == sb && !sa.empty();
    if (!same) {
      identical = false;
      std::cout << "[replay] MISMATCH " << rel << "\n";
    }
  }
  std::cout << "[replay] " << (identical ? "byte-identical" : "DIFFERS") << "\n";
  return identical ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random expanding-on-average map laboratory"};
  app.require_subcommand(1);

  std::string configPath, outDir, manifestPath;
  int threads = 1;
  std::uint64_t seedOverride = 0;

  const std::vector<std::string> subs = {"check-pe",  "verify-ly", "build-density", "lyapunov",
                                         "count-ergodic", "physical", "all"};
  for (const auto& name : subs) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", configPath, "experiment config (JSON)")->required();
    sub->add_option("--out", outDir, "output directory (overrides config)");
    sub->add_option("--threads", threads, "worker threads");
    sub->add_option("--seed-override", seedOverride, "override the process seed");
  }
  auto* replay = app.add_subcommand("replay", "re-run a manifest and diff the artifacts");
  replay->add_option("--manifest", manifestPath, "run manifest")->required();
  replay->add_option("--threads", threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (replay->parsed()) return runReplay(manifestPath, threads);
    const std::string sub = app.get_subcommands().front()->get_name();
    Session ses(configPath, outDir, threads, seedOverride);
    const bool pass = runSubcommand(ses, sub);
    ses.writeManifest(sub);
    std::cout << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
}
