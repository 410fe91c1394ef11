#include "saussol/ergodic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "saussol/util.hpp"

namespace saussol {

namespace {

constexpr double kOrbitDither = 1e-12;

int findRoot(std::vector<int>& parent, int i) {
  while (parent[static_cast<std::size_t>(i)] != i) {
    parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
    i = parent[static_cast<std::size_t>(i)];
  }
  return i;
}

}  // namespace

SpectralReport lyapunovEstimate(const MapFamily& family, const BaseProcess& process,
                                std::int64_t anchor, const GridFunction& f, long kMax,
                                Backend backend, const LYConstants& constants,
                                const OscParams& oscParams, TransferCache& cache, int threads,
                                long normStride) {
  if (kMax < 1) throw std::invalid_argument("ergodic: kMax must be >= 1");
  if (normStride < 1) normStride = 1;
  SpectralReport rep;
  rep.densityInput = f.v.minCoeff() >= 0.0;
  const auto avg = averageCondition(constants, process, kMax, anchor);
  rep.kappaBound = avg.exact;
  rep.quasiCompact = rep.kappaBound < 0.0;

  const std::vector<int> path = process.window(anchor, 0, kMax - 1);
  GridFunction g = f;
  double logNormHalf = 0.0, logNormFull = 0.0;
  long kHalf = 0;
  for (long k = 1; k <= kMax; ++k) {
    const auto op = cache.get(family.at(path[static_cast<std::size_t>(k - 1)]), g.grid, backend);
    g = op->apply(g, threads);
    if (k % normStride == 0 || k == kMax) {
      const double logNorm = std::log(vAlphaNorm(g, oscParams, threads));
      rep.perK.push_back(logNorm / static_cast<double>(k));
      if (k <= kMax / 2 || kHalf == 0) {
        kHalf = k;
        logNormHalf = logNorm;
      }
      logNormFull = logNorm;
    }
  }
  rep.estimate = rep.perK.back();
  rep.windowSlope =
      kMax > kHalf ? (logNormFull - logNormHalf) / static_cast<double>(kMax - kHalf) : 0.0;
  return rep;
}

SpectralReport kappaBound(const LYConstants& constants, const BaseProcess& process) {
  SpectralReport rep;
  const auto avg = averageCondition(constants, process, 1);
  rep.kappaBound = avg.exact;
  rep.quasiCompact = rep.kappaBound < 0.0;
  return rep;
}

std::vector<GridFunction> initialDensities(GridPtr grid, int partitionPerAxis, int randomBoxes,
                                           std::uint64_t seed) {
  if (partitionPerAxis < 1) throw std::invalid_argument("ergodic: partition must be >= 1");
  const Box& C = grid->domain();
  const int d = C.dim();
  std::vector<GridFunction> out;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    Vector lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
      const double w = (C.hi[k] - C.lo[k]) / partitionPerAxis;
      lo[k] = C.lo[k] + idx[static_cast<std::size_t>(k)] * w;
      hi[k] = lo[k] + w;
    }
    GridFunction f = GridFunction::indicator(grid, Box(lo, hi));
    f.v /= f.integral();
    out.push_back(std::move(f));
    int k = 0;
    for (; k < d; ++k) {
      auto& i = idx[static_cast<std::size_t>(k)];
      if (++i < partitionPerAxis) break;
      i = 0;
    }
    if (k == d) break;
  }
  RandomStream rng(seed);
  for (int r = 0; r < randomBoxes; ++r) {
    Vector lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
      const double w = C.hi[k] - C.lo[k];
      const double center = C.lo[k] + rng.next() * w;
      const double half = (0.1 + 0.2 * rng.next()) * w;
      lo[k] = std::max(C.lo[k], center - half);
      hi[k] = std::min(C.hi[k], center + half);
    }
    GridFunction f = GridFunction::indicator(grid, Box(lo, hi));
    const double mass = f.integral();
    if (mass <= 0.0) continue;
    f.v /= mass;
    out.push_back(std::move(f));
  }
  return out;
}

ErgodicCount countErgodic(const MapFamily& family, const BaseProcess& process,
                          const std::vector<std::int64_t>& anchors,
                          const std::vector<GridFunction>& initials, double clusterTol,
                          const DensityParams& densityParams, const LYConstants& constants,
                          const ThetaParams& thetaParams, const OscParams& oscParams,
                          TransferCache& cache, int threads) {
  if (anchors.empty() || initials.empty())
    throw std::invalid_argument("ergodic: need at least one anchor and one initial density");
  ErgodicCount out;
  int previousCount = -1;
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    std::vector<GridFunction> limits;
    int excluded = 0;
    for (const auto& f0 : initials) {
      DensityRecord rec = invariantDensity(family, process, anchors[a], f0.grid, densityParams,
                                           constants, thetaParams, oscParams, cache, threads, &f0);
      if (rec.converged)
        limits.push_back(std::move(rec.h));
      else
        ++excluded;
    }
    if (limits.empty()) throw std::runtime_error("ergodic: no pull-back run converged");

    const int m = static_cast<int>(limits.size());
    std::vector<std::vector<double>> dist(static_cast<std::size_t>(m),
                                          std::vector<double>(static_cast<std::size_t>(m), 0.0));
    std::vector<int> parent(static_cast<std::size_t>(m));
    std::iota(parent.begin(), parent.end(), 0);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const double dij = limits[static_cast<std::size_t>(i)].l1Diff(limits[static_cast<std::size_t>(j)]);
        dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = dij;
        dist[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = dij;
        if (dij <= clusterTol)  // boundary ties merge (never overcounts)
          parent[static_cast<std::size_t>(findRoot(parent, i))] = findRoot(parent, j);
      }
    std::vector<int> clusterOf(static_cast<std::size_t>(m));
    std::vector<int> roots;
    for (int i = 0; i < m; ++i) {
      const int r = findRoot(parent, i);
      auto it = std::find(roots.begin(), roots.end(), r);
      if (it == roots.end()) {
        roots.push_back(r);
        it = roots.end() - 1;
      }
      clusterOf[static_cast<std::size_t>(i)] = static_cast<int>(it - roots.begin());
    }
    std::vector<GridFunction> reps;
    for (int r : roots) reps.push_back(limits[static_cast<std::size_t>(r)]);

    // a representative that is a convex combination of two others is a
    // mixture of components, not a component of its own
    std::vector<bool> mixture(reps.size(), false);
    for (std::size_t i = 0; i < reps.size(); ++i) {
      for (std::size_t p = 0; p < reps.size() && !mixture[i]; ++p) {
        if (p == i || mixture[p]) continue;
        for (std::size_t q = p + 1; q < reps.size() && !mixture[i]; ++q) {
          if (q == i || mixture[q]) continue;
          double best = std::numeric_limits<double>::infinity();
          for (int l = 0; l <= 100; ++l) {
            const double lam = l / 100.0;
            Eigen::ArrayXd blend =
                reps[i].v - lam * reps[p].v - (1.0 - lam) * reps[q].v;
            best = std::min(best, blend.abs().sum() * reps[i].grid->cellVolume());
          }
          if (best <= clusterTol) mixture[i] = true;
        }
      }
    }
    int components = 0, mixtures = 0;
    std::vector<GridFunction> componentReps;
    for (std::size_t i = 0; i < reps.size(); ++i) {
      if (mixture[i]) {
        ++mixtures;
      } else {
        ++components;
        componentReps.push_back(reps[i]);
      }
    }
    if (previousCount >= 0 && components != previousCount) out.consistentAcrossAnchors = false;
    previousCount = components;
    if (a == 0) {
      out.rEmp = components;
      out.clusterOf = std::move(clusterOf);
      out.dist = std::move(dist);
      out.representatives = std::move(componentReps);
      out.excluded = excluded;
      out.mixtures = mixtures;
    }
  }
  return out;
}

SkewBound skewBound(const MapFamily& family, const BaseProcess& process,
                    const std::vector<std::int64_t>& anchors, const LYConstants& constants,
                    const ThetaParams& thetaParams) {
  if (anchors.empty()) throw std::invalid_argument("ergodic: no anchors for the skew bound");
  const Box& C = family.maps.begin()->second.C;
  const double mC = C.volume();
  if (mC < 1.0)
    throw std::invalid_argument(
        "ergodic: the skew-product counting bound assumes m(C) >= 1; got m(C) = " +
        std::to_string(mC));
  SkewBound out;
  out.gammaN = unitBallVolume(C.dim());
  out.thetaMin = std::numeric_limits<double>::infinity();
  for (const auto anchor : anchors) {
    const ThetaBound tb = thetaBound(constants, process, anchor, thetaParams);
    out.thetaMin = std::min(out.thetaMin, tb.Theta);
  }
  out.bound = (mC / out.gammaN) *
              std::pow(out.thetaMin, static_cast<double>(C.dim()) / constants.alpha);
  return out;
}

std::vector<Observable> standardObservables(const Box& C) {
  std::vector<Observable> out;
  out.push_back({"coord_x", [](const Vector& x) { return x[0]; }});
  Box half = C;
  half.hi = 0.5 * (C.lo + C.hi);
  out.push_back({"indicator_lower_left", [half](const Vector& x) {
                   return half.contains(x) ? 1.0 : 0.0;
                 }});
  out.push_back({"product_xy", [](const Vector& x) {
                   double p = 1.0;
                   for (int k = 0; k < x.size(); ++k) p *= x[k];
                   return p;
                 }});
  return out;
}

PhysicalReport physicalCheck(const MapFamily& family, const BaseProcess& process,
                             std::int64_t anchor, int numX0, std::uint64_t x0Seed,
                             const std::vector<Observable>& observables, long n,
                             const GridFunction& nu, int threads) {
  if (numX0 < 1 || n < 1) throw std::invalid_argument("ergodic: need x0 samples and n >= 1");
  const Box& C = family.maps.begin()->second.C;
  const int d = C.dim();
  const std::size_t nObs = observables.size();

  PhysicalReport rep;
  rep.tol = 5.0 / std::sqrt(static_cast<double>(n));
  for (const auto& obs : observables) rep.observables.push_back(obs.name);

  // space averages against the normalized marginal density
  {
    const Grid& g = *nu.grid;
    const double mass = nu.integral();
    if (mass <= 0.0) throw std::invalid_argument("ergodic: marginal density has no mass");
    for (const auto& obs : observables) {
      double acc = 0.0;
      for (long i = 0; i < g.interiorCount(); ++i) {
        const long idx = g.fromInteriorIndex(i);
        acc += obs.f(g.center(idx)) * nu.v[idx];
      }
      rep.spaceAverages.push_back(acc * g.cellVolume() / mass);
    }
  }

  const std::vector<int> path = process.window(anchor, 0, n - 1);
  for (long c : {100L, 316L, 1000L, 3162L, 10000L, 31623L})
    if (c <= n) rep.checkpoints.push_back(c);
  if (rep.checkpoints.empty() || rep.checkpoints.back() != n) rep.checkpoints.push_back(n);

  const std::size_t nCp = rep.checkpoints.size();
  // sums[x0][checkpoint][obs]
  std::vector<std::vector<std::vector<double>>> avgs(
      static_cast<std::size_t>(numX0),
      std::vector<std::vector<double>>(nCp, std::vector<double>(nObs, 0.0)));

  std::atomic<bool> escaped{false};
  parallelFor(numX0, threads, [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      Vector x(d);
      for (int k = 0; k < d; ++k) {
        const std::uint64_t ctr = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(d) +
                                  static_cast<std::uint64_t>(k);
        x[k] = C.lo[k] + uniform01(keyedCounter(x0Seed, ctr)) * (C.hi[k] - C.lo[k]);
      }
      std::vector<double> sums(nObs, 0.0);
      std::size_t cp = 0;
      for (long k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < nObs; ++j) sums[j] += observables[j].f(x);
        if (cp < nCp && k + 1 == rep.checkpoints[cp]) {
          for (std::size_t j = 0; j < nObs; ++j)
            avgs[static_cast<std::size_t>(i)][cp][j] = sums[j] / static_cast<double>(k + 1);
          ++cp;
        }
        x = family.at(path[static_cast<std::size_t>(k)]).apply(x);
        // tiny deterministic dither keeps binary-expanding orbits off the
        // dyadic lattice that double precision would otherwise collapse to
        for (int a = 0; a < d; ++a) {
          const std::uint64_t ctr =
              ((static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
                static_cast<std::uint64_t>(k)) *
                   static_cast<std::uint64_t>(d) +
               static_cast<std::uint64_t>(a));
          x[a] += (uniform01(keyedCounter(x0Seed ^ 0xd17de5ULL, ctr)) - 0.5) * 2.0 * kOrbitDither;
        }
        if (!C.contains(x, 1e-9)) {
          escaped.store(true);
          return;
        }
        for (int a = 0; a < d; ++a) x[a] = std::clamp(x[a], C.lo[a], C.hi[a]);
      }
    }
  });
  if (escaped.load()) throw std::runtime_error("ergodic: random orbit left the domain C");

  int covered = 0;
  for (int i = 0; i < numX0; ++i) {
    std::vector<double> dev(nObs, 0.0);
    bool ok = true;
    for (std::size_t j = 0; j < nObs; ++j) {
      dev[j] = std::abs(avgs[static_cast<std::size_t>(i)][nCp - 1][j] - rep.spaceAverages[j]);
      if (dev[j] > rep.tol) ok = false;
    }
    rep.deviations.push_back(std::move(dev));
    if (ok) ++covered;
  }
  rep.coverage = static_cast<double>(covered) / numX0;

  for (std::size_t cp = 0; cp < nCp; ++cp) {
    double acc = 0.0;
    for (int i = 0; i < numX0; ++i)
      for (std::size_t j = 0; j < nObs; ++j)
        acc += std::abs(avgs[static_cast<std::size_t>(i)][cp][j] - rep.spaceAverages[j]);
    rep.meanDeviationAtCheckpoint.push_back(acc / (numX0 * static_cast<double>(nObs)));
  }
  // least-squares slope of log deviation vs log n
  if (nCp >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t cp = 0; cp < nCp; ++cp) {
      const double lx = std::log(static_cast<double>(rep.checkpoints[cp]));
      const double ly = std::log(std::max(rep.meanDeviationAtCheckpoint[cp], 1e-300));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double m = static_cast<double>(nCp);
    rep.logLogSlope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return rep;
}

}  // namespace saussol
