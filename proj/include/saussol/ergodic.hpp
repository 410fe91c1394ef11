#pragma once

#include <functional>
#include <string>
#include <vector>

#include "saussol/density.hpp"
#include "saussol/ly.hpp"
#include "saussol/maps.hpp"
#include "saussol/osc.hpp"
#include "saussol/process.hpp"
#include "saussol/transfer.hpp"

namespace saussol {

struct SpectralReport {
  std::vector<double> perK;      // (1/k) log |L^{(k)}f|_alpha
  double estimate = 0.0;         // value at k_max
  double windowSlope = 0.0;      // log-norm slope over the trailing half window
  double kappaBound = 0.0;       // E log eta
  bool densityInput = false;     // if so the per-k values are >= 0 exactly (ulam)
  bool quasiCompact = false;     // kappaBound < 0
};

// (1/k) log |L^{(k)} f|_alpha along the realized forward path from `anchor`.
SpectralReport lyapunovEstimate(const MapFamily& family, const BaseProcess& process,
                                std::int64_t anchor, const GridFunction& f, long kMax,
                                Backend backend, const LYConstants& constants,
                                const OscParams& oscParams, TransferCache& cache,
                                int threads = 1, long normStride = 1);

// K* upper bound = E log eta; quasi-compactness verdict iff < 0.
SpectralReport kappaBound(const LYConstants& constants, const BaseProcess& process);

struct ErgodicCount {
  int rEmp = 0;
  std::vector<int> clusterOf;              // per converged limit
  std::vector<std::vector<double>> dist;   // pairwise L^1 distances
  std::vector<GridFunction> representatives;  // one per ergodic cluster
  int excluded = 0;                        // non-convergent runs
  int mixtures = 0;                        // clusters recognized as convex combinations
  bool consistentAcrossAnchors = true;
};

// Normalized indicator densities of an equal-box partition of C plus
// deterministic random boxes, the initial bundle for component counting.
std::vector<GridFunction> initialDensities(GridPtr grid, int partitionPerAxis, int randomBoxes,
                                           std::uint64_t seed);

// Pull-back limits from every initial density at every anchor, clustered by
// L^1 distance < clusterTol at the same anchor. Clusters whose representative
// is (within clusterTol) a convex combination of two other representatives
// are counted as mixtures of components, not as components.
ErgodicCount countErgodic(const MapFamily& family, const BaseProcess& process,
                          const std::vector<std::int64_t>& anchors,
                          const std::vector<GridFunction>& initials, double clusterTol,
                          const DensityParams& densityParams, const LYConstants& constants,
                          const ThetaParams& thetaParams, const OscParams& oscParams,
                          TransferCache& cache, int threads = 1);

struct SkewBound {
  double bound = 0.0;
  double thetaMin = 0.0;  // sample minimum of Theta over anchors
  double gammaN = 0.0;
};

// r <= (m(C)/gamma_N) Einf Theta^{N/alpha}, E inf proxied by the sample
// minimum over anchors; requires m(C) >= 1.
SkewBound skewBound(const MapFamily& family, const BaseProcess& process,
                    const std::vector<std::int64_t>& anchors, const LYConstants& constants,
                    const ThetaParams& thetaParams);

struct Observable {
  std::string name;
  std::function<double(const Vector&)> f;
};

// Shipped bundle: first coordinate, indicator of the lower-left half box of C,
// product of the coordinates.
std::vector<Observable> standardObservables(const Box& C);

struct PhysicalReport {
  std::vector<std::string> observables;
  std::vector<double> spaceAverages;
  // deviations[i][j]: |Birkhoff - space| for x0 i, observable j, at full n
  std::vector<std::vector<double>> deviations;
  double coverage = 0.0;  // fraction of x0 with every deviation below tol
  double tol = 0.0;       // 5/sqrt(n)
  std::vector<long> checkpoints;
  std::vector<double> meanDeviationAtCheckpoint;
  double logLogSlope = 0.0;  // slope of log mean deviation vs log n
};

// Birkhoff averages of the observables along exact random orbits from
// uniformly sampled x0, compared with the space averages of the marginal
// density nu (unnormalized; the routine normalizes).
PhysicalReport physicalCheck(const MapFamily& family, const BaseProcess& process,
                             std::int64_t anchor, int numX0, std::uint64_t x0Seed,
                             const std::vector<Observable>& observables, long n,
                             const GridFunction& nu, int threads = 1);

}  // namespace saussol
