#include "saussol/density.hpp"

#include <cmath>
#include <stdexcept>

namespace saussol {

GridFunction pullbackDensity(const MapFamily& family, const BaseProcess& process,
                             std::int64_t anchor, long k, Backend backend, TransferCache& cache,
                             GridPtr grid, int threads, const GridFunction* initial) {
  if (k < 0) throw std::invalid_argument("density: pull-back length must be >= 0");
  GridFunction f = initial ? *initial : GridFunction::constant(grid, 1.0);
  if (!f.grid->sameLayout(*grid))
    throw std::invalid_argument("density: initial function grid mismatch");
  if (k == 0) return f;
  // window(anchor, -k, -1) lists the past symbols innermost first, which is
  // exactly the application order of the composition
  const std::vector<int> path = process.window(anchor, -k, -1);
  return cocycleApply(family, path, f, backend, cache, threads).result;
}

GridFunction cesaro(const std::vector<GridFunction>& pullbacks, long s) {
  if (s < 1 || s > static_cast<long>(pullbacks.size()))
    throw std::invalid_argument("density: Cesaro length out of range");
  GridFunction out = pullbacks.front();
  for (long k = 1; k < s; ++k) out.v += pullbacks[static_cast<std::size_t>(k)].v;
  out.v /= static_cast<double>(s);
  return out;
}

void ThetaParams::validate() const {
  if (!(xi > 0.5 && xi < 1.0))
    throw std::invalid_argument("density: xi must lie in (1/2, 1)");
  if (xiHat > 0.0 && !(xiHat < xi))
    throw std::invalid_argument("density: need xiHat = exp(E log eta) < xi");
  if (!(Dtilde > 0.0)) throw std::invalid_argument("density: Dtilde must be positive");
  if (!(mC > 0.0)) throw std::invalid_argument("density: m(C) must be positive");
  if (scanHorizon < 1) throw std::invalid_argument("density: empty scan horizon");
}

ThetaBound thetaBound(const LYConstants& constants, const BaseProcess& process,
                      std::int64_t anchor, const ThetaParams& params) {
  params.validate();
  ThetaBound out;
  double partial = 1.0;  // eta^{(j)} along the realized past path
  double xiPow = 1.0;
  long lastViolation = 0;
  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(params.scanHorizon));
  for (long j = 1; j <= params.scanHorizon; ++j) {
    const int w = process.symbolAt(anchor - j);
    partial *= constants.eta.at(w);
    xiPow *= params.xi;
    const double ratio = partial / xiPow;
    ratios.push_back(ratio);
    if (ratio >= 1.0) lastViolation = j;
  }
  out.j0 = lastViolation + 1;
  // witnessed only if a clean tail of strict decay follows the last violation
  out.j0Witnessed = lastViolation <= params.scanHorizon - 20;
  out.theta = 1.0;
  for (long j = 1; j <= out.j0 && j <= params.scanHorizon; ++j)
    out.theta = std::max(out.theta, ratios[static_cast<std::size_t>(j - 1)]);
  out.Theta = params.Dtilde * params.mC * (1.0 + out.theta / (1.0 - params.xi));
  return out;
}

DensityRecord invariantDensity(const MapFamily& family, const BaseProcess& process,
                               std::int64_t anchor, GridPtr grid, const DensityParams& params,
                               const LYConstants& constants, const ThetaParams& thetaParams,
                               const OscParams& oscParams, TransferCache& cache, int threads,
                               const GridFunction* initial) {
  if (params.sMax < 2) throw std::invalid_argument("density: sMax must be >= 2");
  DensityRecord rec;
  rec.anchor = anchor;
  rec.backend = backendName(params.backend);
  rec.theta = thetaBound(constants, process, anchor, thetaParams);

  auto record = [&](long k, const GridFunction& h) {
    if (!params.traceAlphaNorms) return;
    rec.traceK.push_back(k);
    const double norm = vAlphaNorm(h, oscParams, threads);
    rec.alphaNormTrace.push_back(norm);
    rec.maxAlphaNorm = std::max(rec.maxAlphaNorm, norm);
  };

  GridFunction half =
      pullbackDensity(family, process, anchor, 1, params.backend, cache, grid, threads, initial);
  record(1, half);
  long sHalf = 1;
  for (long s = 2; s <= params.sMax; s *= 2) {
    GridFunction h =
        pullbackDensity(family, process, anchor, s, params.backend, cache, grid, threads, initial);
    record(s, h);
    rec.sFinal = s;
    rec.finalIncrement = h.l1Diff(half);
    if (rec.finalIncrement < params.tolL1) {
      rec.converged = true;
      rec.h = std::move(h);
      break;
    }
    half = std::move(h);
    sHalf = s;
  }
  if (!rec.converged) {
    // non-convergence is reported, not swallowed: the last iterate is kept as
    // the (inconclusive) candidate
    rec.h = std::move(half);
    rec.sFinal = sHalf;
  }
  rec.alphaBoundHolds = rec.maxAlphaNorm <= rec.theta.Theta * (1.0 + 1e-12);
  return rec;
}

double invarianceResidual(const MapFamily& family, const BaseProcess& process,
                          std::int64_t anchor, const DensityRecord& atAnchor,
                          const DensityRecord& atNext, TransferCache& cache, int threads) {
  const int w = process.symbolAt(anchor);
  const Backend backend =
      atAnchor.backend == backendName(Backend::Ulam) ? Backend::Ulam : Backend::BranchSum;
  const auto op = cache.get(family.at(w), atAnchor.h.grid, backend);
  return op->apply(atAnchor.h, threads).l1Diff(atNext.h);
}

}  // namespace saussol
