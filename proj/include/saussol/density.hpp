#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "saussol/ly.hpp"
#include "saussol/maps.hpp"
#include "saussol/osc.hpp"
#include "saussol/process.hpp"
#include "saussol/transfer.hpp"

namespace saussol {

// Pull-back h_omega^k = L_{sigma^{-1}omega} o ... o L_{sigma^{-k}omega} f0
// along the realized past window at `anchor`; f0 defaults to the constant 1.
GridFunction pullbackDensity(const MapFamily& family, const BaseProcess& process,
                             std::int64_t anchor, long k, Backend backend, TransferCache& cache,
                             GridPtr grid, int threads = 1,
                             const GridFunction* initial = nullptr);

// Arithmetic mean of the first s entries of a pull-back record.
GridFunction cesaro(const std::vector<GridFunction>& pullbacks, long s);

struct ThetaParams {
  double xi = 0.75;         // Theta parameter, must satisfy xiHat < xi < 1, xi > 1/2
  double xiHat = 0.0;       // exp(E log eta) from ly_analysis
  double Dtilde = 0.0;
  double mC = 0.0;
  long scanHorizon = 400;

  void validate() const;
};

struct ThetaBound {
  long j0 = 0;
  bool j0Witnessed = false;
  double theta = 0.0;
  double Theta = 0.0;
};

// Scans the partial products eta^{(j)} = eta(w_{-1})...eta(w_{-j}) along the
// realized past path for the first j beyond which eta^{(j)} < xi^j, then
// theta = max_{1<=j<=j0}(eta^{(j)}/xi^j, 1) and
// Theta = Dtilde m(C) (1 + theta/(1 - xi)).
ThetaBound thetaBound(const LYConstants& constants, const BaseProcess& process,
                      std::int64_t anchor, const ThetaParams& params);

struct DensityParams {
  long sMax = 256;
  double tolL1 = 1e-6;
  Backend backend = Backend::Ulam;
  bool traceAlphaNorms = true;
};

struct DensityRecord {
  std::int64_t anchor = 0;
  std::string backend;
  bool converged = false;
  long sFinal = 0;
  double finalIncrement = 0.0;          // |h^s - h^{floor(s/2)}|_1
  GridFunction h;                        // the limit candidate
  std::vector<double> alphaNormTrace;    // |h^k|_alpha for computed checkpoints
  std::vector<long> traceK;
  double maxAlphaNorm = 0.0;
  ThetaBound theta;
  bool alphaBoundHolds = false;          // max_k |h^k|_alpha <= Theta
};

// Iterates pull-backs until the s vs floor(s/2) L^1 increment drops below
// tolL1 (or sMax); the returned limit candidate is the final pull-back, whose
// convergence is geometric where the Cesaro mean's is only O(1/s). Asserts the
// uniform V_alpha bound against Theta along the way.
DensityRecord invariantDensity(const MapFamily& family, const BaseProcess& process,
                               std::int64_t anchor, GridPtr grid, const DensityParams& params,
                               const LYConstants& constants, const ThetaParams& thetaParams,
                               const OscParams& oscParams, TransferCache& cache, int threads = 1,
                               const GridFunction* initial = nullptr);

// |L_omega h_omega - h_{sigma omega}|_1 with h_{sigma omega} built by the same
// procedure at anchor + 1.
double invarianceResidual(const MapFamily& family, const BaseProcess& process,
                          std::int64_t anchor, const DensityRecord& atAnchor,
                          const DensityRecord& atNext, TransferCache& cache, int threads = 1);

}  // namespace saussol
