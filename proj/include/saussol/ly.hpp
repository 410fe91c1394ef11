#pragma once

#include <map>
#include <string>
#include <vector>

#include "saussol/maps.hpp"
#include "saussol/osc.hpp"
#include "saussol/process.hpp"
#include "saussol/transfer.hpp"

namespace saussol {

// Collar-ratio profile G_{eps0}(eps) = sup_x sum_i m(T_i^{-1}B_eps(bd T U_i)
// cap B_R(x)) / m(B_R(x)) with R = (S - s) eps0, over a decreasing eps ladder
// with top eps0.
struct GProfile {
  std::string mapLabel;
  double eps0 = 0.0;
  double S = 0.0;
  double s = 0.0;          // contraction coefficient of the map
  double ballRadius = 0.0; // R = (S - s) eps0
  std::vector<double> eps;
  std::vector<double> value;

  double supOverEpsAlpha(double alpha) const;  // sup of G(eps)/eps^alpha
  // Example bound cap 2 Y (gamma_{N-1}/gamma_N) for the ratio G(eps)/(s eps / R).
  double exampleBoundCap = 0.0;
};

// Exact segment-chord geometry for polytopal partitions in N = 2: the collar
// around each branch-boundary segment pulls back to a strip of width
// 2 eps s_perp whose mass inside B_R(x) is the strip width times the chord
// length; the sup over x is searched on the partition skeleton (endpoints,
// crossings, midpoints) plus a coarse grid.
GProfile gProfile(const SaussolMap& map, double S, double eps0, int ladderSize = 16,
                  double ladderRatio = 0.75);

double zetaValue(double s, double alpha, double S, double eps0, const GProfile& profile);

struct EtaD {
  double eta = 0.0;
  double D = 0.0;
};
EtaD etaD(double s, double alpha, double eps0, double c, double zeta, const GProfile& profile);

// Dtilde = max(max over symbols of D, xi * epsTilde0^{-alpha}).
double uniformD(const std::vector<double>& Ds, double xi, double epsTilde0, double alpha);

// All LY ingredients of a family at its shipped (alpha, eps0, S).
struct LYConstants {
  double alpha = 0.0, eps0 = 0.0, S = 0.0, epsTilde0 = 0.0, xi = 0.0;
  std::map<int, GProfile> profiles;
  std::map<int, double> s, c, zeta, eta, D, lambda;
  double Dtilde = 0.0;

  std::vector<double> etaVector() const;  // indexed by symbol order
};
LYConstants computeLyConstants(const MapFamily& family, double xi);

struct LYVerifyResult {
  std::string backend;
  double eta = 0.0, D = 0.0;
  std::vector<double> lhs, rhs, slack;
  double minSlack = 0.0;
  double tolDiscr = 0.0;
  bool pass = false;
};

// Checks |L f|_alpha <= eta |f|_alpha + D |f|_1 with the branch-sum backend on
// every ensemble member; tol_discr is 2x the measured branch-sum/ulam
// discrepancy (V_alpha norm) on a small calibration set.
LYVerifyResult verifyLy(const SaussolMap& map, double eta, double D,
                        const std::vector<GridFunction>& ensemble, const OscParams& params,
                        int threads = 1);

// Test ensemble for the inequality: canonical indicators (C itself, half
// boxes, a quadrant), deterministic random boxes, and smooth trigonometric
// samples 1 + a sin(2 pi (k . x + phase)).
std::vector<GridFunction> makeTestEnsemble(GridPtr grid, int randomBoxes, int trigSamples,
                                           std::uint64_t seed);

struct AverageCondition {
  double exact = 0.0;      // E log eta under the stationary law
  double empirical = 0.0;  // path average
  bool pass = false;       // exact < 0
};
AverageCondition averageCondition(const LYConstants& constants, const BaseProcess& process,
                                  std::int64_t n, std::int64_t anchor = 0);

}  // namespace saussol
