#include "saussol/ly.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "saussol/util.hpp"

namespace saussol {

namespace {

constexpr double kSkelTol = 1e-12;

// length of the chord cut from the segment [a,b] (extended by `extend` at both
// ends) by the disk B_R(x)
double chordLength(const Vector& a, const Vector& b, const Vector& x, double R, double extend) {
  Vector u = b - a;
  const double L = u.norm();
  if (L <= 0.0) return 0.0;
  u /= L;
  const Vector a2 = a - extend * u;
  const double L2 = L + 2.0 * extend;
  const Vector w = x - a2;
  const double tMid = w.dot(u);
  const double d2 = w.squaredNorm() - tMid * tMid;
  if (d2 >= R * R) return 0.0;
  const double half = std::sqrt(R * R - d2);
  const double t0 = std::max(0.0, tMid - half);
  const double t1 = std::min(L2, tMid + half);
  return std::max(0.0, t1 - t0);
}

std::optional<Vector> segmentCrossing(const Segment& p, const Segment& q) {
  const Vector r = p.b - p.a;
  const Vector s = q.b - q.a;
  const double denom = r[0] * s[1] - r[1] * s[0];
  if (std::abs(denom) < kSkelTol) return std::nullopt;  // parallel
  const Vector d = q.a - p.a;
  const double t = (d[0] * s[1] - d[1] * s[0]) / denom;
  const double u = (d[0] * r[1] - d[1] * r[0]) / denom;
  if (t < -kSkelTol || t > 1.0 + kSkelTol || u < -kSkelTol || u > 1.0 + kSkelTol)
    return std::nullopt;
  return Vector(p.a + t * r);
}

}  // namespace

double GProfile::supOverEpsAlpha(double alpha) const {
  double best = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (eps[i] > 0.0) best = std::max(best, value[i] / std::pow(eps[i], alpha));
  return best;
}

GProfile gProfile(const SaussolMap& map, double S, double eps0, int ladderSize,
                  double ladderRatio) {
  if (map.C.dim() != 2)
    throw std::invalid_argument("ly: the G-profile geometry is implemented for N = 2");
  if (!(eps0 > 0.0)) throw std::invalid_argument("ly: eps0 must be positive");
  GProfile out;
  out.mapLabel = map.label;
  out.eps0 = eps0;
  out.S = S;
  out.s = map.contractionCoefficient();
  if (!(S > out.s)) throw std::invalid_argument("ly: G-profile requires S > s");
  out.ballRadius = (S - out.s) * eps0;
  out.exampleBoundCap =
      2.0 * map.branchMultiplicity() * unitBallVolume(1) / unitBallVolume(2);

  const auto segs = map.boundarySegments();

  // per-(branch, segment) strip half-width and end extension per unit eps:
  // the eps-collar of an image edge pulls back through A^{-1}
  struct Strip {
    const Segment* seg;
    double widthPerEps;   // full strip width / eps
    double extendPerEps;  // end extension / eps
  };
  std::vector<Strip> strips;
  for (std::size_t i = 0; i < map.branches.size(); ++i) {
    const Branch& br = map.branches[i];
    for (const auto& seg : segs[i]) {
      double perp, par;
      if (br.affine && br.diagonal) {
        const Vector dir = (seg.b - seg.a).cwiseAbs();
        const int axis = dir[0] > dir[1] ? 0 : 1;  // segment direction axis
        par = std::abs(br.Ainv(axis, axis));
        perp = std::abs(br.Ainv(1 - axis, 1 - axis));
      } else {
        perp = par = map.branchContraction(static_cast<int>(i));
      }
      strips.push_back({&seg, 2.0 * perp, par});
    }
  }

  // candidate centers: skeleton endpoints, midpoints, pairwise crossings,
  // plus a coarse lattice over C
  std::vector<Vector> cands;
  std::vector<const Segment*> flat;
  for (const auto& group : segs)
    for (const auto& seg : group) flat.push_back(&seg);
  for (const auto* seg : flat) {
    cands.push_back(seg->a);
    cands.push_back(seg->b);
    cands.push_back(0.5 * (seg->a + seg->b));
  }
  for (std::size_t i = 0; i < flat.size(); ++i)
    for (std::size_t j = i + 1; j < flat.size(); ++j)
      if (auto p = segmentCrossing(*flat[i], *flat[j])) cands.push_back(*p);
  const int lat = 33;
  for (int i = 0; i < lat; ++i)
    for (int j = 0; j < lat; ++j) {
      Vector p(2);
      p[0] = map.C.lo[0] + (map.C.hi[0] - map.C.lo[0]) * i / (lat - 1);
      p[1] = map.C.lo[1] + (map.C.hi[1] - map.C.lo[1]) * j / (lat - 1);
      cands.push_back(p);
    }
  cands.erase(std::remove_if(cands.begin(), cands.end(),
                             [&](const Vector& p) { return !map.C.contains(p, kSkelTol); }),
              cands.end());

  const double R = out.ballRadius;
  const double ballArea = unitBallVolume(2) * R * R;
  double eps = eps0;
  for (int k = 0; k < ladderSize; ++k, eps *= ladderRatio) {
    double sup = 0.0;
    for (const auto& x : cands) {
      double mass = 0.0;
      for (const auto& st : strips)
        mass += st.widthPerEps * eps *
                chordLength(st.seg->a, st.seg->b, x, R, st.extendPerEps * eps);
      sup = std::max(sup, mass / ballArea);
    }
    out.eps.push_back(eps);
    out.value.push_back(sup);
  }
  return out;
}

double zetaValue(double s, double alpha, double S, double eps0, const GProfile& profile) {
  return std::pow(s, alpha) +
         2.0 * profile.supOverEpsAlpha(alpha) * std::pow(S * eps0, alpha);
}

EtaD etaD(double s, double alpha, double eps0, double c, double zeta, const GProfile& profile) {
  const double factor = 1.0 + c * std::pow(s, alpha) * std::pow(eps0, alpha);
  EtaD out;
  out.eta = factor * zeta;
  out.D = c * std::pow(s, alpha) + 2.0 * factor * profile.supOverEpsAlpha(alpha);
  return out;
}

double uniformD(const std::vector<double>& Ds, double xi, double epsTilde0, double alpha) {
  if (Ds.empty()) throw std::invalid_argument("ly: no per-symbol D values");
  const double floor = xi * std::pow(epsTilde0, -alpha);
  return std::max(*std::max_element(Ds.begin(), Ds.end()), floor);
}

LYConstants computeLyConstants(const MapFamily& family, double xi) {
  if (!(xi > 0.5 && xi < 1.0))
    throw std::invalid_argument("ly: xi must lie in (1/2, 1)");
  LYConstants out;
  out.alpha = family.alpha;
  out.eps0 = family.eps0;
  out.S = family.S;
  out.epsTilde0 = family.epsTilde0();
  out.xi = xi;
  std::vector<double> Ds;
  for (const auto& [w, map] : family.maps) {
    const double s = map.contractionCoefficient();
    const double c = map.hoelderConstant(family.alpha, family.eps0);
    GProfile prof = gProfile(map, family.S, family.eps0);
    const double zeta = zetaValue(s, family.alpha, family.S, family.eps0, prof);
    const EtaD ed = etaD(s, family.alpha, family.eps0, c, zeta, prof);
    if (!(zeta >= std::pow(s, family.alpha) - 1e-15) || !(ed.eta >= zeta - 1e-15) ||
        !(ed.D > 0.0))
      throw std::logic_error("ly: constant invariants violated (formula bug)");
    out.s[w] = s;
    out.c[w] = c;
    out.zeta[w] = zeta;
    out.eta[w] = ed.eta;
    out.D[w] = ed.D;
    out.lambda[w] = map.lambdaValue(family.alpha, family.S);
    out.profiles.emplace(w, std::move(prof));
    Ds.push_back(ed.D);
  }
  out.Dtilde = uniformD(Ds, xi, out.epsTilde0, out.alpha);
  return out;
}

std::vector<double> LYConstants::etaVector() const {
  std::vector<double> out;
  out.reserve(eta.size());
  for (const auto& [w, e] : eta) out.push_back(e);
  return out;
}

LYVerifyResult verifyLy(const SaussolMap& map, double eta, double D,
                        const std::vector<GridFunction>& ensemble, const OscParams& params,
                        int threads) {
  if (ensemble.empty()) throw std::invalid_argument("ly: empty ensemble");
  LYVerifyResult out;
  out.backend = backendName(Backend::BranchSum);
  out.eta = eta;
  out.D = D;
  const GridPtr grid = ensemble.front().grid;
  const TransferOperator bs(map, grid, Backend::BranchSum);

  // calibration: branch-sum vs ulam V_alpha discrepancy on a small set
  {
    const TransferOperator ul(map, grid, Backend::Ulam);
    std::vector<GridFunction> calib;
    calib.push_back(GridFunction::constant(grid, 1.0));
    calib.push_back(ensemble.front());
    if (ensemble.size() > 1) calib.push_back(ensemble.back());
    double worst = 0.0;
    for (const auto& f : calib) {
      GridFunction a = bs.apply(f, threads);
      GridFunction b = ul.apply(f, threads);
      a.v -= b.v;
      worst = std::max(worst, vAlphaNorm(a, params, threads));
    }
    out.tolDiscr = 2.0 * worst;
  }

  out.minSlack = std::numeric_limits<double>::infinity();
  for (const auto& f : ensemble) {
    const GridFunction lf = bs.apply(f, threads);
    const double lhs = vAlphaNorm(lf, params, threads);
    const double rhs = eta * vAlphaNorm(f, params, threads) + D * f.l1();
    out.lhs.push_back(lhs);
    out.rhs.push_back(rhs);
    out.slack.push_back(rhs - lhs);
    out.minSlack = std::min(out.minSlack, rhs - lhs);
  }
  out.pass = out.minSlack >= -out.tolDiscr;
  return out;
}

std::vector<GridFunction> makeTestEnsemble(GridPtr grid, int randomBoxes, int trigSamples,
                                           std::uint64_t seed) {
  const Box& C = grid->domain();
  const int d = C.dim();
  std::vector<GridFunction> out;
  out.push_back(GridFunction::constant(grid, 1.0));
  for (int axis = 0; axis < d; ++axis) {
    Box half = C;
    half.hi[axis] = 0.5 * (C.lo[axis] + C.hi[axis]);
    out.push_back(GridFunction::indicator(grid, half));
  }
  Box quadrant = C;
  quadrant.hi = 0.5 * (C.lo + C.hi);
  out.push_back(GridFunction::indicator(grid, quadrant));
  RandomStream rng(seed);
  for (int r = 0; r < randomBoxes; ++r) {
    Vector lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
      const double a = C.lo[k] + rng.next() * (C.hi[k] - C.lo[k]);
      const double b = C.lo[k] + rng.next() * (C.hi[k] - C.lo[k]);
      lo[k] = std::min(a, b);
      hi[k] = std::max(a, b);
    }
    GridFunction f = GridFunction::indicator(grid, Box(lo, hi));
    // a box thinner than a cell can miss every center; fall back to the quadrant
    if (f.l1() <= 0.0) f = GridFunction::indicator(grid, quadrant);
    out.push_back(std::move(f));
  }
  for (int t = 0; t < trigSamples; ++t) {
    Vector k(d);
    for (int j = 0; j < d; ++j) k[j] = std::floor(rng.next() * 4.0) + 1.0;
    const double phase = rng.next();
    const double amp = 0.25 + 0.5 * rng.next();
    out.push_back(GridFunction::sample(grid, [k, phase, amp](const Vector& x) {
      return 1.0 + amp * std::sin(2.0 * M_PI * (k.dot(x) + phase));
    }));
  }
  return out;
}

AverageCondition averageCondition(const LYConstants& constants, const BaseProcess& process,
                                  std::int64_t n, std::int64_t anchor) {
  const auto avg = process.logAverage(constants.etaVector(), n, anchor);
  AverageCondition out;
  out.exact = avg.exact;
  out.empirical = avg.empirical;
  out.pass = out.exact < 0.0;
  return out;
}

}  // namespace saussol
