#pragma once

#include <optional>
#include <vector>

#include "saussol/grid.hpp"

namespace saussol {

// Parameters of the bounded-oscillation norm: exponent alpha, norm radius
// epsTilde0, and the geometric radius ladder discretizing sup over
// (0, epsTilde0].
struct OscParams {
  double alpha = 0.5;
  double epsTilde0 = 0.02;
  int ladderSize = 16;
  double ladderRatio = 0.75;

  std::vector<double> ladder() const;  // decreasing, ladder[0] == epsTilde0
  void validate() const;
};

// Euclidean-ball stencil on a grid: the set of cell offsets whose centers lie
// within `radius` of the stencil origin, stored as contiguous spans along the
// last axis so sliding-window extrema apply.
class Stencil {
 public:
  struct Span {
    IVector prefix;  // offsets on all axes except the last
    int lo, hi;      // inclusive offset range on the last axis
  };

  static Stencil make(const Grid& g, double radius);

  double radius() const { return radius_; }
  const std::vector<Span>& spans() const { return spans_; }
  // All offsets, flattened (for direct loops and the positivity search).
  std::vector<IVector> offsets() const;

 private:
  double radius_ = 0.0;
  std::vector<Span> spans_;
};

// x -> osc(f, B_eps(x)) = max - min of cell values over the stencil, with the
// zero extension outside the padded lattice.
GridFunction oscField(const GridFunction& f, double eps, int threads = 1);

double alphaSeminorm(const GridFunction& f, const OscParams& p, int threads = 1);
double vAlphaNorm(const GridFunction& f, const OscParams& p, int threads = 1);

struct PositivityBall {
  double radius = 0.0;
  Vector center;
  double infValue = 0.0;
  bool found = false;
};

// Lemma-style positivity ball: radius min(epsTilde0, (∫h / |h|_alpha)^{1/alpha}),
// then a search over cell centers for a ball of that radius on which h stays
// positive. Throws if h is negative somewhere or identically zero.
PositivityBall positivityBall(const GridFunction& h, const OscParams& p, int threads = 1);

struct Prop32Report {
  double subadditivityViolation = 0.0;   // (i)
  double cutoffViolation = 0.0;          // (ii)
  double productViolation = 0.0;         // (iii)
  double averagingViolation = 0.0;       // (iv)
  double maxViolation() const;
};

// Verifies the four oscillation-calculus properties on grid realizations.
// K is a cell mask over the padded lattice; g must be positive on its support
// for (iii); requires a + b <= c for (iv).
Prop32Report prop32Suite(const GridFunction& f, const GridFunction& g,
                         const std::vector<char>& kMask, double a, double b, double c);

}  // namespace saussol
