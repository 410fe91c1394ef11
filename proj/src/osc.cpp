#include "saussol/osc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "saussol/util.hpp"

namespace saussol {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<double> OscParams::ladder() const {
  validate();
  std::vector<double> eps(static_cast<std::size_t>(ladderSize));
  double e = epsTilde0;
  for (auto& x : eps) {
    x = e;
    e *= ladderRatio;
  }
  return eps;
}

void OscParams::validate() const {
  if (alpha <= 0.0 || alpha > 1.0) throw std::invalid_argument("osc: alpha must be in (0,1]");
  if (epsTilde0 <= 0.0) throw std::invalid_argument("osc: epsTilde0 must be positive");
  if (ladderSize < 8) throw std::invalid_argument("osc: ladder needs at least 8 radii");
  if (ladderRatio <= 0.0 || ladderRatio >= 1.0) throw std::invalid_argument("osc: ladder ratio in (0,1)");
}

Stencil Stencil::make(const Grid& g, double radius) {
  Stencil s;
  s.radius_ = radius;
  const int dim = g.dim();
  const Vector w = g.cellWidths();
  IVector reach(dim);
  for (int d = 0; d < dim; ++d) reach[d] = static_cast<int>(std::floor(radius / w[d]));

  // Enumerate prefix offsets over all axes but the last; the admissible span
  // on the last axis is then a contiguous interval.
  IVector dp = IVector::Zero(dim > 1 ? dim - 1 : 0);
  for (int d = 0; d < dp.size(); ++d) dp[d] = -reach[d];
  const double r2 = radius * radius;
  while (true) {
    double prefixNorm2 = 0.0;
    for (int d = 0; d < dp.size(); ++d) prefixNorm2 += dp[d] * w[d] * dp[d] * w[d];
    if (prefixNorm2 <= r2) {
      const double rem = std::sqrt(r2 - prefixNorm2);
      const int span = static_cast<int>(std::floor(rem / w[dim - 1]));
      s.spans_.push_back({dp, -span, span});
    }
    // advance odometer
    int d = 0;
    for (; d < dp.size(); ++d) {
      if (dp[d] < reach[d]) {
        ++dp[d];
        break;
      }
      dp[d] = -reach[d];
    }
    if (d == dp.size()) break;
    if (dp.size() == 0) break;
  }
  if (dim == 1 && s.spans_.empty()) {
    const int span = static_cast<int>(std::floor(radius / w[0]));
    s.spans_.push_back({IVector(0), -span, span});
  }
  return s;
}

std::vector<IVector> Stencil::offsets() const {
  std::vector<IVector> out;
  for (const auto& sp : spans_) {
    for (int t = sp.lo; t <= sp.hi; ++t) {
      IVector o(sp.prefix.size() + 1);
      for (int d = 0; d < sp.prefix.size(); ++d) o[d] = sp.prefix[d];
      o[o.size() - 1] = t;
      out.push_back(o);
    }
  }
  return out;
}

namespace {

// Sliding extreme over a line with window [i+lo, i+hi]; indices outside
// [0, L) carry the zero extension.
template <bool IsMax>
void slideLine(const double* src, double* dst, int L, int lo, int hi) {
  std::deque<int> dq;  // indices into src, extreme at front
  auto better = [](double a, double b) { return IsMax ? a >= b : a <= b; };
  int nextEnter = lo;  // first in-range candidate not yet pushed is max(0, i+lo)
  for (int i = 0; i < L; ++i) {
    const int wlo = i + lo, whi = i + hi;
    for (int j = std::max(nextEnter, std::max(wlo, 0)); j <= std::min(whi, L - 1); ++j) {
      while (!dq.empty() && better(src[j], src[dq.back()])) dq.pop_back();
      dq.push_back(j);
      nextEnter = j + 1;
    }
    while (!dq.empty() && dq.front() < wlo) dq.pop_front();
    double ext = dq.empty() ? (IsMax ? -kInf : kInf) : src[dq.front()];
    if (wlo < 0 || whi >= L) ext = IsMax ? std::max(ext, 0.0) : std::min(ext, 0.0);
    dst[i] = IsMax ? std::max(dst[i], ext) : std::min(dst[i], ext);
  }
}

}  // namespace

GridFunction oscField(const GridFunction& f, double eps, int threads) {
  const Grid& g = *f.grid;
  const int dim = g.dim();
  const Stencil st = Stencil::make(g, eps);
  const int L = g.paddedRes()[dim - 1];
  const long lines = g.cellCount() / L;

  Eigen::ArrayXd mx = Eigen::ArrayXd::Constant(g.cellCount(), -kInf);
  Eigen::ArrayXd mn = Eigen::ArrayXd::Constant(g.cellCount(), kInf);

  parallelFor(lines, threads, [&](long lineLo, long lineHi) {
    for (long line = lineLo; line < lineHi; ++line) {
      const long base = line * L;
      // prefix coordinates of this output line
      IVector pc(dim > 1 ? dim - 1 : 0);
      {
        long rest = line;
        for (int d = dim - 2; d >= 0; --d) {
          pc[d] = static_cast<int>(rest % g.paddedRes()[d]);
          rest /= g.paddedRes()[d];
        }
      }
      double* mxp = mx.data() + base;
      double* mnp = mn.data() + base;
      for (const auto& sp : st.spans()) {
        bool inRange = true;
        long srcLine = 0;
        for (int d = 0; d < pc.size(); ++d) {
          const int q = pc[d] + sp.prefix[d];
          if (q < 0 || q >= g.paddedRes()[d]) {
            inRange = false;
            break;
          }
          srcLine = srcLine * g.paddedRes()[d] + q;
        }
        if (!inRange) {
          // whole source line lies outside the lattice: contributes zeros
          for (int i = 0; i < L; ++i) {
            mxp[i] = std::max(mxp[i], 0.0);
            mnp[i] = std::min(mnp[i], 0.0);
          }
          continue;
        }
        const double* src = f.v.data() + srcLine * L;
        slideLine<true>(src, mxp, L, sp.lo, sp.hi);
        slideLine<false>(src, mnp, L, sp.lo, sp.hi);
      }
    }
  });

  GridFunction out;
  out.grid = f.grid;
  out.v = mx - mn;
  return out;
}

double alphaSeminorm(const GridFunction& f, const OscParams& p, int threads) {
  double best = 0.0;
  for (double eps : p.ladder()) {
    const GridFunction o = oscField(f, eps, threads);
    const double val = std::pow(eps, -p.alpha) * o.v.sum() * f.grid->cellVolume();
    best = std::max(best, val);
  }
  return best;
}

double vAlphaNorm(const GridFunction& f, const OscParams& p, int threads) {
  return f.l1() + alphaSeminorm(f, p, threads);
}

PositivityBall positivityBall(const GridFunction& h, const OscParams& p, int threads) {
  const Grid& g = *h.grid;
  if (h.v.minCoeff() < 0.0) throw std::invalid_argument("positivity ball: h must be nonnegative");
  const double mass = h.integral();
  if (mass <= 0.0) throw std::invalid_argument("positivity ball: h must not vanish identically");
  const double semi = alphaSeminorm(h, p, threads);
  double radius = p.epsTilde0;
  if (semi > 0.0) radius = std::min(p.epsTilde0, std::pow(mass / semi, 1.0 / p.alpha));

  const Stencil st = Stencil::make(g, radius);
  const auto offs = st.offsets();
  PositivityBall out;
  out.radius = radius;
  double bestMin = -kInf;
  long bestCell = -1;
  for (long i = 0; i < g.cellCount(); ++i) {
    if (!g.isInterior(i)) continue;
    const IVector mi = g.multiIndex(i);
    double m = kInf;
    bool whole = true;
    for (const auto& o : offs) {
      IVector mj = mi;
      for (int d = 0; d < o.size(); ++d) mj[d] += o[d];
      bool inside = true;
      for (int d = 0; d < g.dim(); ++d) {
        if (mj[d] < g.pad() || mj[d] >= g.pad() + g.res()[d]) {
          inside = false;
          break;
        }
      }
      if (!inside) {
        whole = false;
        break;
      }
      m = std::min(m, h.v[g.index(mj)]);
    }
    if (whole && m > bestMin) {
      bestMin = m;
      bestCell = i;
    }
  }
  if (bestCell >= 0) {
    out.center = g.center(bestCell);
    out.infValue = bestMin;
    out.found = bestMin > 0.0;
  }
  return out;
}

double Prop32Report::maxViolation() const {
  return std::max(std::max(subadditivityViolation, cutoffViolation),
                  std::max(productViolation, averagingViolation));
}

Prop32Report prop32Suite(const GridFunction& f, const GridFunction& g,
                         const std::vector<char>& kMask, double a, double b, double c) {
  if (a + b > c) throw std::invalid_argument("prop32: requires a + b <= c");
  const Grid& gr = *f.grid;
  if (!gr.sameLayout(*g.grid)) throw std::invalid_argument("prop32: grid mismatch");
  if (static_cast<long>(kMask.size()) != gr.cellCount())
    throw std::invalid_argument("prop32: mask size mismatch");

  Prop32Report rep;

  // (i) subadditivity of the oscillation field
  {
    GridFunction sum;
    sum.grid = f.grid;
    sum.v = f.v + g.v;
    const GridFunction oSum = oscField(sum, a);
    const GridFunction oF = oscField(f, a);
    const GridFunction oG = oscField(g, a);
    rep.subadditivityViolation = (oSum.v - oF.v - oG.v).maxCoeff();
  }

  const Stencil stA = Stencil::make(gr, a);
  const auto offsA = stA.offsets();
  auto inGrid = [&](const IVector& mj) {
    for (int d = 0; d < gr.dim(); ++d)
      if (mj[d] < 0 || mj[d] >= gr.paddedRes()[d]) return false;
    return true;
  };

  // (ii) indicator cutoff with the two-sided collar term
  {
    double worst = -kInf;
    for (long i = 0; i < gr.cellCount(); ++i) {
      const IVector mi = gr.multiIndex(i);
      double mxCut = -kInf, mnCut = kInf;
      double mxK = -kInf, mnK = kInf, esupAbsK = 0.0;
      bool meetsK = false, meetsKc = false, anyK = false;
      for (const auto& o : offsA) {
        IVector mj = mi;
        for (int d = 0; d < o.size(); ++d) mj[d] += o[d];
        if (!inGrid(mj)) {
          mxCut = std::max(mxCut, 0.0);
          mnCut = std::min(mnCut, 0.0);
          meetsKc = true;
          continue;
        }
        const long j = gr.index(mj);
        const bool inK = kMask[static_cast<std::size_t>(j)] != 0;
        const double cut = inK ? f.v[j] : 0.0;
        mxCut = std::max(mxCut, cut);
        mnCut = std::min(mnCut, cut);
        if (inK) {
          anyK = true;
          meetsK = true;
          mxK = std::max(mxK, f.v[j]);
          mnK = std::min(mnK, f.v[j]);
          esupAbsK = std::max(esupAbsK, std::abs(f.v[j]));
        } else {
          meetsKc = true;
        }
      }
      const double lhs = mxCut - mnCut;
      const bool xInK = kMask[static_cast<std::size_t>(i)] != 0;
      double rhs = 0.0;
      if (xInK && anyK) rhs += mxK - mnK;
      if (meetsK && meetsKc) rhs += 2.0 * esupAbsK;
      worst = std::max(worst, lhs - rhs);
    }
    rep.cutoffViolation = worst;
  }

  // (iii) product bound over the set K (g positive on K)
  {
    double mxF = -kInf, mnF = kInf, mxG = -kInf, mnG = kInf;
    double mxFG = -kInf, mnFG = kInf, infAbsF = kInf;
    bool any = false;
    for (long i = 0; i < gr.cellCount(); ++i) {
      if (!kMask[static_cast<std::size_t>(i)]) continue;
      any = true;
      if (g.v[i] <= 0.0) throw std::invalid_argument("prop32: g must be positive on K");
      mxF = std::max(mxF, f.v[i]);
      mnF = std::min(mnF, f.v[i]);
      mxG = std::max(mxG, g.v[i]);
      mnG = std::min(mnG, g.v[i]);
      const double fg = f.v[i] * g.v[i];
      mxFG = std::max(mxFG, fg);
      mnFG = std::min(mnFG, fg);
      infAbsF = std::min(infAbsF, std::abs(f.v[i]));
    }
    if (any)
      rep.productViolation = (mxFG - mnFG) - ((mxF - mnF) * mxG + (mxG - mnG) * infAbsF);
  }

  // (iv) averaging bound; evaluated where the b-stencil stays on the lattice
  {
    const Stencil stB = Stencil::make(gr, b);
    const auto offsB = stB.offsets();
    const GridFunction oC = oscField(f, c);
    double worst = -kInf;
    for (long i = 0; i < gr.cellCount(); ++i) {
      const IVector mi = gr.multiIndex(i);
      bool bInGrid = true;
      double sum = 0.0;
      for (const auto& o : offsB) {
        IVector mj = mi;
        for (int d = 0; d < o.size(); ++d) mj[d] += o[d];
        if (!inGrid(mj)) {
          bInGrid = false;
          break;
        }
        const long j = gr.index(mj);
        sum += f.v[j] + oC.v[j];
      }
      if (!bInGrid) continue;
      double esupA = -kInf;
      for (const auto& o : offsA) {
        IVector mj = mi;
        for (int d = 0; d < o.size(); ++d) mj[d] += o[d];
        esupA = std::max(esupA, inGrid(mj) ? f.v[gr.index(mj)] : 0.0);
      }
      const double rhs = sum / static_cast<double>(offsB.size());
      worst = std::max(worst, esupA - rhs);
    }
    if (worst > -kInf) rep.averagingViolation = worst;
  }

  return rep;
}

}  // namespace saussol
