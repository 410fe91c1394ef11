#include "saussol/maps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "saussol/util.hpp"

namespace saussol {

namespace {

constexpr double kGeomTol = 1e-12;

bool isDiagonal(const Matrix& A) {
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      if (i != j && A(i, j) != 0.0) return false;
  return true;
}

double spectralNorm(const Matrix& A) {
  return Eigen::JacobiSVD<Matrix>(A).singularValues()[0];
}

Box affineImage(const Branch& br, const Box& box) {
  // diagonal (or general) affine image of a box; for non-diagonal A this is
  // the bounding box, which is only used by the sampled PE2 path.
  const int d = box.dim();
  Vector lo(d), hi(d);
  for (int k = 0; k < d; ++k) {
    double a = br.b[k], b = br.b[k];
    for (int j = 0; j < d; ++j) {
      const double c = br.A(k, j);
      a += c * (c >= 0.0 ? box.lo[j] : box.hi[j]);
      b += c * (c >= 0.0 ? box.hi[j] : box.lo[j]);
    }
    lo[k] = a;
    hi[k] = b;
  }
  return Box(lo, hi);
}

}  // namespace

Branch Branch::makeAffine(Box domain, Box ext, Matrix A, Vector b) {
  if (domain.dim() != A.rows() || A.rows() != A.cols() || b.size() != A.rows())
    throw std::invalid_argument("maps: affine branch dimension mismatch");
  if (!domain.strictlyInside(ext, 0.0))
    throw std::invalid_argument("maps: branch domain must lie inside its extension");
  Branch br;
  br.domain = std::move(domain);
  br.ext = std::move(ext);
  br.affine = true;
  br.A = std::move(A);
  br.b = std::move(b);
  br.Ainv = br.A.inverse();
  br.absDetAinv = std::abs(br.Ainv.determinant());
  br.diagonal = isDiagonal(br.A);
  return br;
}

Vector Branch::apply(const Vector& x) const {
  return affine ? Vector(A * x + b) : fwd(x);
}

Vector Branch::applyInverse(const Vector& y) const {
  return affine ? Vector(Ainv * (y - b)) : inv(y);
}

double Branch::inverseJacAbsDet(const Vector& y) const {
  return affine ? absDetAinv : invJacDet(y);
}

bool Branch::imageContains(const Vector& y) const {
  return domain.containsHalfOpen(applyInverse(y));
}

Vector SaussolMap::apply(const Vector& x) const {
  for (const auto& br : branches)
    if (br.domain.containsHalfOpen(x)) return br.apply(x);
  // boundary fallback (upper faces of C): closed membership, first match
  for (const auto& br : branches)
    if (br.domain.contains(x, kGeomTol)) return br.apply(x);
  throw std::runtime_error("maps: point outside every branch domain: " + label);
}

double SaussolMap::branchContraction(int i) const {
  const Branch& br = branches[static_cast<std::size_t>(i)];
  if (br.affine) return spectralNorm(br.Ainv);
  // sampled estimate with a safety factor; generic branches are never certified
  RandomStream rng(fnv1a64(label) ^ static_cast<std::uint64_t>(i));
  double worst = 0.0;
  const Vector w = br.domain.widths();
  for (int k = 0; k < 256; ++k) {
    Vector x(br.domain.dim()), x2(br.domain.dim());
    for (int j = 0; j < x.size(); ++j) x[j] = br.domain.lo[j] + rng.next() * w[j];
    for (int j = 0; j < x.size(); ++j) x2[j] = br.domain.lo[j] + rng.next() * w[j];
    const double dy = (br.apply(x) - br.apply(x2)).norm();
    if (dy > 0.0) worst = std::max(worst, (x - x2).norm() / dy);
  }
  return 1.05 * worst;
}

double SaussolMap::contractionCoefficient() const {
  double s = 0.0;
  for (int i = 0; i < static_cast<int>(branches.size()); ++i)
    s = std::max(s, branchContraction(i));
  return s;
}

bool SaussolMap::allAffine() const {
  return std::all_of(branches.begin(), branches.end(),
                     [](const Branch& b) { return b.affine; });
}

bool SaussolMap::allDiagonal() const {
  return std::all_of(branches.begin(), branches.end(),
                     [](const Branch& b) { return b.affine && b.diagonal; });
}

double SaussolMap::hoelderConstant(double alpha, double eps0, int samplesPerBranch) const {
  if (allAffine()) return 0.0;  // inverse Jacobian determinant is constant
  double c = 0.0;
  const double reach = eps0;
  RandomStream rng(fnv1a64(label) ^ 0x9d5fULL);
  for (const auto& br : branches) {
    const Box img = affineImage(br, br.domain);
    const Vector w = img.widths();
    for (int k = 0; k < samplesPerBranch; ++k) {
      Vector y(img.dim()), z(img.dim());
      for (int j = 0; j < y.size(); ++j) y[j] = img.lo[j] + rng.next() * w[j];
      for (int j = 0; j < z.size(); ++j)
        z[j] = std::clamp(y[j] + reach * (2.0 * rng.next() - 1.0), img.lo[j], img.hi[j]);
      const double d = (y - z).norm();
      if (d > 0.0)
        c = std::max(c, std::abs(br.inverseJacAbsDet(y) - br.inverseJacAbsDet(z)) /
                            (br.inverseJacAbsDet(z) * std::pow(d, alpha)));
    }
  }
  return 1.05 * c;
}

Pe2Result SaussolMap::checkPe2(double eps0, int boundarySamplesPerFace) const {
  Pe2Result out;
  out.worstMargin = std::numeric_limits<double>::infinity();
  for (const auto& br : branches) {
    if (br.affine && br.diagonal) {
      // exact: both images are boxes, so the collar margin is a face-by-face
      // width comparison.
      const Box tu = affineImage(br, br.domain);
      const Box tv = affineImage(br, br.ext);
      double margin = std::numeric_limits<double>::infinity();
      for (int k = 0; k < tu.dim(); ++k) {
        margin = std::min(margin, tu.lo[k] - tv.lo[k]);
        margin = std::min(margin, tv.hi[k] - tu.hi[k]);
      }
      margin -= eps0;
      out.worstMargin = std::min(out.worstMargin, margin);
      if (margin < 0.0) {
        out.pass = false;
        out.witnesses.push_back(tu.lo);
      }
      continue;
    }
    // sampled: take points on each face of U, push forward, and probe the
    // eps0-sphere around the image through the inverse branch.
    RandomStream rng(fnv1a64(label) ^ 0x7a11ULL);
    const int d = br.domain.dim();
    for (int face = 0; face < 2 * d; ++face) {
      const int axis = face / 2;
      const bool upper = face % 2;
      for (int k = 0; k < boundarySamplesPerFace; ++k) {
        Vector x(d);
        for (int j = 0; j < d; ++j)
          x[j] = br.domain.lo[j] + rng.next() * (br.domain.hi[j] - br.domain.lo[j]);
        x[axis] = upper ? br.domain.hi[axis] : br.domain.lo[axis];
        const Vector y = br.apply(x);
        for (int dir = 0; dir < 16; ++dir) {
          Vector u = Vector::Zero(d);
          if (d == 1) {
            u[0] = dir % 2 ? 1.0 : -1.0;
          } else {
            const double phi = 2.0 * M_PI * dir / 16.0;
            u[0] = std::cos(phi);
            u[1] = std::sin(phi);
          }
          const Vector probe = y + eps0 * u;
          const bool inside = br.ext.contains(br.applyInverse(probe), kGeomTol);
          if (!inside) {
            out.pass = false;
            out.worstMargin = std::min(out.worstMargin, -eps0);
            out.witnesses.push_back(y);
          }
        }
      }
    }
    out.worstMargin = std::min(out.worstMargin, 0.0);
  }
  return out;
}

double SaussolMap::pe4Defect() const {
  double covered = 0.0;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    covered += branches[i].domain.volume();
    for (std::size_t j = i + 1; j < branches.size(); ++j) {
      const Box inter = branches[i].domain.intersect(branches[j].domain);
      if (!inter.empty() && inter.volume() > kGeomTol)
        throw std::runtime_error("maps: branch domains overlap with positive measure");
    }
  }
  return C.volume() - covered;
}

double SaussolMap::branchMultiplicity(std::uint64_t sampleSeed, int randomSamples) const {
  const int d = C.dim();
  // candidate points: all domain corners, face midpoints, and random probes
  std::vector<Vector> pts;
  for (const auto& br : branches) {
    const long corners = 1L << d;
    for (long m = 0; m < corners; ++m) {
      Vector p(d);
      for (int k = 0; k < d; ++k) p[k] = (m >> k) & 1 ? br.domain.hi[k] : br.domain.lo[k];
      pts.push_back(p);
    }
    for (int k = 0; k < d; ++k) {
      Vector mid = 0.5 * (br.domain.lo + br.domain.hi);
      Vector p = mid;
      p[k] = br.domain.lo[k];
      pts.push_back(p);
      p[k] = br.domain.hi[k];
      pts.push_back(p);
    }
  }
  RandomStream rng(sampleSeed);
  for (int m = 0; m < randomSamples; ++m) {
    Vector p(d);
    for (int k = 0; k < d; ++k) p[k] = C.lo[k] + rng.next() * (C.hi[k] - C.lo[k]);
    pts.push_back(p);
  }
  int best = 0;
  for (const auto& p : pts) {
    int count = 0;
    for (const auto& br : branches) {
      if (!br.domain.contains(p, kGeomTol)) continue;
      // a boundary face of U_i through p counts once per face
      for (int k = 0; k < d; ++k) {
        if (std::abs(p[k] - br.domain.lo[k]) <= kGeomTol) ++count;
        if (std::abs(p[k] - br.domain.hi[k]) <= kGeomTol) ++count;
      }
    }
    best = std::max(best, count);
  }
  return static_cast<double>(best);
}

double SaussolMap::lambdaValue(double alpha, double S) const {
  const int N = C.dim();
  const double s = contractionCoefficient();
  if (S <= s) throw std::invalid_argument("maps: Lambda requires S > s");
  const double Y = branchMultiplicity();
  const double ratio = unitBallVolume(N - 1) / unitBallVolume(N);
  return std::pow(s, alpha) + 4.0 * Y * ratio * (s / (S - s)) * std::pow(S, alpha);
}

std::vector<std::vector<Segment>> SaussolMap::boundarySegments() const {
  if (C.dim() != 2)
    throw std::invalid_argument("maps: boundary segments implemented for N = 2 only");
  std::vector<std::vector<Segment>> out;
  out.reserve(branches.size());
  for (const auto& br : branches) {
    const Box& u = br.domain;
    Vector a(2), b(2);
    std::vector<Segment> segs;
    a << u.lo[0], u.lo[1]; b << u.hi[0], u.lo[1]; segs.push_back({a, b});
    a << u.hi[0], u.lo[1]; b << u.hi[0], u.hi[1]; segs.push_back({a, b});
    a << u.hi[0], u.hi[1]; b << u.lo[0], u.hi[1]; segs.push_back({a, b});
    a << u.lo[0], u.hi[1]; b << u.lo[0], u.lo[1]; segs.push_back({a, b});
    out.push_back(std::move(segs));
  }
  return out;
}

double unitBallVolume(int dim) {
  if (dim < 0) throw std::invalid_argument("maps: negative dimension");
  if (dim == 0) return 1.0;
  return std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

const SaussolMap& MapFamily::at(int symbol) const {
  const auto it = maps.find(symbol);
  if (it == maps.end()) throw std::out_of_range("maps: unknown symbol in family");
  return it->second;
}

void MapFamily::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("maps: alpha must be in (0,1]");
  if (!(eps0 > 0.0)) throw std::invalid_argument("maps: eps0 must be positive");
  if (maps.empty()) throw std::invalid_argument("maps: empty family");
  for (const auto& [w, map] : maps) {
    const double s = map.contractionCoefficient();
    if (!(s < 1.0))
      throw std::invalid_argument("maps: symbol " + std::to_string(w) + " is not expanding");
    if (!(S > s)) throw std::invalid_argument("maps: S must exceed every contraction coefficient");
  }
}

namespace {

// Full-branch diagonal tiling: splits C into per-axis pieces given by `cuts`
// (per-axis list of [lo,hi] pairs with the affine 1D map onto the axis image).
struct AxisPiece {
  double lo, hi;  // domain interval
  double a, b;    // x -> a x + b
};

SaussolMap tiledMap(const std::string& label, const Box& C,
                    const std::vector<std::vector<AxisPiece>>& axes, double extMargin) {
  SaussolMap m;
  m.label = label;
  m.C = C;
  const int d = C.dim();
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    Vector lo(d), hi(d), b(d);
    Matrix A = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) {
      const AxisPiece& p = axes[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
      lo[k] = p.lo;
      hi[k] = p.hi;
      A(k, k) = p.a;
      b[k] = p.b;
    }
    const Box dom(lo, hi);
    m.branches.push_back(Branch::makeAffine(dom, dom.inflated(extMargin), A, b));
    int k = 0;
    for (; k < d; ++k) {
      auto& i = idx[static_cast<std::size_t>(k)];
      if (++i < axes[static_cast<std::size_t>(k)].size()) break;
      i = 0;
    }
    if (k == d) break;
  }
  return m;
}

std::vector<AxisPiece> modPieces(double lo, double hi, int folds) {
  // x -> folds * (x - lo) mod (hi - lo) + lo on [lo, hi]
  std::vector<AxisPiece> out;
  const double w = (hi - lo) / folds;
  for (int i = 0; i < folds; ++i) {
    const double a = static_cast<double>(folds);
    const double pieceLo = lo + i * w;
    out.push_back({pieceLo, pieceLo + w, a, lo - a * pieceLo});
  }
  return out;
}

std::vector<AxisPiece> markovPieces() {
  // 3-branch slope-2 Markov interval map: [0,1/2] -> [0,1],
  // [1/2,3/4] -> [0,1/2], [3/4,1] -> [0,1/2]
  return {{0.0, 0.5, 2.0, 0.0}, {0.5, 0.75, 2.0, -1.0}, {0.75, 1.0, 2.0, -1.5}};
}

Box unitSquare() { return Box::unit(2); }

SaussolMap doublingMap(double extMargin) {
  return tiledMap("doubling2d", unitSquare(),
                  {modPieces(0.0, 1.0, 2), modPieces(0.0, 1.0, 2)}, extMargin);
}

SaussolMap triplingMap(double extMargin) {
  return tiledMap("tripling2d", unitSquare(),
                  {modPieces(0.0, 1.0, 3), modPieces(0.0, 1.0, 3)}, extMargin);
}

}  // namespace

MapFamily builtinFamily(const std::string& name) {
  MapFamily fam;
  fam.alpha = 0.5;
  if (name == "doubling2d") {
    fam.S = 2000.0;
    fam.eps0 = 1e-5;
    fam.maps.emplace(0, doublingMap(2.0 * fam.eps0));
  } else if (name == "tripling2d") {
    fam.S = 400.0;
    fam.eps0 = 5e-5;
    fam.maps.emplace(0, triplingMap(2.0 * fam.eps0));
  } else if (name == "markov_product2d") {
    fam.S = 900.0;
    fam.eps0 = 0.02 / 900.0;
    SaussolMap m = tiledMap("markov_product2d", unitSquare(),
                            {markovPieces(), markovPieces()}, 2.0 * fam.eps0);
    fam.maps.emplace(0, std::move(m));
  } else if (name == "two_component2d") {
    fam.S = 2000.0;
    fam.eps0 = 1e-5;
    // two invariant unit squares side by side; each carries the doubling map
    Vector lo(2), hi(2);
    lo << 0.0, 0.0;
    hi << 2.0, 1.0;
    SaussolMap m;
    m.label = "two_component2d";
    m.C = Box(lo, hi);
    for (int comp = 0; comp < 2; ++comp) {
      Vector clo(2), chi(2);
      clo << static_cast<double>(comp), 0.0;
      chi << comp + 1.0, 1.0;
      SaussolMap part = tiledMap("component", Box(clo, chi),
                                 {modPieces(comp, comp + 1.0, 2), modPieces(0.0, 1.0, 2)},
                                 2.0 * fam.eps0);
      for (auto& br : part.branches) m.branches.push_back(std::move(br));
    }
    fam.maps.emplace(0, std::move(m));
  } else if (name == "random_mix") {
    fam.S = 2000.0;
    fam.eps0 = 1e-5;
    fam.maps.emplace(0, doublingMap(2.0 * fam.eps0));
    fam.maps.emplace(1, triplingMap(2.0 * fam.eps0));
  } else if (name == "markov_factor1d") {
    fam.S = 2000.0;
    fam.eps0 = 1e-5;
    Vector lo(1), hi(1);
    lo << 0.0;
    hi << 1.0;
    SaussolMap m = tiledMap("markov_factor1d", Box(lo, hi), {markovPieces()}, 2.0 * fam.eps0);
    fam.maps.emplace(0, std::move(m));
  } else {
    throw std::invalid_argument("maps: unknown built-in family: " + name);
  }
  fam.validate();
  return fam;
}

std::vector<std::string> builtinFamilyNames() {
  return {"doubling2d", "tripling2d", "markov_product2d", "two_component2d",
          "random_mix", "markov_factor1d"};
}

}  // namespace saussol
