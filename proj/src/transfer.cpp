#include "saussol/transfer.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "saussol/util.hpp"

namespace saussol {

namespace {

std::uint64_t mixDouble(std::uint64_t h, double x) {
  return splitmix64(h ^ std::bit_cast<std::uint64_t>(x));
}

// image of a box under a diagonal-affine branch, sign-safe
Box diagonalImage(const Branch& br, const Box& box) {
  const int d = box.dim();
  Vector lo(d), hi(d);
  for (int k = 0; k < d; ++k) {
    const double a = br.A(k, k);
    const double p = a * box.lo[k] + br.b[k];
    const double q = a * box.hi[k] + br.b[k];
    lo[k] = std::min(p, q);
    hi[k] = std::max(p, q);
  }
  return Box(lo, hi);
}

// accumulate m(img cap cell_j) * weight into the column, looping only over
// the lattice cells the image box can touch
void scatterBoxMass(const Grid& g, const Box& img, double weight,
                    std::vector<std::pair<long, double>>& column) {
  const int d = g.dim();
  const Box& dom = g.domain();
  const Vector& w = g.cellWidths();
  IVector lo(d), hi(d);
  for (int k = 0; k < d; ++k) {
    const double a = std::max(img.lo[k], dom.lo[k]);
    const double b = std::min(img.hi[k], dom.hi[k]);
    if (b <= a) return;
    lo[k] = std::max(0, static_cast<int>(std::floor((a - dom.lo[k]) / w[k] + 1e-12)));
    hi[k] = std::min(g.res()[k] - 1,
                     static_cast<int>(std::floor((b - dom.lo[k]) / w[k] - 1e-12)));
    if (hi[k] < lo[k]) return;
  }
  IVector mi = lo;
  while (true) {
    IVector padded = mi;
    for (int k = 0; k < d; ++k) padded[k] += g.pad();
    const long idx = g.index(padded);
    const Box cell = g.cellBox(idx);
    const Box inter = img.intersect(cell);
    if (!inter.empty()) {
      const double v = inter.volume();
      if (v > 0.0) column.emplace_back(g.interiorIndex(idx), weight * v);
    }
    int k = d - 1;
    for (; k >= 0; --k) {
      if (++mi[k] <= hi[k]) break;
      mi[k] = lo[k];
    }
    if (k < 0) break;
  }
}

SparseMat assembleColumns(long n, const std::vector<std::vector<std::pair<long, double>>>& cols) {
  std::vector<Eigen::Triplet<double>> trips;
  for (long i = 0; i < n; ++i)
    for (const auto& [row, val] : cols[static_cast<std::size_t>(i)])
      trips.emplace_back(static_cast<int>(row), static_cast<int>(i), val);
  SparseMat M(static_cast<int>(n), static_cast<int>(n));
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

}  // namespace

std::string backendName(Backend b) {
  return b == Backend::BranchSum ? "branch-sum" : "ulam";
}

SparseMat buildUlamExact(const SaussolMap& map, const Grid& grid, int threads) {
  if (!map.allDiagonal())
    throw std::invalid_argument("transfer: exact Ulam needs diagonal-affine branches");
  const long n = grid.interiorCount();
  std::vector<std::vector<std::pair<long, double>>> cols(static_cast<std::size_t>(n));
  parallelFor(n, threads, [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      const long idx = grid.fromInteriorIndex(i);
      const Box cell = grid.cellBox(idx);
      const double invVol = 1.0 / cell.volume();
      auto& col = cols[static_cast<std::size_t>(i)];
      for (const auto& br : map.branches) {
        const Box part = cell.intersect(br.domain);
        if (part.empty() || part.volume() <= 0.0) continue;
        scatterBoxMass(grid, diagonalImage(br, part), br.absDetAinv * invVol, col);
      }
    }
  });
  return assembleColumns(n, cols);
}

SparseMat buildUlamMonteCarlo(const SaussolMap& map, const Grid& grid, long samplesPerCell,
                              std::uint64_t seed, int threads) {
  if (samplesPerCell < 1) throw std::invalid_argument("transfer: need at least one sample");
  const long n = grid.interiorCount();
  const int d = grid.dim();
  std::vector<std::vector<std::pair<long, double>>> cols(static_cast<std::size_t>(n));
  parallelFor(n, threads, [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      const long idx = grid.fromInteriorIndex(i);
      const Box cell = grid.cellBox(idx);
      std::vector<std::pair<long, long>> counts;  // target interior cell -> hits
      for (long k = 0; k < samplesPerCell; ++k) {
        Vector x(d);
        for (int a = 0; a < d; ++a) {
          const std::uint64_t ctr =
              (static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(samplesPerCell) +
               static_cast<std::uint64_t>(k)) *
                  static_cast<std::uint64_t>(d) +
              static_cast<std::uint64_t>(a);
          x[a] = cell.lo[a] + uniform01(keyedCounter(seed, ctr)) * (cell.hi[a] - cell.lo[a]);
        }
        const long target = grid.cellOf(map.apply(x));
        if (target < 0 || !grid.isInterior(target)) continue;
        const long ti = grid.interiorIndex(target);
        bool found = false;
        for (auto& [t, c] : counts)
          if (t == ti) {
            ++c;
            found = true;
            break;
          }
        if (!found) counts.emplace_back(ti, 1);
      }
      auto& col = cols[static_cast<std::size_t>(i)];
      for (const auto& [t, c] : counts)
        col.emplace_back(t, static_cast<double>(c) / static_cast<double>(samplesPerCell));
    }
  });
  return assembleColumns(n, cols);
}

TransferOperator::TransferOperator(const SaussolMap& map, GridPtr grid, Backend backend,
                                   long mcSamplesPerCell, std::uint64_t mcSeed)
    : map_(&map), grid_(std::move(grid)), backend_(backend) {
  if (backend_ == Backend::Ulam) {
    if (map.allDiagonal() && mcSamplesPerCell == 0) {
      ulam_ = buildUlamExact(map, *grid_, static_cast<int>(std::thread::hardware_concurrency()));
    } else {
      const long samples = mcSamplesPerCell > 0 ? mcSamplesPerCell : 10000;
      ulam_ = buildUlamMonteCarlo(map, *grid_, samples, mcSeed ^ mapContentHash(map),
                                  static_cast<int>(std::thread::hardware_concurrency()));
    }
  }
}

const SparseMat& TransferOperator::matrix() const {
  if (backend_ != Backend::Ulam)
    throw std::logic_error("transfer: matrix available for the ulam backend only");
  return ulam_;
}

GridFunction TransferOperator::applyBranchSum(const GridFunction& f, int threads) const {
  GridFunction out = GridFunction::zero(f.grid);
  const Grid& g = *f.grid;
  const long n = g.interiorCount();
  parallelFor(n, threads, [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      const long idx = g.fromInteriorIndex(i);
      const Vector y = g.center(idx);
      double acc = 0.0;
      for (const auto& br : map_->branches) {
        const Vector x = br.applyInverse(y);
        if (!br.domain.containsHalfOpen(x)) continue;
        const long src = g.cellOf(x);
        if (src < 0) continue;
        acc += f.v[src] * br.inverseJacAbsDet(y);
      }
      out.v[idx] = acc;
    }
  });
  return out;
}

GridFunction TransferOperator::apply(const GridFunction& f, int threads) const {
  if (!f.grid->sameLayout(*grid_))
    throw std::invalid_argument("transfer: function grid does not match the backend grid");
  if (backend_ == Backend::BranchSum) return applyBranchSum(f, threads);
  const Grid& g = *f.grid;
  const long n = g.interiorCount();
  Eigen::VectorXd in(n);
  for (long i = 0; i < n; ++i) in[i] = f.v[g.fromInteriorIndex(i)];
  const Eigen::VectorXd res = ulam_ * in;
  GridFunction out = GridFunction::zero(f.grid);
  for (long i = 0; i < n; ++i) out.v[g.fromInteriorIndex(i)] = res[i];
  return out;
}

std::uint64_t mapContentHash(const SaussolMap& map) {
  std::uint64_t h = fnv1a64(map.label);
  for (int k = 0; k < map.C.dim(); ++k) {
    h = mixDouble(h, map.C.lo[k]);
    h = mixDouble(h, map.C.hi[k]);
  }
  for (const auto& br : map.branches) {
    for (int k = 0; k < br.domain.dim(); ++k) {
      h = mixDouble(h, br.domain.lo[k]);
      h = mixDouble(h, br.domain.hi[k]);
      h = mixDouble(h, br.ext.lo[k]);
      h = mixDouble(h, br.ext.hi[k]);
    }
    if (br.affine) {
      for (int r = 0; r < br.A.rows(); ++r) {
        for (int c = 0; c < br.A.cols(); ++c) h = mixDouble(h, br.A(r, c));
        h = mixDouble(h, br.b[r]);
      }
    }
  }
  return h;
}

std::shared_ptr<const TransferOperator> TransferCache::get(const SaussolMap& map, GridPtr grid,
                                                           Backend backend) {
  const std::uint64_t key = mapContentHash(map);
  for (const auto& e : entries_)
    if (e.mapKey == key && e.backend == backend && e.grid->sameLayout(*grid)) return e.op;
  auto op = std::make_shared<TransferOperator>(map, grid, backend);
  entries_.push_back({key, grid.get(), backend, op});
  return op;
}

CocycleResult cocycleApply(const MapFamily& family, const std::vector<int>& path,
                           const GridFunction& f, Backend backend, TransferCache& cache,
                           int threads) {
  CocycleResult out{f, {}};
  out.l1PerStep.reserve(path.size());
  for (int sym : path) {
    const auto op = cache.get(family.at(sym), out.result.grid, backend);
    out.result = op->apply(out.result, threads);
    out.l1PerStep.push_back(out.result.l1());
  }
  return out;
}

double l1ContractionCheck(const TransferOperator& op, const std::vector<GridFunction>& ensemble,
                          int threads) {
  double worst = 0.0;
  for (const auto& f : ensemble) {
    const double before = f.l1();
    if (before <= 0.0) throw std::invalid_argument("transfer: zero function in ensemble");
    worst = std::max(worst, op.apply(f, threads).l1() / before);
  }
  return worst;
}

}  // namespace saussol
