#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <string>
#include <vector>

#include "saussol/grid.hpp"
#include "saussol/maps.hpp"

namespace saussol {

enum class Backend { BranchSum, Ulam };

std::string backendName(Backend b);

using SparseMat = Eigen::SparseMatrix<double>;  // column-compressed

// Discretized transfer operator of one map on one grid. The Ulam matrix acts
// on interior cells (column-stochastic in exact mode); branch-sum evaluates
// the pointwise formula at cell centers.
class TransferOperator {
 public:
  TransferOperator(const SaussolMap& map, GridPtr grid, Backend backend,
                   long mcSamplesPerCell = 0, std::uint64_t mcSeed = 0);

  Backend backend() const { return backend_; }
  const GridPtr& grid() const { return grid_; }
  const SaussolMap& map() const { return *map_; }
  const SparseMat& matrix() const;  // Ulam only

  GridFunction apply(const GridFunction& f, int threads = 1) const;

 private:
  GridFunction applyBranchSum(const GridFunction& f, int threads) const;

  const SaussolMap* map_;
  GridPtr grid_;
  Backend backend_;
  SparseMat ulam_;
};

// Ulam matrix over interior cells: entry (j,i) = m(cell_i cap T^{-1}cell_j)/m(cell_i).
// Exact mode clips boxes through diagonal-affine branches; throws otherwise.
SparseMat buildUlamExact(const SaussolMap& map, const Grid& grid, int threads = 1);
SparseMat buildUlamMonteCarlo(const SaussolMap& map, const Grid& grid, long samplesPerCell,
                              std::uint64_t seed, int threads = 1);

// Shared per-(map, grid) operator cache; the map is keyed by its label plus a
// content hash of the branch data, the grid by its layout.
class TransferCache {
 public:
  std::shared_ptr<const TransferOperator> get(const SaussolMap& map, GridPtr grid,
                                              Backend backend);

 private:
  struct Entry {
    std::uint64_t mapKey;
    const Grid* grid;
    Backend backend;
    std::shared_ptr<const TransferOperator> op;
  };
  std::vector<Entry> entries_;
};

std::uint64_t mapContentHash(const SaussolMap& map);

struct CocycleResult {
  GridFunction result;
  std::vector<double> l1PerStep;  // after each operator application
};

// L_{path[k-1]} o ... o L_{path[0]} f, operators resolved through the family
// and cache at the given backend.
CocycleResult cocycleApply(const MapFamily& family, const std::vector<int>& path,
                           const GridFunction& f, Backend backend, TransferCache& cache,
                           int threads = 1);

// max over the ensemble of |Lf|_1 / |f|_1.
double l1ContractionCheck(const TransferOperator& op, const std::vector<GridFunction>& ensemble,
                          int threads = 1);

}  // namespace saussol
