#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace saussol {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IVector = Eigen::VectorXi;

// Axis-aligned box [lo, hi].
struct Box {
  Vector lo, hi;

  Box() = default;
  Box(Vector l, Vector h) : lo(std::move(l)), hi(std::move(h)) {}
  static Box unit(int dim);

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  Vector widths() const { return hi - lo; }
  bool empty() const;
  bool contains(const Vector& x, double tol = 0.0) const;
  bool containsHalfOpen(const Vector& x) const;  // [lo, hi)
  Box intersect(const Box& o) const;
  Box inflated(double d) const;
  bool strictlyInside(const Box& outer, double margin) const;
};

// Uniform cell lattice over a domain C plus `pad` ghost cells per side.
// Ghost cells carry the zero extension of functions supported on C.
// Linear indices are row-major over the padded lattice, last axis fastest.
class Grid {
 public:
  Grid(Box domain, IVector res, int pad);

  int dim() const { return domain_.dim(); }
  const Box& domain() const { return domain_; }
  int pad() const { return pad_; }
  const IVector& res() const { return res_; }
  const IVector& paddedRes() const { return padded_; }
  const Vector& cellWidths() const { return widths_; }
  double cellVolume() const { return cellVolume_; }
  long cellCount() const { return count_; }
  long interiorCount() const { return interiorCount_; }

  long index(const IVector& mi) const;
  IVector multiIndex(long idx) const;
  Vector center(long idx) const;
  Box cellBox(long idx) const;  // interior cells only
  // Cell containing x, or -1 outside the padded lattice.
  long cellOf(const Vector& x) const;
  bool isInterior(long idx) const;
  // Bijection between padded indices of interior cells and [0, interiorCount).
  long interiorIndex(long idx) const;
  long fromInteriorIndex(long ii) const;

  bool sameLayout(const Grid& o) const;

 private:
  Box domain_;
  IVector res_, padded_;
  int pad_;
  Vector widths_;
  double cellVolume_;
  long count_, interiorCount_;
  std::vector<long> strides_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr makeGrid(const Box& domain, int resPerAxis, double maxStencilRadius);

// Piecewise-constant real field on a Grid; the discretized function IS the
// object under study (no sub-cell interpretation).
struct GridFunction {
  GridPtr grid;
  Eigen::ArrayXd v;  // size grid->cellCount()

  static GridFunction zero(GridPtr g);
  static GridFunction constant(GridPtr g, double c);  // c on C, 0 on ghosts
  static GridFunction sample(GridPtr g, const std::function<double(const Vector&)>& f);
  static GridFunction indicator(GridPtr g, const Box& set);

  double l1() const { return v.abs().sum() * grid->cellVolume(); }
  double integral() const { return v.sum() * grid->cellVolume(); }
  double maxAbsDiff(const GridFunction& o) const { return (v - o.v).abs().maxCoeff(); }
  double l1Diff(const GridFunction& o) const { return (v - o.v).abs().sum() * grid->cellVolume(); }
};

void saveBinary(const GridFunction& f, const std::string& path);
GridFunction loadBinary(const std::string& path);
void saveCsv(const GridFunction& f, const std::string& path);

}  // namespace saussol
