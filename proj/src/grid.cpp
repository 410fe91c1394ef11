#include "saussol/grid.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace saussol {

Box Box::unit(int dim) {
  return Box(Vector::Zero(dim), Vector::Ones(dim));
}

double Box::volume() const {
  if (empty()) return 0.0;
  return widths().prod();
}

bool Box::empty() const {
  for (int d = 0; d < dim(); ++d)
    if (hi[d] <= lo[d]) return true;
  return dim() == 0;
}

bool Box::contains(const Vector& x, double tol) const {
  for (int d = 0; d < dim(); ++d)
    if (x[d] < lo[d] - tol || x[d] > hi[d] + tol) return false;
  return true;
}

bool Box::containsHalfOpen(const Vector& x) const {
  for (int d = 0; d < dim(); ++d)
    if (x[d] < lo[d] || x[d] >= hi[d]) return false;
  return true;
}

Box Box::intersect(const Box& o) const {
  return Box(lo.cwiseMax(o.lo), hi.cwiseMin(o.hi));
}

Box Box::inflated(double d) const {
  return Box(lo.array() - d, hi.array() + d);
}

bool Box::strictlyInside(const Box& outer, double margin) const {
  for (int d = 0; d < dim(); ++d)
    if (lo[d] < outer.lo[d] + margin || hi[d] > outer.hi[d] - margin) return false;
  return true;
}

Grid::Grid(Box domain, IVector res, int pad)
    : domain_(std::move(domain)), res_(std::move(res)), pad_(pad) {
  if (res_.size() != domain_.dim()) throw std::invalid_argument("grid: res/domain dim mismatch");
  if (res_.minCoeff() < 1) throw std::invalid_argument("grid: resolution must be >= 1 per axis");
  if (pad_ < 0) throw std::invalid_argument("grid: negative pad");
  const int n = dim();
  padded_ = res_.array() + 2 * pad_;
  widths_ = domain_.widths().cwiseQuotient(res_.cast<double>());
  cellVolume_ = widths_.prod();
  strides_.assign(static_cast<std::size_t>(n), 1);
  count_ = 1;
  for (int d = n - 1; d >= 0; --d) {
    strides_[static_cast<std::size_t>(d)] = count_;
    count_ *= padded_[d];
  }
  interiorCount_ = 1;
  for (int d = 0; d < n; ++d) interiorCount_ *= res_[d];
}

long Grid::index(const IVector& mi) const {
  long idx = 0;
  for (int d = 0; d < dim(); ++d) idx += mi[d] * strides_[static_cast<std::size_t>(d)];
  return idx;
}

IVector Grid::multiIndex(long idx) const {
  IVector mi(dim());
  for (int d = 0; d < dim(); ++d) {
    mi[d] = static_cast<int>(idx / strides_[static_cast<std::size_t>(d)]);
    idx %= strides_[static_cast<std::size_t>(d)];
  }
  return mi;
}

Vector Grid::center(long idx) const {
  const IVector mi = multiIndex(idx);
  Vector x(dim());
  for (int d = 0; d < dim(); ++d)
    x[d] = domain_.lo[d] + (mi[d] - pad_ + 0.5) * widths_[d];
  return x;
}

Box Grid::cellBox(long idx) const {
  const IVector mi = multiIndex(idx);
  Vector lo(dim()), hi(dim());
  for (int d = 0; d < dim(); ++d) {
    lo[d] = domain_.lo[d] + (mi[d] - pad_) * widths_[d];
    hi[d] = lo[d] + widths_[d];
  }
  return Box(lo, hi);
}

long Grid::cellOf(const Vector& x) const {
  IVector mi(dim());
  for (int d = 0; d < dim(); ++d) {
    const double t = (x[d] - domain_.lo[d]) / widths_[d];
    const int c = static_cast<int>(std::floor(t)) + pad_;
    if (c < 0 || c >= padded_[d]) return -1;
    mi[d] = c;
  }
  return index(mi);
}

bool Grid::isInterior(long idx) const {
  const IVector mi = multiIndex(idx);
  for (int d = 0; d < dim(); ++d)
    if (mi[d] < pad_ || mi[d] >= pad_ + res_[d]) return false;
  return true;
}

long Grid::interiorIndex(long idx) const {
  const IVector mi = multiIndex(idx);
  long ii = 0;
  for (int d = 0; d < dim(); ++d) {
    const int c = mi[d] - pad_;
    if (c < 0 || c >= res_[d]) return -1;
    ii = ii * res_[d] + c;
  }
  return ii;
}

long Grid::fromInteriorIndex(long ii) const {
  IVector mi(dim());
  for (int d = dim() - 1; d >= 0; --d) {
    mi[d] = static_cast<int>(ii % res_[d]) + pad_;
    ii /= res_[d];
  }
  return index(mi);
}

bool Grid::sameLayout(const Grid& o) const {
  return res_ == o.res_ && pad_ == o.pad_ && (domain_.lo - o.domain_.lo).cwiseAbs().maxCoeff() == 0.0 &&
         (domain_.hi - o.domain_.hi).cwiseAbs().maxCoeff() == 0.0;
}

GridPtr makeGrid(const Box& domain, int resPerAxis, double maxStencilRadius) {
  IVector res = IVector::Constant(domain.dim(), resPerAxis);
  const double w = (domain.widths().cwiseQuotient(res.cast<double>())).minCoeff();
  const int pad = static_cast<int>(std::ceil(maxStencilRadius / w)) + 1;
  return std::make_shared<Grid>(domain, res, pad);
}

GridFunction GridFunction::zero(GridPtr g) {
  GridFunction f;
  f.grid = std::move(g);
  f.v = Eigen::ArrayXd::Zero(f.grid->cellCount());
  return f;
}

GridFunction GridFunction::constant(GridPtr g, double c) {
  GridFunction f = zero(std::move(g));
  for (long i = 0; i < f.grid->cellCount(); ++i)
    if (f.grid->isInterior(i)) f.v[i] = c;
  return f;
}

GridFunction GridFunction::sample(GridPtr g, const std::function<double(const Vector&)>& fn) {
  GridFunction f = zero(std::move(g));
  for (long i = 0; i < f.grid->cellCount(); ++i)
    if (f.grid->isInterior(i)) f.v[i] = fn(f.grid->center(i));
  return f;
}

GridFunction GridFunction::indicator(GridPtr g, const Box& set) {
  GridFunction f = zero(std::move(g));
  for (long i = 0; i < f.grid->cellCount(); ++i)
    if (f.grid->isInterior(i) && set.containsHalfOpen(f.grid->center(i))) f.v[i] = 1.0;
  return f;
}

void saveBinary(const GridFunction& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  const Grid& g = *f.grid;
  const std::uint32_t dim = static_cast<std::uint32_t>(g.dim());
  out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  for (int d = 0; d < g.dim(); ++d) {
    const std::uint32_t n = static_cast<std::uint32_t>(g.res()[d]);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
  }
  const std::uint32_t pad = static_cast<std::uint32_t>(g.pad());
  out.write(reinterpret_cast<const char*>(&pad), sizeof pad);
  for (int d = 0; d < g.dim(); ++d) {
    const double lo = g.domain().lo[d], hi = g.domain().hi[d];
    out.write(reinterpret_cast<const char*>(&lo), sizeof lo);
    out.write(reinterpret_cast<const char*>(&hi), sizeof hi);
  }
  out.write(reinterpret_cast<const char*>(f.v.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(f.v.size())));
}

GridFunction loadBinary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint32_t dim = 0;
  in.read(reinterpret_cast<char*>(&dim), sizeof dim);
  IVector res(dim);
  for (std::uint32_t d = 0; d < dim; ++d) {
    std::uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    res[static_cast<int>(d)] = static_cast<int>(n);
  }
  std::uint32_t pad = 0;
  in.read(reinterpret_cast<char*>(&pad), sizeof pad);
  Vector lo(dim), hi(dim);
  for (std::uint32_t d = 0; d < dim; ++d) {
    in.read(reinterpret_cast<char*>(&lo[static_cast<int>(d)]), sizeof(double));
    in.read(reinterpret_cast<char*>(&hi[static_cast<int>(d)]), sizeof(double));
  }
  auto g = std::make_shared<Grid>(Box(lo, hi), res, static_cast<int>(pad));
  GridFunction f = GridFunction::zero(g);
  in.read(reinterpret_cast<char*>(f.v.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(f.v.size())));
  if (!in) throw std::runtime_error("truncated grid function file " + path);
  return f;
}

void saveCsv(const GridFunction& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  const Grid& g = *f.grid;
  out << "cell";
  for (int d = 0; d < g.dim(); ++d) out << ",x" << d;
  out << ",value\n";
  for (long i = 0; i < g.cellCount(); ++i) {
    if (!g.isInterior(i)) continue;
    out << g.interiorIndex(i);
    const Vector c = g.center(i);
    for (int d = 0; d < g.dim(); ++d) out << "," << c[d];
    out << "," << f.v[i] << "\n";
  }
}

}  // namespace saussol
