#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "saussol/grid.hpp"

namespace saussol {

// One invertible branch of a piecewise map: forward map on the extension V,
// restricted to the open domain U for the dynamics.
struct Branch {
  Box domain;  // U_i
  Box ext;     // V_i, clos(U_i) strictly inside
  bool affine = true;
  Matrix A;  // forward x -> A x + b
  Vector b;
  // generic branches (sampled constants, never certified)
  std::function<Vector(const Vector&)> fwd;
  std::function<Vector(const Vector&)> inv;
  std::function<double(const Vector&)> invJacDet;  // |det DT^{-1}| at an image point

  // cached for affine branches
  Matrix Ainv;
  double absDetAinv = 0.0;
  bool diagonal = false;

  static Branch makeAffine(Box domain, Box ext, Matrix A, Vector b);

  Vector apply(const Vector& x) const;
  Vector applyInverse(const Vector& y) const;
  double inverseJacAbsDet(const Vector& y) const;
  // y in T(U_i)? decided through the inverse branch; half-open on U_i so
  // partition faces are not double counted.
  bool imageContains(const Vector& y) const;
};

struct Segment {
  Vector a, b;
  double length() const { return (b - a).norm(); }
};

struct Pe2Result {
  bool pass = true;
  double worstMargin = 0.0;  // min over samples of d(T(U) boundary image, complement of T(V))
  std::vector<Vector> witnesses;
};

// A single piecewise-expanding map on the compact box C.
struct SaussolMap {
  std::string label;
  Box C;
  std::vector<Branch> branches;

  // Applies the map; first matching branch wins on the null boundary set.
  Vector apply(const Vector& x) const;

  // PE1 constant: exact spectral norm of A^{-1} for affine branches, sampled
  // (x 1.05) otherwise. Also exposed per branch for collar geometry.
  double contractionCoefficient() const;
  double branchContraction(int i) const;
  bool allAffine() const;
  bool allDiagonal() const;

  // Hoelder constant of the inverse Jacobian determinant; exactly 0 for
  // piecewise-affine maps, sampled otherwise.
  double hoelderConstant(double alpha, double eps0, int samplesPerBranch = 512) const;

  Pe2Result checkPe2(double eps0, int boundarySamplesPerFace = 32) const;

  // PE4: m(C) - sum m(U_i); throws when domains overlap.
  double pe4Defect() const;

  // Branch-boundary multiplicity Y: sup over skeleton points of the number of
  // boundary pieces (box edges) containing the point, summed over branches.
  double branchMultiplicity(std::uint64_t sampleSeed = 1234, int randomSamples = 128) const;

  // Example quantity Lambda = s^alpha + 4 Y (g_{N-1}/g_N) s/(S-s) S^alpha.
  double lambdaValue(double alpha, double S) const;

  // Boundary of U_i as segments, per branch (N == 2 only).
  std::vector<std::vector<Segment>> boundarySegments() const;
};

// Volume of the N-dimensional Euclidean unit ball.
double unitBallVolume(int dim);

struct MapFamily {
  double alpha = 0.5;
  double eps0 = 0.0;
  double S = 0.0;
  std::map<int, SaussolMap> maps;

  double epsTilde0() const { return S * eps0; }
  const SaussolMap& at(int symbol) const;
  void validate() const;  // s(w) < S for all symbols, alpha/eps0 in range
};

// Built-in families: doubling2d, tripling2d, markov_product2d,
// two_component2d, random_mix, markov_factor1d.
MapFamily builtinFamily(const std::string& name);
std::vector<std::string> builtinFamilyNames();

}  // namespace saussol
