#include "saussol/process.hpp"

#include <cmath>
#include <stdexcept>

#include "saussol/util.hpp"

namespace saussol {

namespace {

constexpr double kStochasticTol = 1e-12;

void checkProbabilityVector(const Eigen::VectorXd& p) {
  if (p.size() == 0) throw std::invalid_argument("process: empty symbol set");
  if (p.minCoeff() < 0.0) throw std::invalid_argument("process: negative probability");
  if (std::abs(p.sum() - 1.0) > kStochasticTol)
    throw std::invalid_argument("process: probabilities do not sum to 1");
}

void checkIrreducible(const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  // reachability closure over the support graph
  Eigen::MatrixXi reach = (P.array() > 0.0).cast<int>();
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (reach(i, k))
        for (int j = 0; j < n; ++j)
          if (reach(k, j)) reach(i, j) = 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!reach(i, j)) throw std::invalid_argument("process: Markov chain is reducible");
}

Eigen::VectorXd stationaryOf(const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  // solve pi (P - I) = 0 with sum(pi) = 1
  Eigen::MatrixXd A(n + 1, n);
  A.topRows(n) = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs[n] = 1.0;
  Eigen::VectorXd pi = A.colPivHouseholderQr().solve(rhs);
  return pi.cwiseMax(0.0) / pi.cwiseMax(0.0).sum();
}

}  // namespace

BaseProcess BaseProcess::iid(Eigen::VectorXd probabilities, std::uint64_t masterSeed) {
  checkProbabilityVector(probabilities);
  BaseProcess p;
  p.kind_ = Kind::IID;
  p.seed_ = masterSeed;
  p.stationary_ = std::move(probabilities);
  return p;
}

BaseProcess BaseProcess::markov(Eigen::MatrixXd transition, std::uint64_t masterSeed) {
  if (transition.rows() == 0 || transition.rows() != transition.cols())
    throw std::invalid_argument("process: transition matrix must be square and nonempty");
  for (int i = 0; i < transition.rows(); ++i)
    checkProbabilityVector(transition.row(i).transpose());
  checkIrreducible(transition);
  BaseProcess p;
  p.kind_ = Kind::Markov;
  p.seed_ = masterSeed;
  p.stationary_ = stationaryOf(transition);
  p.transition_ = std::move(transition);
  return p;
}

double BaseProcess::uniformAt(std::int64_t t) const {
  return uniform01(keyedCounter(seed_, static_cast<std::uint64_t>(t)));
}

int BaseProcess::stepFrom(int state, double u) const {
  double acc = 0.0;
  const int n = numSymbols();
  for (int j = 0; j < n; ++j) {
    acc += transition_(state, j);
    if (u < acc) return j;
  }
  return n - 1;
}

int BaseProcess::symbolAt(std::int64_t t) const {
  const int n = numSymbols();
  if (kind_ == Kind::IID) {
    const double u = uniformAt(t);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      acc += stationary_[j];
      if (u < acc) return j;
    }
    return n - 1;
  }
  // Markov: iterate the random transition function from a window far enough
  // back that every starting state has coalesced; the result is then a pure
  // function of (seed, t) and stationary in law.
  for (int horizon = 64; horizon <= 4096; horizon *= 2) {
    std::vector<int> states(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) states[static_cast<std::size_t>(s)] = s;
    for (std::int64_t tau = t - horizon + 1; tau <= t; ++tau) {
      const double u = uniformAt(tau);
      for (auto& s : states) s = stepFrom(s, u);
      bool coalesced = true;
      for (const auto& s : states)
        if (s != states[0]) {
          coalesced = false;
          break;
        }
      if (coalesced && tau < t) {
        // finish the remaining steps on the single survivor
        int s = states[0];
        for (std::int64_t r = tau + 1; r <= t; ++r) s = stepFrom(s, uniformAt(r));
        return s;
      }
    }
    bool coalesced = true;
    for (const auto& s : states)
      if (s != states[0]) coalesced = false;
    if (coalesced) return states[0];
  }
  throw std::runtime_error("process: Markov chain did not coalesce (periodic chain?)");
}

std::vector<int> BaseProcess::window(std::int64_t anchor, std::int64_t from, std::int64_t to) const {
  if (from > to) throw std::invalid_argument("process: window requires from <= to");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(to - from + 1));
  for (std::int64_t t = from; t <= to; ++t) out.push_back(symbolAt(anchor + t));
  return out;
}

BaseProcess::LogAverage BaseProcess::logAverage(const std::vector<double>& g, std::int64_t n,
                                                std::int64_t anchor) const {
  if (n < 1) throw std::invalid_argument("process: sample length must be >= 1");
  if (static_cast<int>(g.size()) != numSymbols())
    throw std::invalid_argument("process: per-symbol value count mismatch");
  for (double x : g)
    if (x <= 0.0) throw std::invalid_argument("process: log average needs positive values");
  LogAverage out{0.0, 0.0};
  for (int i = 0; i < numSymbols(); ++i)
    out.exact += stationary_[i] * std::log(g[static_cast<std::size_t>(i)]);
  for (std::int64_t t = 0; t < n; ++t)
    out.empirical += std::log(g[static_cast<std::size_t>(symbolAt(anchor + t))]);
  out.empirical /= static_cast<double>(n);
  return out;
}

}  // namespace saussol
