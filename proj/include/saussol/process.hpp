#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace saussol {

// Two-sided stationary symbol process driving the map choice. Symbols at any
// absolute time are pure functions of (master seed, time), so past windows
// (negative times) are as cheap and reproducible as future ones.
class BaseProcess {
 public:
  enum class Kind { IID, Markov };

  static BaseProcess iid(Eigen::VectorXd probabilities, std::uint64_t masterSeed);
  static BaseProcess markov(Eigen::MatrixXd transition, std::uint64_t masterSeed);

  Kind kind() const { return kind_; }
  int numSymbols() const { return static_cast<int>(stationary_.size()); }
  std::uint64_t masterSeed() const { return seed_; }
  // Stationary symbol distribution (the probability vector for IID).
  const Eigen::VectorXd& stationary() const { return stationary_; }
  const Eigen::MatrixXd& transition() const { return transition_; }

  int symbolAt(std::int64_t t) const;
  // Symbols at times anchor+from .. anchor+to (inclusive); the base shift acts
  // as an index shift on the anchor.
  std::vector<int> window(std::int64_t anchor, std::int64_t from, std::int64_t to) const;

  struct LogAverage {
    double exact;      // sum_i pi_i log g_i under the stationary law
    double empirical;  // (1/n) sum log g(symbol_t) over a realized path
  };
  // Requires g[i] > 0 for all symbols and n >= 1.
  LogAverage logAverage(const std::vector<double>& g, std::int64_t n,
                        std::int64_t anchor = 0) const;

 private:
  BaseProcess() = default;
  double uniformAt(std::int64_t t) const;
  int stepFrom(int state, double u) const;

  Kind kind_ = Kind::IID;
  std::uint64_t seed_ = 0;
  Eigen::VectorXd stationary_;
  Eigen::MatrixXd transition_;  // rows: from-state; empty for IID
};

}  // namespace saussol
