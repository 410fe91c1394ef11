#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace saussol {

// Counter-mode generator: a pure function of (key, counter), so any index of a
// stream can be evaluated without history.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t keyedCounter(std::uint64_t key, std::uint64_t counter) {
  return splitmix64(splitmix64(key) ^ splitmix64(counter * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
}

inline double uniform01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Small deterministic stream for drawing a sequence of uniforms from one key.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}
  double next() { return uniform01(keyedCounter(key_, counter_++)); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }
  std::uint64_t nextBits() { return keyedCounter(key_, counter_++); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic block-parallel loop: the partition of [0, n) into blocks is a
// function of n alone, and every block writes disjoint state, so results do
// not depend on the thread count.
inline void parallelFor(long n, int threads, const std::function<void(long, long)>& body) {
  if (n <= 0) return;
  if (threads <= 1 || n < 1024) {
    body(0, n);
    return;
  }
  const long blocks = std::min<long>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(blocks));
  for (long b = 0; b < blocks; ++b) {
    const long lo = n * b / blocks;
    const long hi = n * (b + 1) / blocks;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace saussol
