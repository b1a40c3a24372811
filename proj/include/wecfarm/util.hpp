#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace wecfarm {

// Seeded RNG wrapper. All distributions are derived from mt19937_64 draws
// through explicit transforms so that streams are identical across
// platforms and standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller (one value per call, cached pair)
  double normal();

  // integer in [0, n)
  std::size_t index(std::size_t n);

  // k distinct indices from [0, n), order randomized
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

// Runs fn(i) for i in [0, n). Worker count is min(WECFARM_THREADS,
// hardware_concurrency); single-threaded fallback when n or workers is 1.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Worker cap resolved from the WECFARM_THREADS environment variable.
unsigned worker_count();

// FNV-1a, used for config hashes and bundle checksums.
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

std::vector<double> linspace(double lo, double hi, std::size_t n);

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace wecfarm
