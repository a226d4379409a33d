#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace debtav {

/// Deterministic random stream. Every draw is computed from the raw
/// mt19937_64 output with fixed arithmetic, so sequences are identical across
/// standard libraries. Independent streams are keyed by (seed, stream index).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();                         ///< in [0, 1)
  double normal();                          ///< standard normal
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t below(std::uint64_t bound); ///< uniform in [0, bound)

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace debtav
