#ifndef KSAMPLE_RNG_HPP_
#define KSAMPLE_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace ksample {

std::uint64_t splitmix64(std::uint64_t& state);

// Mixes a root seed with a path of integers into a new 64-bit seed.
std::uint64_t derive_seed(std::uint64_t root,
                          std::initializer_list<std::uint64_t> path);

// Seedable deterministic generator. Substreams derived from a root seed and a
// path such as (step, prompt) are statistically independent of each other,
// so training results do not depend on iteration order.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  static Rng substream(std::uint64_t root,
                       std::initializer_list<std::uint64_t> path) {
    return Rng(derive_seed(root, path));
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();
  // Uniform integer on [0, n).
  std::size_t uniform_index(std::size_t n);
  // Inverse-CDF draw from a probability vector.
  std::size_t categorical(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ksample

#endif  // KSAMPLE_RNG_HPP_
