#pragma once

#include <cstdint>

#include "sphembed/tensor.hpp"

namespace sphembed {

/// Seedable counter-free PRNG: xoshiro256** with splitmix64 seeding.
/// The algorithm is fixed here so that identical seeds give identical
/// streams on every platform, independent of the standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform();
    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);
    /// Box-Muller normal draw; two uniforms consumed per call.
    double normal(double mean, double stddev);
    /// Uniform integer in [0, n).
    std::size_t uniform_index(std::size_t n);

    Tensor normal_tensor(Shape shape, double mean, double stddev);

    /// Independent child stream, keyed by `stream`. Used for
    /// per-sample augmentation so samples can be processed in any order.
    Rng child(std::uint64_t stream) const;

  private:
    std::uint64_t state_[4];
    std::uint64_t seed_;
};

/// draw_normal as a free function over an existing stream.
Tensor draw_normal(Rng &rng, Shape shape, double mean, double stddev);

} // namespace sphembed
