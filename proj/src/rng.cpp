#include "sphembed/rng.hpp"

#include <cmath>
#include <numbers>

namespace sphembed {

namespace {

std::uint64_t splitmix64(std::uint64_t &x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto &s : state_)
        s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal(double mean, double stddev) {
    if (stddev < 0)
        throw contract_error("normal draw with negative stddev");
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0)
        u1 = 0x1.0p-53;
    const double z = std::sqrt(-2.0 * std::log(u1)) *
                     std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0)
        throw contract_error("uniform_index over empty range");
    // rejection sampling for an unbiased draw
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

Tensor Rng::normal_tensor(Shape shape, double mean, double stddev) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = normal(mean, stddev);
    return t;
}

Rng Rng::child(std::uint64_t stream) const {
    std::uint64_t sm = seed_ ^ (0xda3e39cb94b95bdbULL * (stream + 1));
    return Rng(splitmix64(sm));
}

Tensor draw_normal(Rng &rng, Shape shape, double mean, double stddev) {
    return rng.normal_tensor(std::move(shape), mean, stddev);
}

} // namespace sphembed
