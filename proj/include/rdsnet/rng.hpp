#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace rdsnet {

/// xoshiro256** seeded through splitmix64.
///
/// The stream is a pure function of the 64-bit seed: identical seeds give
/// identical draws on every platform. All derived variates (normal, gamma,
/// index) are implemented here rather than through <random> distributions,
/// whose output is implementation defined.
class Rng {
public:
    static constexpr std::string_view algorithm = "xoshiro256**";

    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1).
    double uniform01() noexcept;

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n) noexcept;

    double normal() noexcept;

    /// Gamma(shape, rate); mean shape / rate.
    double gamma(double shape, double rate);

    bool bernoulli(double p) noexcept { return uniform01() < p; }

    /// Independent generator for sub-stream `stream`; depends only on
    /// (seed, stream), not on how far this generator has advanced.
    Rng substream(std::uint64_t stream) const noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

struct Uniform01 {};
struct StandardNormal {};
struct GammaDist {
    double shape;
    double rate;
};
using Distribution = std::variant<Uniform01, StandardNormal, GammaDist>;

/// Draws `count` variates; throws std::invalid_argument on bad parameters.
std::vector<double> rng_draws(Rng& rng, const Distribution& dist, std::size_t count);

}  // namespace rdsnet
