#pragma once

#include <array>
#include <cstdint>

namespace panelkit {

/// SplitMix64 step; used to expand seeds and to derive per-replication sub-seeds.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Sub-seed for stream `index` of a master seed; independent of evaluation order.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    std::uint64_t state = master ^ (0xD1B54A32D192ED03ULL * (index + 1));
    return splitmix64(state);
}

/**
 * @brief xoshiro256** generator (Blackman & Vigna) seeded through SplitMix64.
 *
 * Uniforms take the top 53 bits of each output. Normals use Marsaglia's polar
 * method, caching the second variate of each accepted pair. Only integer
 * arithmetic plus std::log and std::sqrt are involved, so streams are
 * reproducible across platforms and easy to port.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    [[nodiscard]] std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1).
    [[nodiscard]] double uniform() noexcept;
    /// Standard normal.
    [[nodiscard]] double normal() noexcept;
    [[nodiscard]] double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

private:
    std::array<std::uint64_t, 4> s_{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace panelkit
