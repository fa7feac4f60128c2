#pragma once

#include <cstdint>
#include <random>

namespace panelcf {

/// All randomized components default to this seed so runs are reproducible
/// without any flags.
inline constexpr std::uint64_t kDefaultSeed = 12345;

/// splitmix64 finalizer. Used to derive statistically independent seeds for
/// sub-tasks (fold shuffles, per-cell benchmark work) from one user seed, so
/// results do not depend on evaluation order or parallelism.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return mix_seed(a ^ mix_seed(b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

// Stream tags keep the RNG streams of different components disjoint even
// when they share one user-visible seed.
namespace seed_tag {
inline constexpr std::uint64_t hz_folds = 0x485a464f4c445331ULL;
inline constexpr std::uint64_t mc_folds = 0x4d43464f4c445331ULL;
inline constexpr std::uint64_t vc_inner = 0x5643494e4e455231ULL;
inline constexpr std::uint64_t hc_inner = 0x4843494e4e455231ULL;
}  // namespace seed_tag

}  // namespace panelcf
