#ifndef LATENTDAG_RANDOM_HPP
#define LATENTDAG_RANDOM_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace latentdag {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named stream (e.g. "bootstrap", replicate 7)
/// from a root seed. All randomness in the library flows through this.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view stream, std::uint64_t index = 0) {
    return Rng(derive_seed(root, stream, index));
}

/// 64-bit FNV-1a, used for content hashes in manifests.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull);

}  // namespace latentdag

#endif  // LATENTDAG_RANDOM_HPP
