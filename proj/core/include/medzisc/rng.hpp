#ifndef MEDZISC_RNG_HPP
#define MEDZISC_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace medzisc {

/*
 * Every random quantity is drawn from its own stream. A stream is an mt19937_64
 * seeded with a SplitMix64 hash of (run seed, path...), where the path names the
 * purpose and the indices involved, e.g. (replicate, kCells, subject, gene).
 * Streams never share state, so results do not depend on which thread or in
 * which order they are consumed. Distributions come from Boost.Random, whose
 * algorithms are fixed across platforms (unlike <random> distributions).
 */
using Engine = std::mt19937_64;

namespace stream {
inline constexpr std::uint64_t kSubjects = 1;
inline constexpr std::uint64_t kTruth = 2;
inline constexpr std::uint64_t kGenes = 3;
inline constexpr std::uint64_t kCells = 4;
inline constexpr std::uint64_t kOutcome = 5;
inline constexpr std::uint64_t kAnalysis = 6;
}  // namespace stream

std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

inline Engine make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return Engine(derive_seed(seed, path));
}

/// Uniformly random permutation of 0..n-1 (Fisher-Yates).
std::vector<std::size_t> random_permutation(std::size_t n, Engine& engine);

}  // namespace medzisc

#endif  // MEDZISC_RNG_HPP
