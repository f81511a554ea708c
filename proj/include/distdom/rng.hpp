#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace distdom {

/// All randomness goes through std::mt19937_64, whose output sequence is
/// fixed by the C++ standard. The draw helpers below avoid the
/// implementation-defined std:: distributions so that artifacts are
/// byte-identical across standard libraries.
using Rng = std::mt19937_64;

/// SplitMix64 finaliser; derives independent stream seeds from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Uniform integer in [0, n) by rejection sampling. n must be positive.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Uniform integer in [lo, hi].
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Uniform double in (0, 1].
double uniform01_open_low(Rng& rng);

std::string save_rng(const Rng& rng);
Rng load_rng(const std::string& state);

}  // namespace distdom
