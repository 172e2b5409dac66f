#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gridnav {

/// Derive an independent sub-seed from a master seed and a stream tag, so the
/// environment, the agent, and weight init each get their own stream and a
/// change in one consumer never shifts another.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream);

/// Seeded engine for the named stream.
std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream);

}  // namespace gridnav
