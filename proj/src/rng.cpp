#include "gridnav/rng.hpp"

namespace gridnav {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream) {
    // FNV-1a over the tag, then two splitmix rounds against the seed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : stream) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(seed ^ h) + h);
}

std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream) {
    return std::mt19937_64(mix_seed(seed, stream));
}

}  // namespace gridnav
