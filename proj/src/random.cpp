#include "nextpm/random.hpp"

namespace nextpm {

namespace {

std::uint64_t fmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_keys(std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (auto k : keys) h = fmix(h ^ fmix(k));
    return h;
}

}  // namespace nextpm
