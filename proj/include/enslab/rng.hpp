// Seed derivation and positivity-constrained normal draws.
//
// Every operation in the library takes an explicit seed; derived streams are
// obtained by mixing the master seed with fixed purpose tags so that archive
// results are independent of execution order and thread schedule.
#pragma once

#include <cstdint>
#include <random>

namespace enslab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream tags keep unrelated purposes on non-overlapping seed sequences.
enum class StreamTag : std::uint64_t {
    truth = 1,
    observation = 2,
    climatology = 3,
    kappa_fit = 4,
    ensemble = 5,
    test_archive = 6,
    lap_archive = 7,
    sap_archive = 8,
    sweep = 9,
    misc = 10,
};

inline std::uint64_t derive_seed(std::uint64_t master, StreamTag tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = master;
    splitmix64(s);
    s ^= static_cast<std::uint64_t>(tag) * 0x9e3779b97f4a7c15ULL;
    splitmix64(s);
    s ^= a * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    splitmix64(s);
    s ^= b * 0xff51afd7ed558ccdULL;
    return splitmix64(s);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(seed); }

// N(mean, sd^2) draw redrawn until strictly positive.
inline double normal_positive(std::mt19937_64& eng, double mean, double sd) {
    if (sd == 0.0) return mean;
    std::normal_distribution<double> dist(mean, sd);
    double v = dist(eng);
    while (!(v > 0.0)) v = dist(eng);
    return v;
}

}  // namespace enslab
