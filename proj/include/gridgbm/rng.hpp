#pragma once

// Per-path random substreams: path i of a run with seed s always sees the same
// normals, independent of thread count or evaluation order.

#include <cstdint>
#include <random>

namespace gridgbm {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t pathIndex, std::uint64_t stream = 0)
        : engine_(splitmix64(splitmix64(seed ^ splitmix64(stream)) + pathIndex)) {}

    double normal() { return normal_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace gridgbm
