#ifndef CEVSIM_PATHS_HPP
#define CEVSIM_PATHS_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "cevsim/rng.hpp"

namespace cevsim {

struct OddStepCount : std::runtime_error {
    explicit OddStepCount(const std::string& what) : std::runtime_error(what) {}
};

struct IndivisibleStepCount : std::runtime_error {
    explicit IndivisibleStepCount(const std::string& what) : std::runtime_error(what) {}
};

// Uniform grid on [0, horizon] with n_steps intervals of size dt.
struct GridSpec {
    double horizon = 1.0;
    std::uint64_t n_steps = 1;

    double dt() const { return horizon / static_cast<double>(n_steps); }
};

// Identifies one trajectory's random stream: a global experiment seed plus a
// trajectory id. Distinct experiment phases must use disjoint trajectory id
// ranges (high bits of `trajectory` are conventionally a stream tag).
struct SeedId {
    std::uint64_t seed = 0;
    std::uint64_t trajectory = 0;

    bool operator==(const SeedId&) const = default;
};

// Brownian increments W_{t_{k+1}} - W_{t_k} on a grid. Each increment is an
// addressable pure function of (seed, trajectory, step index), so generation
// order and thread count cannot change the values.
struct BrownianGrid {
    GridSpec spec;
    SeedId seed_id;
    std::vector<double> increments;
};

BrownianGrid generate(const GridSpec& spec, SeedId seed_id);

// Pairwise sums of consecutive increments: the same Brownian path seen on the
// grid with half as many steps. Throws OddStepCount when n_steps is odd.
BrownianGrid coarsen(const BrownianGrid& grid);

// The chain [g, coarsen(g), coarsen^2(g), ...] of n_levels grids, all
// realizations of one underlying path. Throws IndivisibleStepCount unless
// n_steps is divisible by 2^(n_levels-1).
std::vector<BrownianGrid> restrict_to_ladder(const BrownianGrid& grid, int n_levels);

// Raw little-endian dump for cross-language comparison.
// Layout: u64 n_steps, f64 dt, u64 seed, u64 trajectory, then n_steps f64
// increments.
void dump_increments(const BrownianGrid& grid, const std::filesystem::path& file);
BrownianGrid load_increments(const std::filesystem::path& file);

} // namespace cevsim

#endif // CEVSIM_PATHS_HPP
