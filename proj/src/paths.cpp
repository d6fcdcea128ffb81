#include "cevsim/paths.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace cevsim {

BrownianGrid generate(const GridSpec& spec, SeedId seed_id) {
    if (spec.n_steps < 1) {
        throw std::invalid_argument("generate: n_steps must be >= 1");
    }
    if (!(spec.horizon > 0.0)) {
        throw std::invalid_argument("generate: horizon must be positive");
    }
    const rng::CounterRng gen(seed_id.seed);
    const double sqrt_dt = std::sqrt(spec.dt());
    BrownianGrid grid{spec, seed_id, std::vector<double>(spec.n_steps)};
    for (std::uint64_t k = 0; k < spec.n_steps; ++k) {
        grid.increments[k] = sqrt_dt * gen.gaussian(seed_id.trajectory, k);
    }
    return grid;
}

BrownianGrid coarsen(const BrownianGrid& grid) {
    if (grid.spec.n_steps % 2 != 0) {
        std::ostringstream msg;
        msg << "coarsen: n_steps = " << grid.spec.n_steps << " is odd";
        throw OddStepCount(msg.str());
    }
    const std::uint64_t half = grid.spec.n_steps / 2;
    BrownianGrid out{GridSpec{grid.spec.horizon, half}, grid.seed_id,
                     std::vector<double>(half)};
    for (std::uint64_t k = 0; k < half; ++k) {
        out.increments[k] = grid.increments[2 * k] + grid.increments[2 * k + 1];
    }
    return out;
}

std::vector<BrownianGrid> restrict_to_ladder(const BrownianGrid& grid, int n_levels) {
    if (n_levels < 1) {
        throw std::invalid_argument("restrict_to_ladder: n_levels must be >= 1");
    }
    const std::uint64_t divisor = std::uint64_t{1} << (n_levels - 1);
    if (grid.spec.n_steps % divisor != 0) {
        std::ostringstream msg;
        msg << "restrict_to_ladder: n_steps = " << grid.spec.n_steps
            << " not divisible by 2^" << (n_levels - 1);
        throw IndivisibleStepCount(msg.str());
    }
    std::vector<BrownianGrid> ladder;
    ladder.reserve(n_levels);
    ladder.push_back(grid);
    for (int l = 1; l < n_levels; ++l) {
        ladder.push_back(coarsen(ladder.back()));
    }
    return ladder;
}

namespace {

template <typename T>
void write_raw(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T read_raw(std::ifstream& in) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(value));
    return value;
}

} // namespace

void dump_increments(const BrownianGrid& grid, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw std::runtime_error("dump_increments: cannot open " + file.string());
    }
    write_raw<std::uint64_t>(out, grid.spec.n_steps);
    write_raw<double>(out, grid.spec.dt());
    write_raw<std::uint64_t>(out, grid.seed_id.seed);
    write_raw<std::uint64_t>(out, grid.seed_id.trajectory);
    out.write(reinterpret_cast<const char*>(grid.increments.data()),
              static_cast<std::streamsize>(grid.increments.size() * sizeof(double)));
    if (!out) {
        throw std::runtime_error("dump_increments: short write to " + file.string());
    }
}

BrownianGrid load_increments(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw std::runtime_error("load_increments: cannot open " + file.string());
    }
    BrownianGrid grid;
    grid.spec.n_steps = read_raw<std::uint64_t>(in);
    const double dt = read_raw<double>(in);
    grid.spec.horizon = dt * static_cast<double>(grid.spec.n_steps);
    grid.seed_id.seed = read_raw<std::uint64_t>(in);
    grid.seed_id.trajectory = read_raw<std::uint64_t>(in);
    grid.increments.resize(grid.spec.n_steps);
    in.read(reinterpret_cast<char*>(grid.increments.data()),
            static_cast<std::streamsize>(grid.increments.size() * sizeof(double)));
    if (!in) {
        throw std::runtime_error("load_increments: short read from " + file.string());
    }
    return grid;
}

} // namespace cevsim
