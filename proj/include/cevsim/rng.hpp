#ifndef CEVSIM_RNG_HPP
#define CEVSIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace cevsim::rng {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
// Stateless: the output block is a pure function of (counter, key), which is
// what makes draws addressable by (seed, stream, index) and therefore
// reproducible under any parallel schedule.
struct Philox4x32Block {
    std::uint32_t x[4];
};

namespace detail {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t c1 = c[1];
    const std::uint32_t c3 = c[3];
    c[0] = hi1 ^ c1 ^ k0;
    c[1] = lo1;
    c[2] = hi0 ^ c3 ^ k1;
    c[3] = lo0;
}

} // namespace detail

inline Philox4x32Block philox4x32_10(std::uint32_t c0, std::uint32_t c1,
                                     std::uint32_t c2, std::uint32_t c3,
                                     std::uint32_t k0, std::uint32_t k1) {
    std::uint32_t c[4] = {c0, c1, c2, c3};
    for (int r = 0; r < 10; ++r) {
        detail::philox_round(c, k0, k1);
        k0 += detail::kPhiloxW0;
        k1 += detail::kPhiloxW1;
    }
    return Philox4x32Block{{c[0], c[1], c[2], c[3]}};
}

// Standard normal density and upper-tail CDF helpers.
inline double normal_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) {
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    return 0.5 * std::erfc(-x * inv_sqrt2);
}

// Inverse of the standard normal CDF. A rational first guess (Abramowitz &
// Stegun 26.2.22) is polished with two Halley steps against erfc, which
// brings the result to full double precision. Deterministic, no loops of
// data-dependent length, hence a fixed cost per draw.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal_quantile: p must lie in (0,1)");
    }
    if (p == 0.5) {
        return 0.0;
    }
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    const double q = p < 0.5 ? p : 1.0 - p; // lower-tail mass, in (0, 0.5)
    const double t = std::sqrt(-2.0 * std::log(q));
    double x = t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t));
    for (int i = 0; i < 2; ++i) {
        // Solve 0.5*erfc(x/sqrt(2)) = q for the positive-magnitude root.
        const double u = 0.5 * std::erfc(x * inv_sqrt2) - q;
        const double d = u / normal_pdf(x);
        x += d / (1.0 - 0.5 * x * d);
    }
    return p < 0.5 ? -x : x;
}

// Addressable random stream: every draw is identified by a 64-bit stream id
// (trajectory) and a 64-bit index (step) under a fixed 64-bit seed.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Uniform on the open interval (0,1); 53 significant bits.
    double uniform(std::uint64_t stream, std::uint64_t index) const {
        const Philox4x32Block b = philox4x32_10(
            static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
            static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
            static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32));
        const std::uint64_t bits =
            (static_cast<std::uint64_t>(b.x[1]) << 32) | b.x[0];
        return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // Standard normal draw via inverse CDF of the uniform output.
    double gaussian(std::uint64_t stream, std::uint64_t index) const {
        return normal_quantile(uniform(stream, index));
    }

private:
    std::uint64_t seed_;
};

} // namespace cevsim::rng

#endif // CEVSIM_RNG_HPP
