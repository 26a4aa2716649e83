#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace spdelab::rng {

/**
 * Philox4x64-10 counter-based generator.
 *
 * Stateless: every 256-bit counter value maps to four independent 64-bit
 * outputs under a 128-bit key. Keying by (seed, stream_id) and countering by
 * (step_index, block) makes any draw addressable, so replicas and time steps
 * can be generated in any order, on any thread, with identical results.
 */
struct Philox4x64 {
    static constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t M1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t W1 = 0xBB67AE8584CAA73BULL;

    static inline void mulhilo(std::uint64_t a, std::uint64_t b,
                               std::uint64_t& hi, std::uint64_t& lo) {
        unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
        hi = static_cast<std::uint64_t>(p >> 64);
        lo = static_cast<std::uint64_t>(p);
    }

    static std::array<std::uint64_t, 4> block(std::uint64_t key0, std::uint64_t key1,
                                              std::array<std::uint64_t, 4> ctr) {
        std::uint64_t k0 = key0, k1 = key1;
        for (int round = 0; round < 10; ++round) {
            std::uint64_t hi0, lo0, hi1, lo1;
            mulhilo(M0, ctr[0], hi0, lo0);
            mulhilo(M1, ctr[2], hi1, lo1);
            ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
            k0 += W0;
            k1 += W1;
        }
        return ctr;
    }
};

inline double u64_to_open01(std::uint64_t x) {
    // (0,1): 53-bit mantissa draw shifted off zero
    return (static_cast<double>(x >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

/**
 * Addressable stream of standard normal draws.
 *
 * One Philox block yields four uniforms, Box-Muller turns them into four
 * normals. normal(i) is a pure function of (seed, stream_id, step_index, i).
 */
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t step_index)
        : seed_(seed), stream_(stream_id), step_(step_index) {}

    double normal(std::uint64_t i) const {
        const std::uint64_t blk = i / 4, lane = i % 4;
        auto u = Philox4x64::block(seed_, stream_, {step_, blk, 0x73706465ULL, 0});
        const double u1 = u64_to_open01(u[lane < 2 ? 0 : 2]);
        const double u2 = u64_to_open01(u[lane < 2 ? 1 : 3]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 6.283185307179586476925286766559 * u2;
        return (lane % 2 == 0) ? r * std::cos(th) : r * std::sin(th);
    }

    // Fills out[0..n) with normals 0..n-1, four at a time.
    void fill_normals(double* out, std::uint64_t n) const {
        std::uint64_t i = 0;
        for (std::uint64_t blk = 0; i < n; ++blk) {
            auto u = Philox4x64::block(seed_, stream_, {step_, blk, 0x73706465ULL, 0});
            const double u1 = u64_to_open01(u[0]), u2 = u64_to_open01(u[1]);
            const double u3 = u64_to_open01(u[2]), u4 = u64_to_open01(u[3]);
            const double r1 = std::sqrt(-2.0 * std::log(u1));
            const double t1 = 6.283185307179586476925286766559 * u2;
            const double r2 = std::sqrt(-2.0 * std::log(u3));
            const double t2 = 6.283185307179586476925286766559 * u4;
            const double q[4] = {r1 * std::cos(t1), r1 * std::sin(t1),
                                 r2 * std::cos(t2), r2 * std::sin(t2)};
            for (int lane = 0; lane < 4 && i < n; ++lane, ++i) out[i] = q[lane];
        }
    }

private:
    std::uint64_t seed_, stream_, step_;
};

// Cheap deterministic scalar sequence for sampled-property checks and
// parameter draws (not used for noise synthesis).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : s_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform01() { return u64_to_open01(next()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
private:
    std::uint64_t s_;
};

}  // namespace spdelab::rng
