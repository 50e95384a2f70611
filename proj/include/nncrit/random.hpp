#pragma once

// Counter-based random streams. A stream is addressed by (seed, stream id);
// draws advance a 64-bit block counter, so two streams with different ids
// feed disjoint inputs to the same keyed bijection and never overlap.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace nncrit::simlab {

/// Philox4x32 with 10 rounds (Salmon et al. 2011 constants).
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

/// UniformRandomBitGenerator over one Philox stream.
class StreamEngine {
public:
    using result_type = std::uint64_t;

    StreamEngine(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (slot_ == 2) refill();
        return buffer_[slot_++];
    }

    std::uint64_t blocks_consumed() const { return counter_; }

private:
    void refill() {
        const Philox4x32::Block ctr{static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                    static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        const auto out = Philox4x32::generate(ctr, key_);
        buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
        buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
        ++counter_;
        slot_ = 0;
    }

    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int slot_ = 2;
};

/// Variate generators on top of a StreamEngine. Implemented here rather than
/// through <random> distributions so that draws do not depend on the
/// standard library's distribution algorithms.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}

    std::uint64_t bits() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1).
    double uniform_open() {
        double u;
        do u = uniform();
        while (u == 0.0);
        return u;
    }

    /// Standard normal via the Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    double exponential(double mean) { return -mean * std::log(uniform_open()); }

    /// Von Mises(mu, kappa) on [0, 2pi), Best & Fisher (1979) rejection.
    double von_mises(double mu, double kappa) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        if (kappa < 1e-8) return two_pi * uniform();
        const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
        const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
        const double r = (1.0 + rho * rho) / (2.0 * rho);
        double f;
        for (;;) {
            const double z = std::cos(std::numbers::pi * uniform());
            f = (1.0 + r * z) / (r + z);
            const double c = kappa * (r - f);
            const double u2 = uniform_open();
            if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) break;
        }
        const double sign = uniform() < 0.5 ? -1.0 : 1.0;
        double angle = mu + sign * std::acos(std::clamp(f, -1.0, 1.0));
        angle = std::fmod(angle, two_pi);
        if (angle < 0.0) angle += two_pi;
        if (angle >= two_pi) angle = 0.0;
        return angle;
    }

private:
    StreamEngine engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline constexpr std::uint32_t kRoleData = 1;
inline constexpr std::uint32_t kRoleNoise = 2;
inline constexpr std::uint32_t kRoleFit = 3;

/// Stream id for replicate `replicate` of role `role`. Roles keep, e.g., a
/// replicate's data and its noise on separate streams.
constexpr std::uint64_t stream_id(std::uint64_t replicate, std::uint32_t role) {
    return (replicate << 8) | (role & 0xFFu);
}

}  // namespace nncrit::simlab
