#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <utility>

namespace tagprof {

/// Counter-based generator: every draw is mix(key, counter), so a stream is
/// fully described by (key, counter) and can be split into independent child
/// streams without touching the parent's state. All sub-streams used by the
/// library are derived with split(), which keeps results independent of how
/// work is scheduled across threads.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept : key_(mix(seed ^ 0x9e3779b97f4a7c15ULL)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix(key_ + mix(counter_++)); }

    /// Independent child stream identified by `stream_id`.
    Rng split(std::uint64_t stream_id) const noexcept {
        Rng child(0);
        child.key_ = mix(key_ ^ mix(stream_id + 0x632be59bd9b4e019ULL));
        return child;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept {
        // Lemire's nearly-divisionless rejection method.
        std::uint64_t x = (*this)();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                x = (*this)();
                m = static_cast<__uint128_t>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal draw (Box-Muller, no cached second value).
    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

    /// Poisson draw; inversion for small means, normal approximation above 64.
    std::uint64_t poisson(double mean) noexcept {
        if (mean <= 0.0) {
            return 0;
        }
        if (mean > 64.0) {
            const double x = std::round(normal(mean, std::sqrt(mean)));
            return x < 0.0 ? 0 : static_cast<std::uint64_t>(x);
        }
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double prod = uniform();
        while (prod > limit) {
            ++k;
            prod *= uniform();
        }
        return k;
    }

    template <typename T>
    void shuffle(std::span<T> values) noexcept {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace tagprof
