#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace cams {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded random stream with counter-based splitting. Substreams are derived
/// from the parent key and an id path only, never from the parent's draw
/// position, so any stream in a run is reproducible from (seed, path).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed)
        : key_(splitmix64(seed ^ 0x6a09e667f3bcc909ULL)), engine_(key_) {}

    RngStream substream(std::uint64_t id) const {
        return RngStream(derive_key(key_, id), key_tag{});
    }

    RngStream substream(std::initializer_list<std::uint64_t> path) const {
        std::uint64_t k = key_;
        for (std::uint64_t id : path) k = derive_key(k, id);
        return RngStream(k, key_tag{});
    }

    std::uint64_t key() const { return key_; }

    /// Uniform on (0,1); never returns an endpoint, safe under log().
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t bits() { return engine_(); }

    /// Standard normal via Box-Muller; one fresh pair of uniforms per call.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Circularly-symmetric CN(0,1): unit total variance, 1/2 per component.
    std::complex<double> cnormal() {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-std::log(u1));
        return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
    }

    /// Gamma(alpha, 1) by Marsaglia-Tsang squeeze.
    double gamma(double alpha) {
        if (alpha < 1.0) {
            const double u = uniform();
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / (3.0 * std::sqrt(d));
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

private:
    struct key_tag {};
    RngStream(std::uint64_t key, key_tag) : key_(key), engine_(key) {}

    static std::uint64_t derive_key(std::uint64_t key, std::uint64_t id) {
        return splitmix64(key ^ splitmix64(id + 0x2545f4914f6cdd1dULL));
    }

    std::uint64_t key_;
    std::mt19937_64 engine_;
};

/// Substream purpose ids, fixed so every consumer draws from its own lane.
namespace stream {
inline constexpr std::uint64_t prior = 1;
inline constexpr std::uint64_t codebook = 2;
inline constexpr std::uint64_t sensor_noise = 3;
inline constexpr std::uint64_t user_noise = 4;
inline constexpr std::uint64_t channel_phase = 5;
inline constexpr std::uint64_t trial = 6;
inline constexpr std::uint64_t info_density = 7;
inline constexpr std::uint64_t band_check = 8;
}  // namespace stream

}  // namespace cams
