#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace opsamp {

/// Seeded generator used for every randomized quantity ("mt19937_64/box-muller").
///
/// Uniform and normal variates are derived by hand from the raw 64-bit engine
/// output so that streams are identical across standard library vendors.
class Rng {
public:
    static constexpr const char* kName = "mt19937_64/box-muller";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Circular complex normal with E|z|^2 = 1.
    std::complex<double> complex_normal()
    {
        const double re = normal() * std::numbers::sqrt2 / 2.0;
        const double im = normal() * std::numbers::sqrt2 / 2.0;
        return {re, im};
    }

    /// Integer uniformly drawn from [lo, hi].
    long long integer(long long lo, long long hi)
    {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<long long>(engine_() % span);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace opsamp
