#include "airgam/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "airgam/probability.hpp"

namespace airgam {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    // Warm the 64-bit engine with a full splitmix-derived seed sequence.
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s))};
    engine_.seed(seq);
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    const std::uint64_t base = splitmix64(s);
    std::uint64_t t = base ^ (0xA0761D6478BD642FULL * (index + 1));
    return splitmix64(t);
}

Rng Rng::substream(std::uint64_t master, std::uint64_t index) {
    return Rng(substream_seed(master, index));
}

double Rng::uniform() {
    return (engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    for (;;) {
        const double u = 2.0 * uniform() - 1.0;
        const double v = 2.0 * uniform() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

double Rng::gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) {
        throw std::invalid_argument("Rng::gamma: shape and scale must be > 0");
    }
    if (shape < 1.0) {
        // Boost to shape + 1 and correct with a power of a uniform.
        const double u = std::max(uniform(), 1e-300);
        return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    // Marsaglia–Tsang squeeze method.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v * scale;
        }
    }
}

long Rng::poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean)) {
        throw std::invalid_argument("Rng::poisson: mean must be finite and >= 0");
    }
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        // Inversion by multiplication of uniforms.
        const double limit = std::exp(-mean);
        double prod = 1.0;
        long k = -1;
        do {
            prod *= uniform();
            ++k;
        } while (prod > limit);
        return k;
    }
    // Hörmann's PTRD transformed-rejection sampler.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        double u = uniform() - 0.5;
        const double v = uniform();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        if (lhs <= kf * log_mean - mean - log_gamma(kf + 1.0)) {
            return static_cast<long>(kf);
        }
    }
}

long Rng::count_with_dispersion(double mean, double phi) {
    if (!(phi >= 1.0)) {
        throw std::invalid_argument("Rng::count_with_dispersion: phi must be >= 1");
    }
    if (mean <= 0.0) return 0;
    if (phi == 1.0) return poisson(mean);
    // Gamma–Poisson mixture: size r = mean / (phi - 1) gives Var = phi * mean.
    const double r = mean / (phi - 1.0);
    const double lambda = gamma(r, phi - 1.0);
    return poisson(lambda);
}

}  // namespace airgam
