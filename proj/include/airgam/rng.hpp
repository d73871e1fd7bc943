#pragma once

#include <cstdint>
#include <random>

namespace airgam {

/// Deterministic random source. Draw algorithms are implemented here rather
/// than through std:: distributions so that streams are reproducible across
/// standard-library versions. Substreams derived from (seed, index) pairs are
/// independent of execution order, which keeps threaded and serial runs
/// bit-identical.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    /// Independent substream for replicate `index` of a run seeded with `master`.
    static Rng substream(std::uint64_t master, std::uint64_t index);

    double uniform();  // [0, 1)
    double normal();   // standard normal, Marsaglia polar
    double gamma(double shape, double scale);
    long poisson(double mean);

    /// Count with E = mean, Var = phi * mean. phi = 1 degenerates to Poisson,
    /// phi > 1 is a negative binomial with size mean / (phi - 1).
    long count_with_dispersion(double mean, double phi);

  private:
    std::mt19937_64 engine_;
};

/// SplitMix64 step; used for seed mixing.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic per-replicate seed derived from (master, index).
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

}  // namespace airgam
