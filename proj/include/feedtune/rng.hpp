#pragma once

#include <cstdint>
#include <vector>

namespace feedtune {

/// Deterministic splittable generator (splitmix64 core).
///
/// Identical seeds give identical streams, independent of platform and of how
/// many threads consume derived children. `child(k)` derives a statistically
/// independent stream without advancing the parent, which is the mechanism for
/// deterministic parallel sampling.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double next_double();

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

    /// Standard normal via the Marsaglia polar method.
    double next_gaussian();

    /// Independent child stream keyed by `stream_id`; parent state unchanged.
    SeededRng child(std::uint64_t stream_id) const;

    /// Child stream drawn from the parent (advances the parent once).
    SeededRng split();

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Fills `out` with standard normals from `rng`.
void fill_gaussian(SeededRng& rng, std::vector<double>& out);

} // namespace feedtune
