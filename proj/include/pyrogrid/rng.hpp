#pragma once

#include <cstdint>
#include <string_view>

namespace pyrogrid {

/// Counter-based random stream addressed by (root seed, label, two integer keys).
///
/// Every stochastic decision in the simulator draws from a stream keyed by the
/// module that owns it, the component it concerns, and the timestep. Streams are
/// stateless with respect to each other: adding components or reordering
/// evaluation never perturbs the draws of existing streams, which is what makes
/// seed-for-seed comparisons between mitigation variants meaningful.
class RngStream {
public:
    static RngStream keyed(std::uint64_t seed, std::string_view label,
                           std::uint64_t key_a = 0, std::uint64_t key_b = 0);

    /// Uniform draw in [0, 1). Advances the stream.
    double uniform();

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t uniform_below(std::uint64_t n);

    std::uint64_t next_u64();

private:
    explicit RngStream(std::uint64_t state) : state_(state) {}
    std::uint64_t state_;
};

} // namespace pyrogrid
