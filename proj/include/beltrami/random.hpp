#pragma once

#include <cstdint>
#include <string_view>

namespace beltrami {

/// Deterministic random stream. Consumers derive independent substreams
/// from (seed, purpose label, index) so that parallel work reproduces the
/// sequential result bit for bit.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t state) : state_(state) {}

    static RandomStream derive(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller.
    double normal();

private:
    std::uint64_t state_;
};

} // namespace beltrami
