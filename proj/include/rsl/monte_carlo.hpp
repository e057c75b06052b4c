#pragma once

#include "rsl/geometry.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsl {

/// Running moments of one weight stream; merged with Chan's update.
struct Moments {
    long count = 0;
    double mean = 0.0;
    double m2 = 0.0;        ///< sum of squared deviations
    double mean_sq = 0.0;   ///< running mean of w^2
    double mean_quad = 0.0; ///< running mean of w^4

    void add(double w);
    void merge(const Moments& o);
    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double std_error() const { return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
    /// E[w^4] / E[w^2]^2, a heavy-tail diagnostic.
    double kurtosis() const;
};

struct McResult {
    long samples = 0;
    int chunks = 0;
    std::vector<Moments> full; ///< one entry per output
    std::vector<Moments> half; ///< first half of the chunks only
};

class NonFiniteSample : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One draw: fills `out` with the weights of every output.
using SampleFn = std::function<void(RngStream&, std::span<double> out)>;

/// Chunk size used for `samples` draws; depends on nothing else.
long chunk_size(long samples);

/// Runs `samples` draws in fixed chunks. Chunk c draws from
/// RngStream(seed, mix64(stream ^ mix64(c))) and chunk moments are merged
/// in chunk order, so the result does not depend on `threads`
/// (0 = hardware concurrency).
McResult run_monte_carlo(long samples, int outputs, std::uint64_t seed, std::uint64_t stream,
                         int threads, const SampleFn& draw);

} // namespace rsl
