#pragma once

#include "lapvard/system_matrix.hpp"
#include "lapvard/types.hpp"

#include <cstdint>

namespace lapvard {

struct NoiseSpec {
    std::uint64_t seed = 0;
    Real intensity = 1e5;  // per-ray air-scan counts I

    void validate() const {
        if (!(intensity > 0)) throw std::invalid_argument("NoiseSpec: intensity must be > 0");
    }
};

// Counter-based random stream keyed by (seed, stream id). Draw n is a pure
// function of (seed, stream, n), so per-ray streams are reproducible under any
// parallel schedule.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    double next_double();  // strictly inside (0, 1)

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Exact Poisson draw: cumulative inversion below mean 10, transformed
// rejection above.
Real sample_poisson(CounterStream& rng, Real mean);

// y_i ~ Poisson(I exp(-(H u)_i)), ray i drawn from the stream keyed by
// (seed, i); bit-identical across runs and thread counts.
Sinogram simulate_counts(const SystemMatrix& H, const Image& img, const NoiseSpec& noise);

}  // namespace lapvard
