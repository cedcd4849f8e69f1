#include "lapvard/simulate.hpp"

#include "lapvard/parallel.hpp"
#include "lapvard/transmission.hpp"

#include <cmath>

namespace lapvard {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// Cumulative-product inversion; exact for small means.
Real poisson_inversion(CounterStream& rng, Real mean) {
    const Real limit = std::exp(-mean);
    Real product = 1;
    Real k = -1;
    do {
        k += 1;
        product *= rng.next_double();
    } while (product > limit);
    return k;
}

// Transformed rejection with squeeze (Hormann's PTRS); exact for mean >= 10.
Real poisson_ptrs(CounterStream& rng, Real mean) {
    const Real slam = std::sqrt(mean);
    const Real loglam = std::log(mean);
    const Real b = 0.931 + 2.53 * slam;
    const Real a = -0.059 + 0.02483 * b;
    const Real inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const Real v_r = 0.9277 - 3.6224 / (b - 2);
    for (;;) {
        const Real u = rng.next_double() - 0.5;
        Real v = rng.next_double();
        const Real us = 0.5 - std::abs(u);
        const Real k = std::floor((2 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            k * loglam - mean - std::lgamma(k + 1))
            return k;
    }
}

}  // namespace

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed + kGolden) ^ (stream * kGolden + 1))) {}

std::uint64_t CounterStream::next_u64() { return mix64(key_ + (++counter_) * kGolden); }

double CounterStream::next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

Real sample_poisson(CounterStream& rng, Real mean) {
    if (!(mean >= 0)) throw std::invalid_argument("sample_poisson: mean must be >= 0");
    if (mean == 0) return 0;
    return mean < 10 ? poisson_inversion(rng, mean) : poisson_ptrs(rng, mean);
}

Sinogram simulate_counts(const SystemMatrix& H, const Image& img, const NoiseSpec& noise) {
    noise.validate();
    if (img.pixels.size() != H.n_cols())
        throw std::invalid_argument("simulate_counts: image size != matrix columns");
    Sinogram sino;
    sino.air_scan = Vector::Constant(H.n_rays(), noise.intensity);
    const Vector q = mean_counts(H, sino.air_scan, img.pixels);
    sino.counts = Vector::Zero(H.n_rays());
    parallel_for(H.n_rays(), [&](Index begin, Index end) {
        for (Index i = begin; i < end; ++i) {
            CounterStream stream(noise.seed, static_cast<std::uint64_t>(i));
            sino.counts[i] = sample_poisson(stream, q[i]);
        }
    });
    return sino;
}

}  // namespace lapvard
