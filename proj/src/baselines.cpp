#include "lapvard/baselines.hpp"

#include "lapvard/projector.hpp"
#include "lapvard/transmission.hpp"
#include "lapvard/wavelet.hpp"

#include <chrono>
#include <cmath>

namespace lapvard {

namespace {

constexpr Real kInitialPixelValue = 0.01;  // flat starting image, mm^-1
constexpr Real kDivergenceTol = 1e-8;      // relative uphill tolerance per iteration

Index image_side_of(Index n_cols) {
    const Index side = static_cast<Index>(std::lround(std::sqrt(static_cast<double>(n_cols))));
    if (side * side != n_cols)
        throw std::invalid_argument("run_am: matrix columns do not form a square image");
    return side;
}

// Unordered 8-neighbor pairs visited once each: E, S, SE, SW offsets.
template <class Fn>  // Fn(j, n, coupling)
void for_neighbor_pairs(Index side, Fn&& fn) {
    const Real diag = Real(1) / std::sqrt(Real(2));
    for (Index r = 0; r < side; ++r) {
        for (Index c = 0; c < side; ++c) {
            const Index j = r * side + c;
            if (c + 1 < side) fn(j, j + 1, Real(1));
            if (r + 1 < side) fn(j, j + side, Real(1));
            if (r + 1 < side && c + 1 < side) fn(j, j + side + 1, diag);
            if (r + 1 < side && c > 0) fn(j, j + side - 1, diag);
        }
    }
}

Real penalty_value(const PenaltyConfig& penalty, const Image& img) {
    switch (penalty.kind) {
        case PenaltyKind::None:
            return 0;
        case PenaltyKind::WaveletL1: {
            const WaveletBasis basis{penalty.wavelet_levels, img.side};
            return penalty.weight * analyze(basis, img).template lpNorm<1>();
        }
        case PenaltyKind::NeighborhoodQuadratic: {
            Real s = 0;
            for_neighbor_pairs(img.side, [&](Index j, Index n, Real c) {
                const Real d = img.pixels[j] - img.pixels[n];
                s += c * d * d;
            });
            return penalty.weight * s;
        }
    }
    return 0;
}

Vector penalty_gradient(const PenaltyConfig& penalty, Index side, const Vector& u) {
    Vector g = Vector::Zero(u.size());
    for_neighbor_pairs(side, [&](Index j, Index n, Real c) {
        const Real d = 2 * penalty.weight * c * (u[j] - u[n]);
        g[j] += d;
        g[n] -= d;
    });
    return g;
}

// Separable exponential surrogate of the data term around the current image:
// value at v given theta_j and b_y; the slack constant cancels in comparisons
// and is omitted.
Real data_surrogate_value(const Vector& b_y, const Vector& theta, Real z1, const Vector& anchor,
                          const Vector& v) {
    Real s = 0;
    for (Index j = 0; j < v.size(); ++j) {
        s += b_y[j] * v[j];
        if (theta[j] > 0) s += theta[j] * std::exp(-z1 * (v[j] - anchor[j]));
    }
    return s;
}

}  // namespace

Real objective_value(const SystemMatrix& H, const Sinogram& sino, const PenaltyConfig& penalty,
                     const Image& img) {
    penalty.validate();
    if (img.pixels.size() != H.n_cols())
        throw std::invalid_argument("objective_value: image size != matrix columns");
    const Vector q = mean_counts(H, sino.air_scan, img.pixels);
    return neg_log_likelihood(sino, q) + penalty_value(penalty, img);
}

std::pair<Image, SolveReport> run_am(
    const SystemMatrix& H, const Sinogram& sino, const PenaltyConfig& penalty,
    const AmConfig& cfg, const std::function<void(Index, const Image&)>& observer) {
    penalty.validate();
    cfg.validate();
    sino.validate();
    if (sino.n_rays() != H.n_rays())
        throw std::invalid_argument("run_am: sinogram length != matrix rows");
    const Index side = image_side_of(H.n_cols());
    const Real z1 = H.max_row_abs_sum();
    if (!(z1 > 0)) throw std::invalid_argument("run_am: system matrix has no entries");
    const Real step_cap = kLineIntegralClamp / z1;

    Image img = Image::constant(side, kInitialPixelValue);
    const Vector b_y = back_project(H, sino.counts);

    SolveReport report;
    report.solver = "am";
    long clamped = 0;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&t0] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    Real objective = objective_value(H, sino, penalty, img);
    report.rows.push_back({0, objective, elapsed_ms()});
    if (observer) observer(0, img);

    int uphill_streak = 0;
    for (Index it = 1; it <= cfg.n_iterations; ++it) {
        const Vector& u = img.pixels;
        const Vector q = mean_counts(H, sino.air_scan, u, &clamped);
        const Vector theta = back_project(H, q) / z1;

        // Per-pixel minimizer shift of the decoupled surrogate,
        // (1/Z1) log((H^T q)_j / (H^T y)_j), capped for degenerate columns.
        Vector step(u.size());
        for (Index j = 0; j < u.size(); ++j) {
            const Real num = z1 * theta[j];
            if (num > 0 && b_y[j] > 0)
                step[j] = std::clamp(std::log(num / b_y[j]) / z1, -step_cap, step_cap);
            else if (num > 0)
                step[j] = step_cap;  // zero measured counts pull attenuation up
            else if (b_y[j] > 0)
                step[j] = -step_cap;
            else
                step[j] = 0;
        }

        auto data_step = [&](Real s) {
            return (u + s * cfg.damping * step).cwiseMax(Real(0)).eval();
        };

        Vector next;
        if (penalty.kind == PenaltyKind::None || penalty.weight == 0) {
            next = data_step(1);
        } else {
            // Trial steps are accepted on the joint surrogate
            // J(v) = G_data(v) + penalty(v), which majorizes the penalized
            // objective and touches it at the current image.
            const Real j_ref = data_surrogate_value(b_y, theta, z1, u, u) +
                               penalty_value(penalty, img);
            const WaveletBasis basis{penalty.wavelet_levels, side};
            const Real tau0 = penalty.kind == PenaltyKind::WaveletL1
                                  ? penalty.weight / (z1 * std::max(b_y.mean(), Real(1e-30)))
                                  : 0;
            const Real eta0 = penalty.kind == PenaltyKind::NeighborhoodQuadratic
                                  ? Real(1) / (28 * penalty.weight)
                                  : 0;
            bool accepted = false;
            Real s = 1;
            for (int trial = 0; trial < 42 && !accepted; ++trial, s /= 2) {
                Vector v = data_step(s);
                if (penalty.kind == PenaltyKind::WaveletL1) {
                    Vector beta = analyze(basis, Image{side, v});
                    const Real tau = s * tau0;
                    for (Index k = 0; k < beta.size(); ++k) beta[k] = soft_threshold(beta[k], tau);
                    v = synthesize(basis, beta).pixels;
                } else {
                    v -= s * eta0 * penalty_gradient(penalty, side, v);
                }
                const Real j_trial = data_surrogate_value(b_y, theta, z1, u, v) +
                                     penalty_value(penalty, Image{side, v});
                if (j_trial <= j_ref) {
                    next = std::move(v);
                    accepted = true;
                }
            }
            if (!accepted) next = u;  // at a stationary point of the penalized objective
        }

        img.pixels = std::move(next);
        const Real new_objective = objective_value(H, sino, penalty, img);
        report.rows.push_back({it, new_objective, elapsed_ms()});
        if (observer) observer(it, img);

        if (new_objective >
            objective + kDivergenceTol * std::max(Real(1), std::abs(objective))) {
            if (++uphill_streak >= 3) {
                report.diverged = true;
                break;
            }
        } else {
            uphill_streak = 0;
        }
        objective = new_objective;
    }
    report.clamps_triggered = clamped > 0;
    return {std::move(img), std::move(report)};
}

}  // namespace lapvard
