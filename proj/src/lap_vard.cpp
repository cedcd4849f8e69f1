#include "lapvard/lap_vard.hpp"

#include "lapvard/parallel.hpp"
#include "lapvard/projector.hpp"
#include "lapvard/transmission.hpp"
#include "newton1d.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace lapvard {

namespace {

constexpr Real kInf = std::numeric_limits<Real>::infinity();

// b e^{-|mu|/b}: the scale part of E|beta| under Laplace(mu, b).
Real scaled_decay(Real mu, Real b) {
    const Real t = std::abs(mu) / b;
    return t > kLineIntegralClamp ? Real(0) : b * std::exp(-t);
}

void check_dims(const SystemMatrix& phi, const VariationalState& state) {
    if (state.mu.size() != phi.n_cols() || state.b.size() != phi.n_cols() ||
        state.gamma.size() != phi.n_cols())
        throw std::invalid_argument("variational state size != matrix columns");
}

// Enforces the strict MGF domain b_k max_i|phi_ik| < 1, naming an offending
// entry on failure.
void check_domain(const SystemMatrix& phi, const Eigen::Ref<const Vector>& b,
                  const char* where) {
    const Vector& maxabs = phi.max_abs_per_col();
    for (Index k = 0; k < b.size(); ++k) {
        if (b[k] * maxabs[k] < 1) continue;
        Index ray = -1;
        for (SparseColMajor::InnerIterator it(phi.by_col(), k); it; ++it)
            if (std::abs(it.value()) == maxabs[k]) {
                ray = it.row();
                break;
            }
        std::ostringstream msg;
        msg << where << ": domain violation b[k]*|phi(i,k)| >= 1 at ray i=" << ray
            << ", coefficient k=" << k;
        throw std::domain_error(msg.str());
    }
}

// log of the per-ray MGF product sum_k -log(1 - (b_k phi_ik)^2), per row.
Vector log_mgf_per_ray(const SystemMatrix& phi, const Eigen::Ref<const Vector>& b) {
    Vector out = Vector::Zero(phi.n_rays());
    const SparseRowMajor& rows = phi.by_row();
    parallel_for(phi.n_rays(), [&](Index begin, Index end) {
        for (Index i = begin; i < end; ++i) {
            Real s = 0;
            for (SparseRowMajor::InnerIterator it(rows, i); it; ++it) {
                const Real t = b[it.col()] * it.value();
                s -= std::log1p(-t * t);
            }
            out[i] = s;
        }
    });
    return out;
}

Vector expected_counts_impl(const SystemMatrix& phi, const Eigen::Ref<const Vector>& intensities,
                            const Eigen::Ref<const Vector>& mu, const Eigen::Ref<const Vector>& b,
                            const char* where, long* n_clamped) {
    if (intensities.size() != phi.n_rays())
        throw std::invalid_argument("expected_mean_counts: intensity length != matrix rows");
    check_domain(phi, b, where);
    const Vector line = forward_project(phi, mu);
    const Vector log_mgf = log_mgf_per_ray(phi, b);
    Vector out(phi.n_rays());
    long clamped = 0;
    for (Index i = 0; i < out.size(); ++i) {
        Real t = log_mgf[i] - line[i];
        if (std::abs(t) > kLineIntegralClamp) {
            t = std::clamp(t, -kLineIntegralClamp, kLineIntegralClamp);
            ++clamped;
        }
        out[i] = intensities[i] * std::exp(t);
    }
    if (n_clamped) *n_clamped += clamped;
    return out;
}

// ---- scalar pieces of the decoupled 1-D problems ----------------------------

// Data part of the location surrogate:
// c*m + tp*exp(-z(m - m0)) + tm*exp(z(m - m0)).
struct MuData {
    Real c, tp, tm, z, m0;

    detail::Eval1D operator()(Real m) const {
        const Real d = m - m0;
        const Real ep = tp == 0 ? 0 : tp * std::exp(-z * d);
        const Real em = tm == 0 ? 0 : tm * std::exp(z * d);
        return {c * m + ep + em, c - z * ep + z * em, z * z * (ep + em)};
    }
};

// Prior part (1/gamma)(b e^{-|m|/b} + |m|) on a fixed sign branch.
struct LaplacePrior {
    Real b, gamma;

    detail::Eval1D eval(Real m, Real sign) const {
        const Real a = sign * m;  // |m| on this branch
        const Real t = a / b;
        const Real e = t > kLineIntegralClamp ? Real(0) : std::exp(-t);
        return {(b * e + a) / gamma, sign * (1 - e) / gamma, e / (gamma * b)};
    }
    Real d1_at_zero(Real sign) const {
        (void)sign;
        return 0;  // smooth at the kink: both one-sided derivatives vanish
    }
};

// Weighted absolute value w|m| (the plain sparsity penalty of the baselines).
struct L1Prior {
    Real w;

    detail::Eval1D eval(Real m, Real sign) const { return {w * sign * m, w * sign, 0}; }
    Real d1_at_zero(Real sign) const { return sign * w; }
};

// Minimizes data(m) + prior(m) over the real line: sub-gradient test at the
// kink m = 0, then branch-restricted safeguarded Newton. Returns a point whose
// combined value does not exceed the value at `anchor`.
template <class Prior>
Real minimize_piecewise(const MuData& data, const Prior& prior, Real anchor, Real scale,
                        int newton_steps) {
    auto total = [&](Real m) {
        const Real sign = m < 0 ? Real(-1) : Real(1);
        const detail::Eval1D p = prior.eval(m, sign);
        const detail::Eval1D d = data(m);
        return detail::Eval1D{d.value + p.value, d.d1 + p.d1, d.d2 + p.d2};
    };

    const Real data_d1_zero = data(0).d1;
    const Real d_minus = data_d1_zero + prior.d1_at_zero(-1);
    const Real d_plus = data_d1_zero + prior.d1_at_zero(+1);

    Real result;
    if (d_minus <= 0 && 0 <= d_plus) {
        result = 0;
    } else if (d_plus < 0) {
        auto branch = [&](Real m) {
            const detail::Eval1D p = prior.eval(m, +1);
            const detail::Eval1D d = data(m);
            return detail::Eval1D{d.value + p.value, d.d1 + p.d1, d.d2 + p.d2};
        };
        const Real x0 = anchor > 0 ? anchor : scale;
        result = detail::newton_min_1d(branch, Real(0), kInf, x0, scale, newton_steps);
    } else {
        auto branch = [&](Real m) {
            const detail::Eval1D p = prior.eval(m, -1);
            const detail::Eval1D d = data(m);
            return detail::Eval1D{d.value + p.value, d.d1 + p.d1, d.d2 + p.d2};
        };
        const Real x0 = anchor < 0 ? anchor : -scale;
        result = detail::newton_min_1d(branch, -kInf, Real(0), x0, scale, newton_steps);
    }
    if (!std::isfinite(result) || total(result).value > total(anchor).value) return anchor;
    return result;
}

}  // namespace

void VariationalState::validate() const {
    if (b.size() != mu.size() || gamma.size() != mu.size())
        throw std::invalid_argument("VariationalState: component length mismatch");
    if (!(b.array() > 0).all()) throw std::invalid_argument("VariationalState: b must be > 0");
    if (!(gamma.array() > 0).all())
        throw std::invalid_argument("VariationalState: gamma must be > 0");
}

void LapVardConfig::validate() const {
    if (n_outer < 0) throw std::invalid_argument("LapVardConfig: n_outer must be >= 0");
    if (newton_steps_mu < 1 || newton_steps_b < 1)
        throw std::invalid_argument("LapVardConfig: newton step caps must be >= 1");
    if (!(b_domain_margin > 0 && b_domain_margin < 1))
        throw std::invalid_argument("LapVardConfig: b_domain_margin must lie in (0, 1)");
    if (!(init_b_scale > 0)) throw std::invalid_argument("LapVardConfig: init_b_scale must be > 0");
}

Real laplace_kl(Real mu, Real b, Real gamma) {
    if (!(b > 0) || !(gamma > 0))
        throw std::domain_error("laplace_kl: scales must be strictly positive");
    return std::log(gamma / b) + (scaled_decay(mu, b) + std::abs(mu)) / gamma - 1;
}

Vector expected_mean_counts(const SystemMatrix& phi, const Eigen::Ref<const Vector>& intensities,
                            const VariationalState& state, long* n_clamped) {
    state.validate();
    check_dims(phi, state);
    return expected_counts_impl(phi, intensities, state.mu, state.b, "expected_mean_counts",
                                n_clamped);
}

Real free_variational_energy(const SystemMatrix& phi, const Sinogram& sino,
                             const VariationalState& state, long* n_clamped) {
    state.validate();
    check_dims(phi, state);
    if (sino.n_rays() != phi.n_rays())
        throw std::invalid_argument("free_variational_energy: sinogram length != matrix rows");
    const Vector expected =
        expected_counts_impl(phi, sino.air_scan, state.mu, state.b, "free_variational_energy",
                             n_clamped);
    Real f = expected.sum() + sino.counts.dot(forward_project(phi, state.mu));
    for (Index k = 0; k < state.size(); ++k) {
        f += (scaled_decay(state.mu[k], state.b[k]) + std::abs(state.mu[k])) / state.gamma[k];
        f += std::log(2 * state.gamma[k]) - std::log(2 * state.b[k]);
    }
    return f;
}

Vector update_gamma(const VariationalState& state) {
    state.validate();
    Vector out(state.size());
    for (Index k = 0; k < out.size(); ++k)
        out[k] = scaled_decay(state.mu[k], state.b[k]) + std::abs(state.mu[k]);
    return out;
}

MuSurrogateTerms build_mu_surrogate(const SystemMatrix& phi, const Sinogram& sino,
                                    const VariationalState& state,
                                    const Eigen::Ref<const Vector>& expansion_point) {
    state.validate();
    check_dims(phi, state);
    sino.validate();
    if (sino.n_rays() != phi.n_rays() || expansion_point.size() != phi.n_cols())
        throw std::invalid_argument("build_mu_surrogate: dimension mismatch");

    MuSurrogateTerms terms;
    terms.z1 = phi.max_row_abs_sum();
    terms.expansion = expansion_point;
    terms.b_y = back_project(phi, sino.counts);

    const Vector expected = expected_counts_impl(phi, sino.air_scan, expansion_point, state.b,
                                                 "build_mu_surrogate", nullptr);
    terms.theta_plus = Vector::Zero(phi.n_cols());
    terms.theta_minus = Vector::Zero(phi.n_cols());
    if (terms.z1 > 0) {
        const SparseColMajor& cols = phi.by_col();
        parallel_for(phi.n_cols(), [&](Index begin, Index end) {
            for (Index k = begin; k < end; ++k) {
                Real tp = 0, tm = 0;
                for (SparseColMajor::InnerIterator it(cols, k); it; ++it) {
                    const Real w = std::abs(it.value()) / terms.z1 * expected[it.row()];
                    if (it.value() >= 0)
                        tp += w;
                    else
                        tm += w;
                }
                terms.theta_plus[k] = tp;
                terms.theta_minus[k] = tm;
            }
        });
        Real slack = 0;
        for (Index i = 0; i < phi.n_rays(); ++i)
            slack += expected[i] * (1 - phi.row_abs_sums()[i] / terms.z1);
        terms.slack_constant = slack;
    } else {
        terms.slack_constant = expected.sum();
    }
    return terms;
}

Real mu_surrogate_value(const MuSurrogateTerms& terms, const VariationalState& state,
                        const Eigen::Ref<const Vector>& mu) {
    if (mu.size() != terms.b_y.size())
        throw std::invalid_argument("mu_surrogate_value: dimension mismatch");
    Real total = terms.slack_constant;
    for (Index k = 0; k < mu.size(); ++k) {
        const MuData data{terms.b_y[k], terms.theta_plus[k], terms.theta_minus[k], terms.z1,
                          terms.expansion[k]};
        const LaplacePrior prior{state.b[k], state.gamma[k]};
        total += data(mu[k]).value + prior.eval(mu[k], mu[k] < 0 ? -1 : 1).value;
    }
    return total;
}

Vector minimize_mu_surrogate(const MuSurrogateTerms& terms, const VariationalState& state,
                             const LapVardConfig& cfg) {
    cfg.validate();
    state.validate();
    const Index n = terms.b_y.size();
    if (state.size() != n || terms.expansion.size() != n)
        throw std::invalid_argument("minimize_mu_surrogate: dimension mismatch");
    const Real scale = terms.z1 > 0 ? 1 / terms.z1 : 1;
    Vector out(n);
    std::atomic<bool> bad{false};
    parallel_for(n, [&](Index begin, Index end) {
        for (Index k = begin; k < end; ++k) {
            const MuData data{terms.b_y[k], terms.theta_plus[k], terms.theta_minus[k], terms.z1,
                              terms.expansion[k]};
            const LaplacePrior prior{state.b[k], state.gamma[k]};
            out[k] = minimize_piecewise(data, prior, terms.expansion[k], scale,
                                        cfg.newton_steps_mu);
            if (!std::isfinite(out[k])) bad = true;
        }
    });
    if (bad) throw std::runtime_error("minimize_mu_surrogate: non-finite iterate");
    return out;
}

BSurrogateTerms build_b_surrogate(const SystemMatrix& phi, const Sinogram& sino,
                                  const VariationalState& state,
                                  const Eigen::Ref<const Vector>& anchor) {
    state.validate();
    check_dims(phi, state);
    sino.validate();
    if (sino.n_rays() != phi.n_rays() || anchor.size() != phi.n_cols())
        throw std::invalid_argument("build_b_surrogate: dimension mismatch");
    if (!(anchor.array() > 0).all())
        throw std::invalid_argument("build_b_surrogate: anchor must be > 0");
    check_domain(phi, anchor, "build_b_surrogate");

    BSurrogateTerms terms;
    terms.phi = &phi;
    terms.anchor = anchor;
    terms.mean_counts_at_mu = mean_counts(phi, sino.air_scan, state.mu);

    const Vector log_mgf = log_mgf_per_ray(phi, anchor);
    const SparseColMajor& cols = phi.by_col();
    terms.r = Vector::Zero(cols.nonZeros());
    terms.q_loo = Vector::Zero(cols.nonZeros());
    const int* outer = cols.outerIndexPtr();
    const int* inner = cols.innerIndexPtr();
    const Real* values = cols.valuePtr();
    parallel_for(phi.n_cols(), [&](Index begin, Index end) {
        for (Index k = begin; k < end; ++k) {
            for (int p = outer[k]; p < outer[k + 1]; ++p) {
                const Index i = inner[p];
                const Real v = values[p];
                if (v == 0) continue;
                terms.r[p] = std::abs(v) / phi.row_abs_sums()[i];
                const Real t = anchor[k] * v;
                terms.q_loo[p] = std::exp(log_mgf[i] + std::log1p(-t * t));
            }
        }
    });

    Real empty = 0;
    for (Index i = 0; i < phi.n_rays(); ++i)
        if (phi.row_abs_sums()[i] == 0) empty += terms.mean_counts_at_mu[i];
    terms.empty_ray_constant = empty;
    return terms;
}

namespace {

// Shared evaluation of one scale coordinate's surrogate:
// (x/gamma) e^{-|mu|/x} - log(2x) + sum_i r Q E_i / (1 - (btilde phi)^2),
// btilde = bhat + (x - bhat)/r.
struct BCoordinate {
    const Real* values;
    const int* inner;
    int p_begin, p_end;
    const Real* r;
    const Real* q_loo;
    const Real* counts;  // E_i by ray
    Real anchor;         // bhat_k
    Real abs_mu, gamma;

    detail::Eval1D operator()(Real x) const {
        const Real t_prior = abs_mu / x;
        const Real e = t_prior > kLineIntegralClamp ? Real(0) : std::exp(-t_prior);
        Real value = x * e / gamma - std::log(2 * x);
        Real d1 = e == 0 ? Real(0) : e * (1 + t_prior) / gamma;
        d1 -= 1 / x;
        Real d2 = e == 0 ? Real(0) : e * abs_mu * abs_mu / (x * x * x) / gamma;
        d2 += 1 / (x * x);
        for (int p = p_begin; p < p_end; ++p) {
            if (r[p] == 0) continue;
            const Real phi_v = values[p];
            const Real btilde = anchor + (x - anchor) / r[p];
            const Real t = btilde * phi_v;
            const Real denom = 1 - t * t;
            if (!(denom > 0)) return {kInf, kInf, kInf};
            const Real c = r[p] * q_loo[p] * counts[inner[p]];
            const Real tprime = phi_v / r[p];
            value += c / denom;
            d1 += c * 2 * t * tprime / (denom * denom);
            d2 += c * 2 * tprime * tprime * (1 + 3 * t * t) / (denom * denom * denom);
        }
        return {value, d1, d2};
    }

    // Supremum of the restricted domain: min_i bhat + r(1/|phi| - bhat).
    Real domain_sup() const {
        Real sup = kInf;
        for (int p = p_begin; p < p_end; ++p) {
            if (r[p] == 0) continue;
            sup = std::min(sup, anchor + r[p] * (1 / std::abs(values[p]) - anchor));
        }
        return sup;
    }
};

}  // namespace

Real b_surrogate_value(const BSurrogateTerms& terms, const VariationalState& state,
                       const Eigen::Ref<const Vector>& b) {
    const SystemMatrix& phi = *terms.phi;
    if (b.size() != phi.n_cols() || state.size() != phi.n_cols())
        throw std::invalid_argument("b_surrogate_value: dimension mismatch");
    const SparseColMajor& cols = phi.by_col();
    Real total = terms.empty_ray_constant;
    for (Index k = 0; k < phi.n_cols(); ++k) {
        const BCoordinate coord{cols.valuePtr(),
                                cols.innerIndexPtr(),
                                cols.outerIndexPtr()[k],
                                cols.outerIndexPtr()[k + 1],
                                terms.r.data(),
                                terms.q_loo.data(),
                                terms.mean_counts_at_mu.data(),
                                terms.anchor[k],
                                std::abs(state.mu[k]),
                                state.gamma[k]};
        total += coord(b[k]).value;
    }
    return total;
}

Vector minimize_b_surrogate(const BSurrogateTerms& terms, const VariationalState& state,
                            const LapVardConfig& cfg, long* cap_hits) {
    cfg.validate();
    state.validate();
    const SystemMatrix& phi = *terms.phi;
    if (state.size() != phi.n_cols() || terms.anchor.size() != phi.n_cols())
        throw std::invalid_argument("minimize_b_surrogate: dimension mismatch");
    const SparseColMajor& cols = phi.by_col();
    const Real cap = cfg.init_b_scale * 1e6;
    Vector out(phi.n_cols());
    std::atomic<long> caps{0};
    parallel_for(phi.n_cols(), [&](Index begin, Index end) {
        for (Index k = begin; k < end; ++k) {
            const BCoordinate coord{cols.valuePtr(),
                                    cols.innerIndexPtr(),
                                    cols.outerIndexPtr()[k],
                                    cols.outerIndexPtr()[k + 1],
                                    terms.r.data(),
                                    terms.q_loo.data(),
                                    terms.mean_counts_at_mu.data(),
                                    terms.anchor[k],
                                    std::abs(state.mu[k]),
                                    state.gamma[k]};
            const Real max_abs = phi.max_abs_per_col()[k];
            const bool empty_column = max_abs == 0;
            Real hi = empty_column ? cap : (1 - cfg.b_domain_margin) / max_abs;
            const Real sup = coord.domain_sup();
            if (std::isfinite(sup))
                hi = std::min(hi, coord.anchor + (1 - 1e-9) * (sup - coord.anchor));
            const Real x0 = std::min(terms.anchor[k], hi);
            Real res = detail::newton_min_1d(coord, Real(0), hi, x0, x0 / 2, cfg.newton_steps_b);
            res = std::clamp(res, std::numeric_limits<Real>::min(), hi);
            if (coord(res).value > coord(terms.anchor[k]).value) res = terms.anchor[k];
            if (empty_column && res >= cap) ++caps;
            out[k] = res;
        }
    });
    if (cap_hits) *cap_hits += caps.load();
    return out;
}

Real mu_objective(const SystemMatrix& phi, const Sinogram& sino, const VariationalState& state,
                  const Eigen::Ref<const Vector>& mu) {
    if (mu.size() != phi.n_cols())
        throw std::invalid_argument("mu_objective: dimension mismatch");
    const Vector expected =
        expected_counts_impl(phi, sino.air_scan, mu, state.b, "mu_objective", nullptr);
    Real f = expected.sum() + sino.counts.dot(forward_project(phi, mu));
    for (Index k = 0; k < mu.size(); ++k)
        f += (scaled_decay(mu[k], state.b[k]) + std::abs(mu[k])) / state.gamma[k];
    return f;
}

Real b_objective(const SystemMatrix& phi, const Sinogram& sino, const VariationalState& state,
                 const Eigen::Ref<const Vector>& b) {
    if (b.size() != phi.n_cols()) throw std::invalid_argument("b_objective: dimension mismatch");
    const Vector expected =
        expected_counts_impl(phi, sino.air_scan, state.mu, b, "b_objective", nullptr);
    Real f = expected.sum();
    for (Index k = 0; k < b.size(); ++k)
        f += scaled_decay(state.mu[k], b[k]) / state.gamma[k] - std::log(2 * b[k]);
    return f;
}

std::pair<VariationalState, SolveReport> run_lapvard(const SystemMatrix& phi,
                                                     const Sinogram& sino,
                                                     const LapVardConfig& cfg) {
    cfg.validate();
    sino.validate();
    if (sino.n_rays() != phi.n_rays())
        throw std::invalid_argument("run_lapvard: sinogram length != matrix rows");
    const Index n = phi.n_cols();
    if (cfg.init_mu.size() != 0 && cfg.init_mu.size() != n)
        throw std::invalid_argument("run_lapvard: init_mu length != matrix columns");

    VariationalState state;
    state.mu = cfg.init_mu.size() ? cfg.init_mu : Vector::Zero(n);
    state.b = Vector::Constant(n, cfg.init_b_scale);
    for (Index k = 0; k < n; ++k) {
        const Real max_abs = phi.max_abs_per_col()[k];
        if (max_abs > 0)
            state.b[k] = std::min(state.b[k], (1 - cfg.b_domain_margin) / max_abs);
    }
    state.gamma = update_gamma(state);

    SolveReport report;
    report.solver = "lapvard";
    long clamped = 0;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&t0] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    Real fve = free_variational_energy(phi, sino, state, &clamped);
    report.block_objectives.push_back(fve);
    report.rows.push_back({0, fve, elapsed_ms()});

    for (Index it = 1; it <= cfg.n_outer; ++it) {
        const MuSurrogateTerms mu_terms = build_mu_surrogate(phi, sino, state, state.mu);
        state.mu = minimize_mu_surrogate(mu_terms, state, cfg);
        report.block_objectives.push_back(free_variational_energy(phi, sino, state, &clamped));

        const BSurrogateTerms b_terms = build_b_surrogate(phi, sino, state, state.b);
        state.b = minimize_b_surrogate(b_terms, state, cfg, &report.scale_cap_hits);
        report.block_objectives.push_back(free_variational_energy(phi, sino, state, &clamped));

        state.gamma = update_gamma(state);
        const Real f_new = free_variational_energy(phi, sino, state, &clamped);
        report.block_objectives.push_back(f_new);
        report.rows.push_back({it, f_new, elapsed_ms()});

        if (cfg.tol_fve > 0 &&
            std::abs(fve - f_new) <= cfg.tol_fve * std::max(Real(1), std::abs(fve))) {
            report.early_stop = true;
            fve = f_new;
            break;
        }
        fve = f_new;
    }
    report.clamps_triggered = clamped > 0;
    return {std::move(state), std::move(report)};
}

}  // namespace lapvard
