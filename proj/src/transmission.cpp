#include "lapvard/transmission.hpp"

#include "lapvard/projector.hpp"

#include <cmath>

namespace lapvard {

Vector mean_counts(const SystemMatrix& A, const Eigen::Ref<const Vector>& intensities,
                   const Eigen::Ref<const Vector>& x, long* n_clamped) {
    if (intensities.size() != A.n_rays())
        throw std::invalid_argument("mean_counts: intensity length != matrix rows");
    Vector line = forward_project(A, x);
    long clamped = 0;
    for (Index i = 0; i < line.size(); ++i) {
        Real t = line[i];
        if (t > kLineIntegralClamp) {
            t = kLineIntegralClamp;
            ++clamped;
        } else if (t < -kLineIntegralClamp) {
            t = -kLineIntegralClamp;
            ++clamped;
        }
        line[i] = intensities[i] * std::exp(-t);
    }
    if (n_clamped) *n_clamped += clamped;
    return line;
}

Real neg_log_likelihood(const Sinogram& sino, const Eigen::Ref<const Vector>& q) {
    if (q.size() != sino.n_rays())
        throw std::invalid_argument("neg_log_likelihood: q length != sinogram rays");
    Real total = 0;
    for (Index i = 0; i < q.size(); ++i) {
        if (!(q[i] > 0)) throw std::domain_error("neg_log_likelihood: nonpositive mean count");
        total += -sino.counts[i] * std::log(q[i]) + q[i];
    }
    return total;
}

Vector nll_gradient(const SystemMatrix& A, const Sinogram& sino,
                    const Eigen::Ref<const Vector>& x) {
    sino.validate();
    if (sino.n_rays() != A.n_rays())
        throw std::invalid_argument("nll_gradient: sinogram length != matrix rows");
    const Vector q = mean_counts(A, sino.air_scan, x);
    return back_project(A, sino.counts - q);
}

}  // namespace lapvard
