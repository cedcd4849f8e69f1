#include "lapvard/system_matrix.hpp"

#include <cmath>
#include <ostream>

namespace lapvard {

SystemMatrix SystemMatrix::from_triplets(Index n_rays, Index n_cols,
                                         const std::vector<Triplet>& entries) {
    if (n_rays < 0 || n_cols < 0)
        throw std::invalid_argument("SystemMatrix: negative dimensions");
    SparseColMajor m(n_rays, n_cols);
    m.setFromTriplets(entries.begin(), entries.end());
    return from_sparse(std::move(m));
}

SystemMatrix SystemMatrix::from_sparse(SparseColMajor m) {
    m.makeCompressed();
    SystemMatrix out;
    out.cols_ = std::move(m);
    out.rows_ = SparseRowMajor(out.cols_);
    out.rows_.makeCompressed();
    out.rebuild_reductions();
    return out;
}

void SystemMatrix::rebuild_reductions() {
    row_abs_sums_ = Vector::Zero(rows_.rows());
    for (Index i = 0; i < rows_.outerSize(); ++i) {
        Real s = 0;
        for (SparseRowMajor::InnerIterator it(rows_, i); it; ++it) s += std::abs(it.value());
        row_abs_sums_[i] = s;
    }
    col_abs_sums_ = Vector::Zero(cols_.cols());
    max_abs_per_col_ = Vector::Zero(cols_.cols());
    for (Index k = 0; k < cols_.outerSize(); ++k) {
        Real s = 0, m = 0;
        for (SparseColMajor::InnerIterator it(cols_, k); it; ++it) {
            const Real a = std::abs(it.value());
            s += a;
            if (a > m) m = a;
        }
        col_abs_sums_[k] = s;
        max_abs_per_col_[k] = m;
    }
}

void SystemMatrix::write_triplets(std::ostream& os) const {
    for (Index i = 0; i < rows_.outerSize(); ++i)
        for (SparseRowMajor::InnerIterator it(rows_, i); it; ++it)
            os << i << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace lapvard
