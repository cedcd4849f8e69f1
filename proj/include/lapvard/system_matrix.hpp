#pragma once

#include "lapvard/types.hpp"

#include <iosfwd>
#include <vector>

namespace lapvard {

using SparseRowMajor = Eigen::SparseMatrix<Real, Eigen::RowMajor, int>;
using SparseColMajor = Eigen::SparseMatrix<Real, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<Real>;

// Sparse ray/coefficient operator. Keeps row-compressed and column-compressed
// copies of the same entries (rows drive forward projection, columns drive
// back projection and per-column coordinate sweeps) together with cached
// absolute-value reductions used throughout the solvers.
//
// For a ray-tracing matrix H all entries are nonnegative intersection lengths;
// a composed matrix H * Omega carries signed entries. Inner indices are sorted
// and duplicate-free in both copies.
class SystemMatrix {
public:
    SystemMatrix() = default;

    // Duplicate (row, col) triplets are summed.
    static SystemMatrix from_triplets(Index n_rays, Index n_cols,
                                      const std::vector<Triplet>& entries);
    static SystemMatrix from_sparse(SparseColMajor m);

    Index n_rays() const { return rows_.rows(); }
    Index n_cols() const { return rows_.cols(); }
    Index n_entries() const { return rows_.nonZeros(); }

    const SparseRowMajor& by_row() const { return rows_; }
    const SparseColMajor& by_col() const { return cols_; }

    const Vector& row_abs_sums() const { return row_abs_sums_; }
    const Vector& col_abs_sums() const { return col_abs_sums_; }
    const Vector& max_abs_per_col() const { return max_abs_per_col_; }

    // max_i sum_k |a_ik|; the Z1 constant of the separable surrogates.
    Real max_row_abs_sum() const {
        return row_abs_sums_.size() ? row_abs_sums_.maxCoeff() : Real(0);
    }

    // Plain text "row col weight" triples, one per line.
    void write_triplets(std::ostream& os) const;

private:
    SparseRowMajor rows_;
    SparseColMajor cols_;
    Vector row_abs_sums_;
    Vector col_abs_sums_;
    Vector max_abs_per_col_;

    void rebuild_reductions();
};

}  // namespace lapvard
