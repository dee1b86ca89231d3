#pragma once

#include "kis/sparse_matrix.hpp"

#include <numeric>
#include <random>

namespace kis {

// Lowest-row-pivot column reduction (the standard boundary-matrix algorithm).
// Columns are visited in `order`; a column reduces to zero exactly when it
// lies in the span of the columns visited before it, so the surviving
// columns form the greedy column basis for that order.
template <class F>
struct ColumnReduction {
    std::vector<SparseVec<F>> reduced;          // indexed by original column
    std::vector<SparseVec<F>> combo;            // reduced[j] = A * combo[j] (tracked runs only)
    std::vector<std::int64_t> pivot_of_row;     // row -> column whose lowest entry sits there
    std::vector<char> is_pivot;                 // column survived the reduction
    std::size_t rank = 0;
    bool tracked = false;

    // Clear every pivot row of x, highest row first.
    SparseVec<F> reduce_fully(SparseVec<F> x) const {
        std::int64_t bound = x.empty() ? -1 : static_cast<std::int64_t>(x.back().first);
        while (bound >= 0) {
            std::int64_t hit = -1;
            for (auto it = x.rbegin(); it != x.rend(); ++it) {
                if (static_cast<std::int64_t>(it->first) > bound) continue;
                if (pivot_of_row[it->first] >= 0) {
                    hit = it->first;
                    break;
                }
            }
            if (hit < 0) break;
            const auto& r = reduced[static_cast<std::size_t>(pivot_of_row[hit])];
            auto it = std::lower_bound(x.begin(), x.end(), static_cast<std::uint32_t>(hit),
                                       [](const auto& e, std::uint32_t v) { return e.first < v; });
            F c = -(it->second / r.back().second);
            x = axpy(x, c, r);
            bound = hit - 1;
        }
        return x;
    }
};

template <class F>
ColumnReduction<F> reduce_columns(const SparseMatrix<F>& a, const std::vector<std::size_t>& order, bool track) {
    ColumnReduction<F> cr;
    cr.tracked = track;
    cr.reduced.resize(a.cols());
    if (track) cr.combo.resize(a.cols());
    cr.pivot_of_row.assign(a.rows(), -1);
    cr.is_pivot.assign(a.cols(), 0);
    for (std::size_t j : order) {
        SparseVec<F> col = a.col(j);
        SparseVec<F> v;
        if (track) v.emplace_back(static_cast<std::uint32_t>(j), F(1));
        while (!col.empty()) {
            auto low = col.back().first;
            auto k = cr.pivot_of_row[low];
            if (k < 0) break;
            const auto& rk = cr.reduced[static_cast<std::size_t>(k)];
            F c = -(col.back().second / rk.back().second);
            col = axpy(col, c, rk);
            if (track) v = axpy(v, c, cr.combo[static_cast<std::size_t>(k)]);
        }
        if (!col.empty()) {
            cr.pivot_of_row[col.back().first] = static_cast<std::int64_t>(j);
            cr.is_pivot[j] = 1;
            ++cr.rank;
        }
        cr.reduced[j] = std::move(col);
        if (track) cr.combo[j] = std::move(v);
    }
    return cr;
}

template <class F>
ColumnReduction<F> reduce_columns(const SparseMatrix<F>& a, bool track = false) {
    std::vector<std::size_t> order(a.cols());
    std::iota(order.begin(), order.end(), 0);
    return reduce_columns(a, order, track);
}

template <class F>
std::size_t rank(const SparseMatrix<F>& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0;
    // Reducing along the shorter side keeps the pivot table small.
    if (a.rows() < a.cols()) return reduce_columns(a.transpose()).rank;
    return reduce_columns(a).rank;
}

// Deterministic visiting order: identity for seed 0, a seeded shuffle otherwise.
inline std::vector<std::size_t> seeded_order(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (seed != 0) {
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
    }
    return order;
}

// Kernel basis normalised on its free coordinates: column t of `basis` is
// e_{free[t]} plus a combination of pivot columns.
template <class F>
struct KernelBasis {
    SparseMatrix<F> basis;
    std::vector<std::size_t> free;
};

template <class F>
KernelBasis<F> kernel_basis(const SparseMatrix<F>& a, const std::vector<std::size_t>& order) {
    auto cr = reduce_columns(a, order, true);
    KernelBasis<F> kb;
    for (std::size_t j = 0; j < a.cols(); ++j)
        if (!cr.is_pivot[j]) kb.free.push_back(j);
    kb.basis = SparseMatrix<F>(a.cols(), kb.free.size());
    for (std::size_t t = 0; t < kb.free.size(); ++t) kb.basis.set_col(t, cr.combo[kb.free[t]]);
    return kb;
}

template <class F>
KernelBasis<F> kernel_basis(const SparseMatrix<F>& a) {
    return kernel_basis(a, seeded_order(a.cols(), 0));
}

// Complement of the column space: the rows that carry no pivot after a
// reduction of `a`, plus the projection of the ambient space onto the
// quotient expressed in those coordinates.
template <class F>
struct CokernelData {
    std::vector<std::size_t> kept_rows;
    ColumnReduction<F> reduction;
    std::vector<std::int64_t> position;  // ambient row -> index in kept_rows or -1

    SparseVec<F> project(const SparseVec<F>& x) const {
        SparseVec<F> r = reduction.reduce_fully(x);
        SparseVec<F> out;
        out.reserve(r.size());
        for (auto& [i, v] : r) {
            auto p = position[i];
            if (p < 0) throw StructuralError("cokernel projection left a pivot row");
            out.emplace_back(static_cast<std::uint32_t>(p), v);
        }
        return out;
    }
};

template <class F>
CokernelData<F> cokernel(const SparseMatrix<F>& a) {
    CokernelData<F> ck;
    ck.reduction = reduce_columns(a);
    ck.position.assign(a.rows(), -1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        if (ck.reduction.pivot_of_row[i] < 0) {
            ck.position[i] = static_cast<std::int64_t>(ck.kept_rows.size());
            ck.kept_rows.push_back(i);
        }
    }
    return ck;
}

}  // namespace kis
