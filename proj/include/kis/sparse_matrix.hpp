#pragma once

#include "kis/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace kis {

struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class F>
using SparseVec = std::vector<std::pair<std::uint32_t, F>>;  // sorted by index, no zeros

// a + c*b for sorted sparse vectors.
template <class F>
SparseVec<F> axpy(const SparseVec<F>& a, const F& c, const SparseVec<F>& b) {
    SparseVec<F> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            out.emplace_back(b[j].first, c * b[j].second);
            ++j;
        } else {
            F v = a[i].second + c * b[j].second;
            if (!v.is_zero()) out.emplace_back(a[i].first, std::move(v));
            ++i;
            ++j;
        }
    }
    return out;
}

// Column-major sparse matrix over an exact field F.
template <class F>
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(cols) {}

    static SparseMatrix identity(std::size_t n) {
        SparseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.data_[i].emplace_back(static_cast<std::uint32_t>(i), F(1));
        return m;
    }

    // Triplets are summed; zero sums are dropped.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                      std::vector<std::tuple<std::size_t, std::size_t, F>> t) {
        SparseMatrix m(rows, cols);
        std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
            return std::tie(std::get<1>(a), std::get<0>(a)) < std::tie(std::get<1>(b), std::get<0>(b));
        });
        for (std::size_t k = 0; k < t.size();) {
            auto [r, c, v] = t[k];
            if (r >= rows || c >= cols) throw StructuralError("triplet out of range");
            std::size_t k2 = k + 1;
            while (k2 < t.size() && std::get<0>(t[k2]) == r && std::get<1>(t[k2]) == c) v += std::get<2>(t[k2++]);
            if (!v.is_zero()) m.data_[c].emplace_back(static_cast<std::uint32_t>(r), v);
            k = k2;
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const SparseVec<F>& col(std::size_t j) const { return data_[j]; }
    void set_col(std::size_t j, SparseVec<F> v) { data_[j] = std::move(v); }

    std::size_t nnz() const {
        std::size_t n = 0;
        for (const auto& c : data_) n += c.size();
        return n;
    }
    bool is_zero() const {
        for (const auto& c : data_)
            if (!c.empty()) return false;
        return true;
    }

    F at(std::size_t i, std::size_t j) const {
        const auto& c = data_.at(j);
        auto it = std::lower_bound(c.begin(), c.end(), i, [](const auto& e, std::size_t r) { return e.first < r; });
        if (it != c.end() && it->first == i) return it->second;
        return F(0);
    }

    SparseMatrix transpose() const {
        SparseMatrix t(cols_, rows_);
        for (std::size_t j = 0; j < cols_; ++j)
            for (const auto& [i, v] : data_[j]) t.data_[i].emplace_back(static_cast<std::uint32_t>(j), v);
        return t;
    }

    SparseMatrix operator-() const {
        SparseMatrix m = *this;
        for (auto& c : m.data_)
            for (auto& e : c) e.second = -e.second;
        return m;
    }
    SparseMatrix scaled(const F& s) const {
        if (s.is_zero()) return SparseMatrix(rows_, cols_);
        SparseMatrix m = *this;
        for (auto& c : m.data_)
            for (auto& e : c) e.second = e.second * s;
        return m;
    }

    friend SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b) {
        check_same(a, b);
        SparseMatrix m(a.rows_, a.cols_);
        for (std::size_t j = 0; j < a.cols_; ++j) m.data_[j] = axpy(a.data_[j], F(1), b.data_[j]);
        return m;
    }
    friend SparseMatrix operator-(const SparseMatrix& a, const SparseMatrix& b) {
        check_same(a, b);
        SparseMatrix m(a.rows_, a.cols_);
        for (std::size_t j = 0; j < a.cols_; ++j) m.data_[j] = axpy(a.data_[j], F(-1), b.data_[j]);
        return m;
    }

    friend SparseMatrix operator*(const SparseMatrix& a, const SparseMatrix& b) {
        if (a.cols_ != b.rows_)
            throw StructuralError("matrix product shape mismatch: " + a.shape() + " * " + b.shape());
        SparseMatrix m(a.rows_, b.cols_);
        std::vector<F> acc(a.rows_);
        std::vector<char> used(a.rows_, 0);
        std::vector<std::uint32_t> touched;
        for (std::size_t j = 0; j < b.cols_; ++j) {
            touched.clear();
            for (const auto& [k, bv] : b.data_[j]) {
                for (const auto& [i, av] : a.data_[k]) {
                    if (!used[i]) {
                        used[i] = 1;
                        touched.push_back(i);
                        acc[i] = av * bv;
                    } else {
                        acc[i] += av * bv;
                    }
                }
            }
            std::sort(touched.begin(), touched.end());
            auto& out = m.data_[j];
            for (auto i : touched) {
                if (!acc[i].is_zero()) out.emplace_back(i, acc[i]);
                used[i] = 0;
            }
        }
        return m;
    }

    SparseVec<F> apply(const SparseVec<F>& x) const {
        SparseVec<F> out;
        for (const auto& [k, v] : x) out = axpy(out, v, data_[k]);
        return out;
    }

    friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    // Rows listed in `rows` become rows 0..|rows|-1 of the result (order kept).
    SparseMatrix select_rows(const std::vector<std::size_t>& rows) const {
        std::vector<std::int64_t> pos(rows_, -1);
        for (std::size_t k = 0; k < rows.size(); ++k) pos.at(rows[k]) = static_cast<std::int64_t>(k);
        SparseMatrix m(rows.size(), cols_);
        for (std::size_t j = 0; j < cols_; ++j) {
            auto& out = m.data_[j];
            for (const auto& [i, v] : data_[j])
                if (pos[i] >= 0) out.emplace_back(static_cast<std::uint32_t>(pos[i]), v);
            std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        }
        return m;
    }
    SparseMatrix select_cols(const std::vector<std::size_t>& cols) const {
        SparseMatrix m(rows_, cols.size());
        for (std::size_t k = 0; k < cols.size(); ++k) m.data_[k] = data_.at(cols[k]);
        return m;
    }

    // Block placement helper: copy `b` into this at offset (r0, c0).
    void place(const SparseMatrix& b, std::size_t r0, std::size_t c0, const F& scale = F(1)) {
        if (r0 + b.rows_ > rows_ || c0 + b.cols_ > cols_) throw StructuralError("block placement out of range");
        for (std::size_t j = 0; j < b.cols_; ++j) {
            SparseVec<F> shifted;
            shifted.reserve(b.data_[j].size());
            for (const auto& [i, v] : b.data_[j]) shifted.emplace_back(static_cast<std::uint32_t>(i + r0), v * scale);
            data_[c0 + j] = axpy(data_[c0 + j], F(1), shifted);
        }
    }

    std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

private:
    static void check_same(const SparseMatrix& a, const SparseMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw StructuralError("matrix sum shape mismatch: " + a.shape() + " vs " + b.shape());
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<SparseVec<F>> data_;
};

using RatMatrix = SparseMatrix<Rational>;
using RatVec = SparseVec<Rational>;

}  // namespace kis
