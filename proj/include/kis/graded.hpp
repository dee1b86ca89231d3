#pragma once

#include "kis/elimination.hpp"

#include <map>
#include <memory>
#include <sstream>

namespace kis {

// Finitely supported degree -> dimension table (Betti data, G_r, stalk tables).
class GradedDims {
public:
    GradedDims() = default;
    static GradedDims from_vector(int lo, const std::vector<std::size_t>& v) {
        GradedDims g;
        for (std::size_t i = 0; i < v.size(); ++i) g.set(lo + static_cast<int>(i), v[i]);
        return g;
    }

    std::size_t at(int k) const {
        auto it = v_.find(k);
        return it == v_.end() ? 0 : it->second;
    }
    void set(int k, std::size_t n) {
        if (n == 0)
            v_.erase(k);
        else
            v_[k] = n;
    }
    void add(int k, std::size_t n) { set(k, at(k) + n); }
    bool empty() const { return v_.empty(); }
    int lo() const { return v_.empty() ? 0 : v_.begin()->first; }
    int hi() const { return v_.empty() ? -1 : v_.rbegin()->first; }
    std::size_t total() const {
        std::size_t t = 0;
        for (auto& [k, n] : v_) t += n;
        return t;
    }
    long long euler() const {
        long long e = 0;
        for (auto& [k, n] : v_) e += (k % 2 == 0 ? 1 : -1) * static_cast<long long>(n);
        return e;
    }
    std::vector<std::size_t> range(int lo, int hi) const {
        std::vector<std::size_t> out;
        for (int k = lo; k <= hi; ++k) out.push_back(at(k));
        return out;
    }
    GradedDims shifted(int n) const {  // dims of C[n]
        GradedDims g;
        for (auto& [k, m] : v_) g.set(k - n, m);
        return g;
    }
    const std::map<int, std::size_t>& entries() const { return v_; }

    // "(1,2,1)" read from degree `from`, padded through `to`.
    std::string str(int from = 0, int to = -1) const {
        int a = std::min(from, lo()), b = std::max(to, hi());
        std::ostringstream os;
        os << "(";
        for (int k = a; k <= b; ++k) os << (k > a ? "," : "") << at(k);
        os << ")";
        if (a != 0) os << "@" << a;
        return os.str();
    }

    friend bool operator==(const GradedDims& a, const GradedDims& b) { return a.v_ == b.v_; }
    friend bool operator!=(const GradedDims& a, const GradedDims& b) { return !(a == b); }
    friend GradedDims operator+(const GradedDims& a, const GradedDims& b) {
        GradedDims g = a;
        for (auto& [k, n] : b.v_) g.add(k, n);
        return g;
    }

private:
    std::map<int, std::size_t> v_;
};

enum class Check { yes, no };

// Bounded cochain complex of finite-dimensional Q-vector spaces.
class GradedComplex {
public:
    GradedComplex() : p_(std::make_shared<Data>()) {}

    // d[i] is the differential from degree lo+i to lo+i+1.
    GradedComplex(int lo, std::vector<std::size_t> dims, std::vector<RatMatrix> d, Check check = Check::yes) {
        if (d.size() != dims.size()) throw StructuralError("complex needs one differential per degree");
        auto data = std::make_shared<Data>();
        std::size_t a = 0, b = dims.size();
        while (a < b && dims[a] == 0) ++a;
        while (b > a && dims[b - 1] == 0) --b;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            std::size_t next = i + 1 < dims.size() ? dims[i + 1] : 0;
            if (d[i].cols() != dims[i] || d[i].rows() != next)
                throw StructuralError("differential in degree " + std::to_string(lo + static_cast<int>(i)) +
                                      " has shape " + d[i].shape() + ", expected " + std::to_string(next) + "x" +
                                      std::to_string(dims[i]));
        }
        data->lo = a < b ? lo + static_cast<int>(a) : 0;
        for (std::size_t i = a; i < b; ++i) {
            data->dims.push_back(dims[i]);
            data->d.push_back(std::move(d[i]));
        }
        if (!data->d.empty()) {
            data->d.back() = RatMatrix(0, data->dims.back());
            data->below = RatMatrix(data->dims.front(), 0);
        }
        p_ = std::move(data);
        if (check == Check::yes) verify();
    }

    static GradedComplex point(int degree = 0, std::size_t n = 1) {
        return GradedComplex(degree, {n}, {RatMatrix(0, n)});
    }

    int lo() const { return p_->lo; }
    int hi() const { return p_->lo + static_cast<int>(p_->dims.size()) - 1; }
    bool is_zero() const { return p_->dims.empty(); }
    std::size_t dim(int k) const {
        if (k < lo() || k > hi()) return 0;
        return p_->dims[static_cast<std::size_t>(k - lo())];
    }
    std::size_t total_dim() const {
        std::size_t t = 0;
        for (auto n : p_->dims) t += n;
        return t;
    }
    // Differential out of degree k; shape dim(k+1) x dim(k).
    const RatMatrix& d(int k) const {
        if (k >= lo() && k <= hi()) return p_->d[static_cast<std::size_t>(k - lo())];
        if (k == lo() - 1 && !is_zero()) return p_->below;
        return empty_matrix();
    }
    GradedDims dims() const {
        GradedDims g;
        for (int k = lo(); k <= hi(); ++k) g.set(k, dim(k));
        return g;
    }
    long long euler() const { return dims().euler(); }

    void verify() const {
        for (int k = lo(); k < hi(); ++k) {
            if (!(d(k + 1) * d(k)).is_zero())
                throw StructuralError("d o d != 0 in degree " + std::to_string(k));
        }
    }

    friend bool operator==(const GradedComplex& a, const GradedComplex& b) {
        if (a.is_zero() || b.is_zero()) return a.is_zero() == b.is_zero();
        if (a.lo() != b.lo() || a.hi() != b.hi()) return false;
        for (int k = a.lo(); k <= a.hi(); ++k)
            if (a.dim(k) != b.dim(k) || !(a.d(k) == b.d(k))) return false;
        return true;
    }

private:
    static const RatMatrix& empty_matrix() {
        static const RatMatrix m;
        return m;
    }
    struct Data {
        int lo = 0;
        std::vector<std::size_t> dims;
        std::vector<RatMatrix> d;
        RatMatrix below;  // differential into degree lo
    };
    std::shared_ptr<Data> p_;
};

// Degreewise matrices between two complexes.
class ChainMap {
public:
    ChainMap() = default;
    ChainMap(GradedComplex src, GradedComplex tgt, std::map<int, RatMatrix> f, Check check = Check::yes)
        : src_(std::move(src)), tgt_(std::move(tgt)) {
        for (auto& [k, m] : f) {
            if (m.rows() != tgt_.dim(k) || m.cols() != src_.dim(k))
                throw StructuralError("chain map block in degree " + std::to_string(k) + " has shape " + m.shape());
            if (!m.is_zero()) f_.emplace(k, std::move(m));
        }
        if (check == Check::yes && !is_chain_map())
            throw StructuralError("map does not commute with differentials");
    }

    static ChainMap identity(const GradedComplex& c) {
        std::map<int, RatMatrix> f;
        for (int k = c.lo(); k <= c.hi(); ++k) f.emplace(k, RatMatrix::identity(c.dim(k)));
        return ChainMap(c, c, std::move(f), Check::no);
    }
    static ChainMap zero(const GradedComplex& s, const GradedComplex& t) { return ChainMap(s, t, {}, Check::no); }

    const GradedComplex& source() const { return src_; }
    const GradedComplex& target() const { return tgt_; }
    RatMatrix f(int k) const {
        auto it = f_.find(k);
        if (it != f_.end()) return it->second;
        return RatMatrix(tgt_.dim(k), src_.dim(k));
    }
    const RatMatrix* find(int k) const {
        auto it = f_.find(k);
        return it == f_.end() ? nullptr : &it->second;
    }
    const std::map<int, RatMatrix>& blocks() const { return f_; }

    bool is_chain_map() const {
        int a = std::min(src_.lo(), tgt_.lo()) - 1, b = std::max(src_.hi(), tgt_.hi()) + 1;
        for (int k = a; k <= b; ++k) {
            RatMatrix lhs = f(k + 1) * src_.d(k);
            RatMatrix rhs = tgt_.d(k) * f(k);
            if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) {
                if (lhs.is_zero() && rhs.is_zero()) continue;
                return false;
            }
            if (!(lhs == rhs)) return false;
        }
        return true;
    }

    // this o g
    ChainMap after(const ChainMap& g) const {
        std::map<int, RatMatrix> h;
        for (auto& [k, m] : f_) {
            if (const RatMatrix* gk = g.find(k)) h.emplace(k, m * *gk);
        }
        return ChainMap(g.source(), tgt_, std::move(h), Check::no);
    }

    friend bool operator==(const ChainMap& a, const ChainMap& b) {
        if (!(a.src_ == b.src_) || !(a.tgt_ == b.tgt_)) return false;
        int lo = std::min(a.src_.lo(), a.tgt_.lo()), hi = std::max(a.src_.hi(), a.tgt_.hi());
        for (int k = lo; k <= hi; ++k)
            if (!(a.f(k) == b.f(k))) return false;
        return true;
    }

private:
    GradedComplex src_, tgt_;
    std::map<int, RatMatrix> f_;
};

// ---------------------------------------------------------------- cohomology

inline GradedDims cohomology_dims(const GradedComplex& c) {
    GradedDims out;
    std::map<int, std::size_t> rk;
    for (int k = c.lo() - 1; k <= c.hi(); ++k) rk[k] = rank(c.d(k));
    for (int k = c.lo(); k <= c.hi(); ++k) out.set(k, c.dim(k) - rk[k] - rk[k - 1]);
    return out;
}

struct Cohomology {
    GradedDims dims;
    std::map<int, RatMatrix> representatives;  // columns: cocycles whose classes form a basis
};

inline Cohomology cohomology(const GradedComplex& c) {
    Cohomology h;
    for (int k = c.lo(); k <= c.hi(); ++k) {
        auto z = kernel_basis(c.d(k));
        const RatMatrix& b = c.d(k - 1);
        RatMatrix stacked(c.dim(k), b.cols() + z.basis.cols());
        stacked.place(b, 0, 0);
        stacked.place(z.basis, 0, b.cols());
        auto cr = reduce_columns(stacked);
        std::vector<std::size_t> keep;
        for (std::size_t t = 0; t < z.basis.cols(); ++t)
            if (cr.is_pivot[b.cols() + t]) keep.push_back(t);
        h.dims.set(k, keep.size());
        h.representatives.emplace(k, z.basis.select_cols(keep));
    }
    return h;
}

// rank of H^k(f), from rank [[f^k, d_D^{k-1}],[d_C^k, 0]] = rk d_C^k + dim(f(Z^k) + B^k).
inline std::size_t induced_rank(const ChainMap& f, int k) {
    const GradedComplex& c = f.source();
    const GradedComplex& d = f.target();
    std::size_t nc = c.dim(k), nd1 = d.dim(k - 1), nd = d.dim(k), nc1 = c.dim(k + 1);
    if (nc == 0 || nd == 0) return 0;
    RatMatrix g(nd + nc1, nc + nd1);
    if (const RatMatrix* fk = f.find(k)) g.place(*fk, 0, 0);
    g.place(d.d(k - 1), 0, nc);
    g.place(c.d(k), nd, 0);
    return rank(g) - rank(c.d(k)) - rank(d.d(k - 1));
}

inline bool induces_iso_in_degree(const ChainMap& f, int k, const GradedDims& hs, const GradedDims& ht) {
    if (hs.at(k) != ht.at(k)) return false;
    if (hs.at(k) == 0) return true;
    return induced_rank(f, k) == hs.at(k);
}

// ---------------------------------------------------------------- constructions

inline GradedComplex shift(const GradedComplex& c, int n) {
    if (n == 0 || c.is_zero()) return c;
    std::vector<std::size_t> dims;
    std::vector<RatMatrix> d;
    for (int k = c.lo(); k <= c.hi(); ++k) {
        dims.push_back(c.dim(k));
        d.push_back(n % 2 == 0 ? c.d(k) : -c.d(k));
    }
    return GradedComplex(c.lo() - n, std::move(dims), std::move(d), Check::no);
}

inline ChainMap shift(const ChainMap& f, int n) {
    std::map<int, RatMatrix> g;
    for (auto& [k, m] : f.blocks()) g.emplace(k - n, m);
    return ChainMap(shift(f.source(), n), shift(f.target(), n), std::move(g), Check::no);
}

inline GradedComplex direct_sum(const GradedComplex& a, const GradedComplex& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    int lo = std::min(a.lo(), b.lo()), hi = std::max(a.hi(), b.hi());
    std::vector<std::size_t> dims;
    std::vector<RatMatrix> d;
    for (int k = lo; k <= hi; ++k) {
        RatMatrix m(a.dim(k + 1) + b.dim(k + 1), a.dim(k) + b.dim(k));
        m.place(a.d(k), 0, 0);
        m.place(b.d(k), a.dim(k + 1), a.dim(k));
        dims.push_back(a.dim(k) + b.dim(k));
        d.push_back(std::move(m));
    }
    return GradedComplex(lo, std::move(dims), std::move(d), Check::no);
}

// cone(f)^k = src^{k+1} (+) tgt^k,  d(x, y) = (-d x, f x + d y).
inline GradedComplex cone_of(const ChainMap& f) {
    const GradedComplex& s = f.source();
    const GradedComplex& t = f.target();
    if (s.is_zero()) return t;
    int lo = std::min(s.lo() - 1, t.lo()), hi = std::max(s.hi() - 1, t.hi());
    if (t.is_zero()) lo = s.lo() - 1, hi = s.hi() - 1;
    std::vector<std::size_t> dims;
    std::vector<RatMatrix> d;
    for (int k = lo; k <= hi; ++k) {
        std::size_t a0 = s.dim(k + 1), b0 = t.dim(k), a1 = s.dim(k + 2), b1 = t.dim(k + 1);
        RatMatrix m(a1 + b1, a0 + b0);
        m.place(s.d(k + 1), 0, 0, Rational(-1));
        if (const RatMatrix* fk = f.find(k + 1)) m.place(*fk, a1, 0);
        m.place(t.d(k), a1, a0);
        dims.push_back(a0 + b0);
        d.push_back(std::move(m));
    }
    return GradedComplex(lo, std::move(dims), std::move(d));
}

struct LowerTruncation {
    GradedComplex complex;   // ..., C^{k-1}, ker d^k, 0, ...
    ChainMap splitting;      // C -> tau<=k C, left inverse of the inclusion
    ChainMap inclusion;      // only filled when requested
    std::vector<std::size_t> free_coordinates;  // basis of ker d^k, indexed by coordinates of C^k
};

// Truncation below k together with a seeded splitting. The complement of
// ker d^k is spanned by the coordinate vectors of a column basis of d^k
// found in seeded order; projecting along it reads off the remaining
// coordinates, so the splitting is a coordinate selection.
inline LowerTruncation truncate_le(const GradedComplex& c, int k, std::uint64_t seed, bool with_inclusion) {
    LowerTruncation out;
    if (c.is_zero() || k < c.lo()) {
        out.complex = GradedComplex();
        out.splitting = ChainMap::zero(c, out.complex);
        out.inclusion = ChainMap::zero(out.complex, c);
        return out;
    }
    if (k >= c.hi()) {
        out.complex = c;
        out.splitting = ChainMap::identity(c);
        out.inclusion = ChainMap::identity(c);
        for (std::size_t i = 0; i < c.dim(k); ++i) out.free_coordinates.push_back(i);
        return out;
    }
    auto order = seeded_order(c.dim(k), seed);
    std::vector<std::size_t> free;
    RatMatrix kernel;
    if (with_inclusion) {
        auto kb = kernel_basis(c.d(k), order);
        free = kb.free;
        kernel = std::move(kb.basis);
    } else {
        auto cr = reduce_columns(c.d(k), order, false);
        for (std::size_t j = 0; j < c.dim(k); ++j)
            if (!cr.is_pivot[j]) free.push_back(j);
    }
    std::vector<std::size_t> dims;
    std::vector<RatMatrix> d;
    for (int j = c.lo(); j < k; ++j) {
        dims.push_back(c.dim(j));
        d.push_back(j + 1 == k ? c.d(j).select_rows(free) : c.d(j));
    }
    dims.push_back(free.size());
    d.emplace_back(0, free.size());
    out.complex = GradedComplex(c.lo(), std::move(dims), std::move(d), Check::no);

    std::map<int, RatMatrix> s, inc;
    for (int j = c.lo(); j < k; ++j) {
        s.emplace(j, RatMatrix::identity(c.dim(j)));
        inc.emplace(j, RatMatrix::identity(c.dim(j)));
    }
    s.emplace(k, RatMatrix::identity(c.dim(k)).select_rows(free));
    out.splitting = ChainMap(c, out.complex, std::move(s), Check::no);
    if (with_inclusion) {
        inc.emplace(k, std::move(kernel));
        out.inclusion = ChainMap(out.complex, c, std::move(inc), Check::no);
    }
    out.free_coordinates = std::move(free);
    return out;
}

inline std::pair<GradedComplex, ChainMap> tau_le(const GradedComplex& c, int k) {
    auto t = truncate_le(c, k, 0, true);
    return {t.complex, t.inclusion};
}

inline ChainMap split_onto_tau_le(const GradedComplex& c, int k, std::uint64_t seed) {
    return truncate_le(c, k, seed, false).splitting;
}

struct UpperTruncation {
    GradedComplex complex;  // ..., 0, coker d^{k-1}, C^{k+1}, ...
    ChainMap projection;
    std::vector<std::size_t> kept_rows;  // coordinates of C^k that give a basis of the cokernel
};

inline UpperTruncation truncate_ge(const GradedComplex& c, int k) {
    UpperTruncation out;
    if (c.is_zero() || k <= c.lo()) {
        out.complex = c;
        out.projection = ChainMap::identity(c);
        for (std::size_t i = 0; i < c.dim(k); ++i) out.kept_rows.push_back(i);
        return out;
    }
    if (k > c.hi()) {
        out.complex = GradedComplex();
        out.projection = ChainMap::zero(c, out.complex);
        return out;
    }
    auto ck = cokernel(c.d(k - 1));
    out.kept_rows = ck.kept_rows;
    std::vector<std::size_t> dims;
    std::vector<RatMatrix> d;
    dims.push_back(ck.kept_rows.size());
    d.push_back(c.d(k).select_cols(ck.kept_rows));
    for (int j = k + 1; j <= c.hi(); ++j) {
        dims.push_back(c.dim(j));
        d.push_back(c.d(j));
    }
    out.complex = GradedComplex(k, std::move(dims), std::move(d), Check::no);
    RatMatrix pk(ck.kept_rows.size(), c.dim(k));
    for (std::size_t i = 0; i < c.dim(k); ++i) pk.set_col(i, ck.project({{static_cast<std::uint32_t>(i), Rational(1)}}));
    std::map<int, RatMatrix> p;
    p.emplace(k, std::move(pk));
    for (int j = k + 1; j <= c.hi(); ++j) p.emplace(j, RatMatrix::identity(c.dim(j)));
    out.projection = ChainMap(c, out.complex, std::move(p), Check::no);
    return out;
}

inline std::pair<GradedComplex, ChainMap> tau_ge(const GradedComplex& c, int k) {
    auto t = truncate_ge(c, k);
    return {t.complex, t.projection};
}

// Koszul tensor product: d(x (x) y) = dx (x) y + (-1)^{|x|} x (x) dy.
inline GradedComplex tensor(const GradedComplex& a, const GradedComplex& b) {
    if (a.is_zero() || b.is_zero()) return GradedComplex();
    int lo = a.lo() + b.lo(), hi = a.hi() + b.hi();
    // offset[n][i] = position of the block A^i (x) B^{n-i} inside degree n
    auto offset = [&](int n, int i) {
        std::size_t o = 0;
        for (int j = a.lo(); j < i; ++j) o += a.dim(j) * b.dim(n - j);
        return o;
    };
    std::vector<std::size_t> dims;
    std::vector<RatMatrix> d;
    for (int n = lo; n <= hi; ++n) {
        std::size_t dn = 0, dn1 = 0;
        for (int i = a.lo(); i <= a.hi(); ++i) {
            dn += a.dim(i) * b.dim(n - i);
            dn1 += a.dim(i) * b.dim(n + 1 - i);
        }
        std::vector<std::tuple<std::size_t, std::size_t, Rational>> t;
        for (int i = a.lo(); i <= a.hi(); ++i) {
            int j = n - i;
            std::size_t na = a.dim(i), nb = b.dim(j);
            if (na == 0 || nb == 0) continue;
            std::size_t src0 = offset(n, i);
            // dx (x) y  lands in A^{i+1} (x) B^j
            const RatMatrix& da = a.d(i);
            std::size_t tgtA = offset(n + 1, i + 1);
            for (std::size_t x = 0; x < na; ++x)
                for (const auto& [x2, v] : da.col(x))
                    for (std::size_t y = 0; y < nb; ++y) t.emplace_back(tgtA + x2 * nb + y, src0 + x * nb + y, v);
            // (-1)^i x (x) dy  lands in A^i (x) B^{j+1}
            const RatMatrix& db = b.d(j);
            std::size_t nb1 = b.dim(j + 1);
            std::size_t tgtB = offset(n + 1, i);
            Rational sg(i % 2 == 0 ? 1 : -1);
            for (std::size_t x = 0; x < na; ++x)
                for (std::size_t y = 0; y < nb; ++y)
                    for (const auto& [y2, v] : db.col(y)) t.emplace_back(tgtB + x * nb1 + y2, src0 + x * nb + y, sg * v);
        }
        dims.push_back(dn);
        d.push_back(RatMatrix::from_triplets(dn1, dn, std::move(t)));
    }
    return GradedComplex(lo, std::move(dims), std::move(d));
}

// (C^v)^k = (C^{-k})^*, differential (-1)^k times the transpose.
inline GradedComplex dual_complex(const GradedComplex& c) {
    if (c.is_zero()) return c;
    std::vector<std::size_t> dims;
    std::vector<RatMatrix> d;
    for (int k = -c.hi(); k <= -c.lo(); ++k) {
        dims.push_back(c.dim(-k));
        RatMatrix m = c.d(-k - 1).transpose();
        d.push_back(k % 2 == 0 ? std::move(m) : -m);
    }
    return GradedComplex(-c.hi(), std::move(dims), std::move(d), Check::no);
}

// Dual of a chain map f: C -> D as D^v -> C^v.
inline ChainMap dual_map(const ChainMap& f, const GradedComplex& dual_src, const GradedComplex& dual_tgt) {
    std::map<int, RatMatrix> g;
    for (auto& [k, m] : f.blocks()) g.emplace(-k, m.transpose());
    return ChainMap(dual_tgt, dual_src, std::move(g), Check::no);
}

}  // namespace kis
