#pragma once

#include "kis/iscomplex.hpp"

#include <gmpxx.h>

#include <functional>
#include <numeric>
#include <set>

namespace kis::toric {

using IVec = std::vector<long long>;
using QVec = std::vector<Rational>;

// ---------------------------------------------------------------- small exact linear algebra

namespace la {

// Row echelon form in place; returns pivot columns.
inline std::vector<std::size_t> echelon(std::vector<QVec>& m) {
    std::vector<std::size_t> piv;
    if (m.empty()) return piv;
    const std::size_t cols = m[0].size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
        std::size_t p = r;
        while (p < m.size() && m[p][c].is_zero()) ++p;
        if (p == m.size()) continue;
        std::swap(m[p], m[r]);
        Rational inv = Rational(1) / m[r][c];
        for (auto& v : m[r]) v = v * inv;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (i == r || m[i][c].is_zero()) continue;
            Rational f = m[i][c];
            for (std::size_t j = 0; j < cols; ++j) m[i][j] = m[i][j] - f * m[r][j];
        }
        piv.push_back(c);
        ++r;
    }
    m.resize(r);
    return piv;
}

inline std::size_t rank(std::vector<QVec> rows) { return echelon(rows).size(); }

// Basis of {x : rows . x = 0}.
inline std::vector<QVec> kernel(std::vector<QVec> rows, std::size_t n) {
    auto piv = echelon(rows);
    std::vector<bool> is_piv(n, false);
    for (auto p : piv) is_piv[p] = true;
    std::vector<QVec> out;
    for (std::size_t f = 0; f < n; ++f) {
        if (is_piv[f]) continue;
        QVec v(n, Rational(0));
        v[f] = Rational(1);
        for (std::size_t r = 0; r < piv.size(); ++r) v[piv[r]] = Rational(0) - rows[r][f];
        out.push_back(std::move(v));
    }
    return out;
}

// Coordinates of v in the span of the given independent vectors, if inside.
inline std::optional<QVec> solve(const std::vector<QVec>& basis, const QVec& v) {
    const std::size_t n = v.size(), k = basis.size();
    std::vector<QVec> m(n, QVec(k + 1, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) m[i][j] = basis[j][i];
        m[i][k] = v[i];
    }
    auto piv = echelon(m);
    QVec x(k, Rational(0));
    for (std::size_t r = 0; r < piv.size(); ++r) {
        if (piv[r] == k) return std::nullopt;
        x[piv[r]] = m[r][k];
    }
    return x;
}

inline QVec to_q(const IVec& v) {
    QVec q;
    for (auto a : v) q.emplace_back(static_cast<std::int64_t>(a));
    return q;
}

inline Rational dot(const QVec& a, const QVec& b) {
    Rational s(0);
    for (std::size_t i = 0; i < a.size(); ++i) s = s + a[i] * b[i];
    return s;
}

// Independent subset spanning the same space.
inline std::vector<QVec> span_basis(const std::vector<QVec>& v) {
    std::vector<QVec> out, acc;
    for (const auto& x : v) {
        acc.push_back(x);
        if (rank(acc) > out.size())
            out.push_back(x);
        else
            acc.pop_back();
    }
    return out;
}

// Fourier-Motzkin feasibility of {eq_i . x = 0} u {ge_j . x >= b_j}.
inline bool feasible(std::vector<QVec> eqs, std::vector<std::pair<QVec, Rational>> ges, std::size_t n) {
    // eliminate equalities by substitution
    for (auto& e : eqs) {
        std::size_t piv = n;
        for (std::size_t j = 0; j < n; ++j)
            if (!e[j].is_zero()) {
                piv = j;
                break;
            }
        if (piv == n) continue;
        auto subst = [&](QVec& row) {
            if (row[piv].is_zero()) return;
            Rational f = row[piv] / e[piv];
            for (std::size_t j = 0; j < n; ++j) row[j] = row[j] - f * e[j];
        };
        for (auto& e2 : eqs)
            if (&e2 != &e) subst(e2);
        for (auto& g : ges) subst(g.first);
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<std::pair<QVec, Rational>> pos, neg, keep;
        for (auto& g : ges) {
            int s = g.first[j].sign();
            (s > 0 ? pos : s < 0 ? neg : keep).push_back(g);
        }
        for (auto& p : pos)
            for (auto& q : neg) {
                Rational a = p.first[j], b = Rational(0) - q.first[j];
                QVec row(n, Rational(0));
                for (std::size_t t = 0; t < n; ++t) row[t] = p.first[t] / a + q.first[t] / b;
                keep.emplace_back(std::move(row), p.second / a + q.second / b);
            }
        // drop duplicates to keep the system small
        std::sort(keep.begin(), keep.end(), [](const auto& x, const auto& y) {
            for (std::size_t t = 0; t < x.first.size(); ++t)
                if (!(x.first[t] == y.first[t])) return x.first[t] < y.first[t];
            return x.second < y.second;
        });
        keep.erase(std::unique(keep.begin(), keep.end(),
                               [](const auto& x, const auto& y) { return x.first == y.first && x.second == y.second; }),
                   keep.end());
        ges = std::move(keep);
    }
    for (auto& g : ges)
        if (g.second.sign() > 0) return false;
    return true;
}

// Integer basis of ker_Z(a) by unimodular column operations.
inline std::vector<IVec> integer_kernel(const std::vector<IVec>& a, std::size_t n) {
    std::vector<IVec> cols(n, IVec(a.size() + n, 0));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < a.size(); ++i) cols[j][i] = a[i][j];
        cols[j][a.size() + j] = 1;
    }
    std::size_t lead = 0;
    for (std::size_t i = 0; i < a.size() && lead < n; ++i) {
        for (;;) {
            std::size_t best = n;
            for (std::size_t j = lead; j < n; ++j)
                if (cols[j][i] != 0 && (best == n || std::llabs(cols[j][i]) < std::llabs(cols[best][i]))) best = j;
            if (best == n) break;
            std::swap(cols[best], cols[lead]);
            bool done = true;
            for (std::size_t j = lead + 1; j < n; ++j) {
                if (cols[j][i] == 0) continue;
                long long f = cols[j][i] / cols[lead][i];
                for (std::size_t t = 0; t < cols[j].size(); ++t) cols[j][t] -= f * cols[lead][t];
                if (cols[j][i] != 0) done = false;
            }
            if (done) {
                ++lead;
                break;
            }
        }
    }
    std::vector<IVec> out;
    for (std::size_t j = lead; j < n; ++j) out.emplace_back(cols[j].begin() + static_cast<long>(a.size()), cols[j].end());
    return out;
}

inline mpz_class det(std::vector<std::vector<mpz_class>> m) {
    const std::size_t n = m.size();
    mpz_class sign = 1, prev = 1;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        while (p < n && m[p][k] == 0) ++p;
        if (p == n) return 0;
        if (p != k) {
            std::swap(m[p], m[k]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
        prev = m[k][k];
    }
    return sign * m[n - 1][n - 1];
}

}  // namespace la

// ---------------------------------------------------------------- fans

struct Fan {
    int rank = 0;
    std::vector<IVec> rays;
    std::vector<std::vector<int>> cones;  // sorted ray indices, every face listed

    int find(const std::vector<int>& c) const {
        for (std::size_t i = 0; i < cones.size(); ++i)
            if (cones[i] == c) return static_cast<int>(i);
        return -1;
    }
    std::vector<QVec> generators(int cone) const {
        std::vector<QVec> g;
        for (int r : cones[static_cast<std::size_t>(cone)]) g.push_back(la::to_q(rays[static_cast<std::size_t>(r)]));
        return g;
    }
    int dim(int cone) const { return static_cast<int>(la::rank(generators(cone))); }
    bool is_face(int small, int big) const {
        const auto& a = cones[static_cast<std::size_t>(small)];
        const auto& b = cones[static_cast<std::size_t>(big)];
        return std::includes(b.begin(), b.end(), a.begin(), a.end());
    }
    std::string cone_name(int cone) const {
        std::string s = "{";
        for (std::size_t i = 0; i < cones[static_cast<std::size_t>(cone)].size(); ++i)
            s += (i ? "," : "") + std::to_string(cones[static_cast<std::size_t>(cone)][i]);
        return s + "}";
    }
};

struct FanReport {
    std::vector<std::string> violations;
    std::vector<std::string> notes;
    bool valid() const { return violations.empty(); }
};

namespace detail {

inline std::string vec_str(const IVec& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

// rays of `cone` that span a face, i.e. some m >= 0 on the cone vanishes
// exactly on them
inline bool spans_face(const std::vector<QVec>& zero, const std::vector<QVec>& pos, std::size_t n) {
    std::vector<std::pair<QVec, Rational>> ges;
    for (const auto& v : pos) ges.emplace_back(v, Rational(1));
    return la::feasible(zero, ges, n);
}

}  // namespace detail

// Normalizes rays to primitive vectors and sorts cone index lists, then
// checks strong convexity, closure under faces and pairwise intersections.
inline FanReport validate_fan(Fan& f) {
    FanReport r;
    const std::size_t n = static_cast<std::size_t>(f.rank);
    if (f.rank < 1) r.violations.push_back("rank must be positive");
    for (std::size_t i = 0; i < f.rays.size(); ++i) {
        auto& v = f.rays[i];
        if (v.size() != n) {
            r.violations.push_back("ray " + std::to_string(i) + " has the wrong length");
            continue;
        }
        long long g = 0;
        for (auto a : v) g = std::gcd(g, std::llabs(a));
        if (g == 0) {
            r.violations.push_back("ray " + std::to_string(i) + " is zero");
            continue;
        }
        if (g != 1) {
            for (auto& a : v) a /= g;
            r.notes.push_back("ray " + std::to_string(i) + " normalized to primitive " + detail::vec_str(v));
        }
    }
    for (std::size_t i = 0; i < f.rays.size(); ++i)
        for (std::size_t j = i + 1; j < f.rays.size(); ++j)
            if (f.rays[i] == f.rays[j]) r.violations.push_back("rays " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
    if (!r.valid()) return r;
    std::set<std::vector<int>> seen;
    for (auto& c : f.cones) {
        std::sort(c.begin(), c.end());
        if (std::adjacent_find(c.begin(), c.end()) != c.end()) r.violations.push_back("cone repeats a ray");
        for (int i : c)
            if (i < 0 || i >= static_cast<int>(f.rays.size())) r.violations.push_back("cone uses unknown ray " + std::to_string(i));
        if (!seen.insert(c).second) r.violations.push_back("cone listed twice");
    }
    if (!r.valid()) return r;
    for (std::size_t ci = 0; ci < f.cones.size(); ++ci) {
        const auto& c = f.cones[ci];
        std::string nm = f.cone_name(static_cast<int>(ci));
        auto gens = f.generators(static_cast<int>(ci));
        if (!detail::spans_face({}, gens, n)) {
            r.violations.push_back("cone " + nm + " is not strongly convex");
            continue;
        }
        // every face (given by a subset of rays) must be listed, and every
        // listed ray must span an extremal ray
        const std::size_t k = c.size();
        if (k > 20) {
            r.violations.push_back("cone " + nm + " has too many rays");
            continue;
        }
        for (std::size_t mask = 0; mask < (std::size_t(1) << k); ++mask) {
            std::vector<QVec> zero, pos;
            std::vector<int> sub;
            for (std::size_t b = 0; b < k; ++b) {
                if (mask & (std::size_t(1) << b)) {
                    zero.push_back(gens[b]);
                    sub.push_back(c[b]);
                } else {
                    pos.push_back(gens[b]);
                }
            }
            if (!detail::spans_face(zero, pos, n)) {
                if (sub.size() == 1) r.violations.push_back("ray " + std::to_string(sub[0]) + " is not extremal in cone " + nm);
                continue;
            }
            if (f.find(sub) < 0) {
                std::string s = "{";
                for (std::size_t t = 0; t < sub.size(); ++t) s += (t ? "," : "") + std::to_string(sub[t]);
                r.violations.push_back("face " + s + "} of cone " + nm + " is missing");
            }
        }
    }
    if (!r.valid()) return r;
    for (std::size_t a = 0; a < f.cones.size(); ++a)
        for (std::size_t b = a + 1; b < f.cones.size(); ++b) {
            const auto& ca = f.cones[a];
            const auto& cb = f.cones[b];
            std::vector<int> common;
            std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(), std::back_inserter(common));
            std::vector<QVec> zero;
            std::vector<std::pair<QVec, Rational>> ges;
            for (int i : common) zero.push_back(la::to_q(f.rays[static_cast<std::size_t>(i)]));
            for (int i : ca)
                if (!std::binary_search(common.begin(), common.end(), i))
                    ges.emplace_back(la::to_q(f.rays[static_cast<std::size_t>(i)]), Rational(1));
            for (int i : cb)
                if (!std::binary_search(common.begin(), common.end(), i)) {
                    QVec v = la::to_q(f.rays[static_cast<std::size_t>(i)]);
                    for (auto& x : v) x = Rational(0) - x;
                    ges.emplace_back(std::move(v), Rational(1));
                }
            if (!la::feasible(zero, ges, n))
                r.violations.push_back("cones " + f.cone_name(static_cast<int>(a)) + " and " +
                                       f.cone_name(static_cast<int>(b)) + " do not meet in a common face");
        }
    return r;
}

struct Multiplicity {
    bool simplicial = true;
    long long value = 1;
    bool smooth() const { return simplicial && value == 1; }
    std::string str() const { return simplicial ? std::to_string(value) : "non-simplicial"; }
};

// Index of the lattice spanned by the rays in its saturation: the gcd of
// the maximal minors of the ray matrix.
inline Multiplicity multiplicity(const Fan& f, int cone) {
    const auto& c = f.cones[static_cast<std::size_t>(cone)];
    Multiplicity m;
    const std::size_t k = c.size();
    if (k == 0) return m;
    if (static_cast<std::size_t>(f.dim(cone)) != k) {
        m.simplicial = false;
        m.value = 0;
        return m;
    }
    const std::size_t n = static_cast<std::size_t>(f.rank);
    mpz_class g = 0;
    std::vector<std::size_t> cols(k);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
        if (depth == k) {
            std::vector<std::vector<mpz_class>> mat(k, std::vector<mpz_class>(k));
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    mat[i][j] = static_cast<long>(f.rays[static_cast<std::size_t>(c[i])][cols[j]]);
            mpz_class d = abs(la::det(mat));
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), d.get_mpz_t());
            return;
        }
        for (std::size_t j = start; j < n; ++j) {
            cols[depth] = j;
            rec(j + 1, depth + 1);
        }
    };
    rec(0, 0);
    m.value = g.get_si();
    return m;
}

struct SliceFan {
    Fan fan;
    std::vector<IVec> basis;   // Z-basis of span(sigma) n Z^d
    std::vector<int> face_of;  // slice cone -> original cone
};

// sigma and its faces written in the lattice span(sigma) n Z^d.
inline SliceFan slice_fan(const Fan& f, int cone) {
    const std::size_t n = static_cast<std::size_t>(f.rank);
    auto gens = f.generators(cone);
    auto perp = la::kernel(gens, n);
    std::vector<IVec> a;
    for (auto& v : perp) {
        mpz_class l = 1;
        for (auto& x : v) {
            mpz_class den = x.to_mpq().get_den();
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), den.get_mpz_t());
        }
        IVec row;
        for (auto& x : v) row.push_back(mpq_class(x.to_mpq() * l).get_num().get_si());
        a.push_back(row);
    }
    SliceFan s;
    s.basis = a.empty() ? [&] {
        std::vector<IVec> id(n, IVec(n, 0));
        for (std::size_t i = 0; i < n; ++i) id[i][i] = 1;
        return id;
    }()
                        : la::integer_kernel(a, n);
    s.fan.rank = static_cast<int>(s.basis.size());
    std::vector<QVec> bq;
    for (auto& b : s.basis) bq.push_back(la::to_q(b));
    const auto& c = f.cones[static_cast<std::size_t>(cone)];
    for (int r : c) {
        auto x = la::solve(bq, la::to_q(f.rays[static_cast<std::size_t>(r)]));
        if (!x) throw StructuralError("ray outside the span of its cone");
        IVec iv;
        for (auto& q : *x) {
            if (q.to_mpq().get_den() != 1) throw StructuralError("slice lattice basis is not saturated");
            iv.push_back(q.to_mpq().get_num().get_si());
        }
        s.fan.rays.push_back(iv);
    }
    for (std::size_t i = 0; i < f.cones.size(); ++i) {
        if (!f.is_face(static_cast<int>(i), cone)) continue;
        std::vector<int> sub;
        for (int r : f.cones[i]) sub.push_back(static_cast<int>(std::find(c.begin(), c.end(), r) - c.begin()));
        std::sort(sub.begin(), sub.end());
        s.fan.cones.push_back(sub);
        s.face_of.push_back(static_cast<int>(i));
    }
    return s;
}

// ---------------------------------------------------------------- orbit stratifications

enum class Mode { all_orbits, singular_orbits };

inline Mode parse_mode(const std::string& s) {
    if (s == "all" || s == "allOrbits") return Mode::all_orbits;
    if (s == "singular" || s == "singularOrbits") return Mode::singular_orbits;
    throw StructuralError("unknown stratification '" + s + "' (expected all or singular)");
}

inline std::string mode_name(Mode m) { return m == Mode::all_orbits ? "allOrbits" : "singularOrbits"; }

struct OrbitStratification {
    Mode mode = Mode::singular_orbits;
    std::vector<bool> is_stratum;  // per cone
    std::vector<int> strata;       // cone indices, by increasing dimension
    std::vector<int> codim;        // real codimension 2 dim sigma, per stratum
    std::vector<Multiplicity> mult;  // per cone
};

inline OrbitStratification orbit_stratification(const Fan& f, Mode mode) {
    OrbitStratification s;
    s.mode = mode;
    const std::size_t nc = f.cones.size();
    s.is_stratum.assign(nc, false);
    for (std::size_t i = 0; i < nc; ++i) s.mult.push_back(multiplicity(f, static_cast<int>(i)));
    for (std::size_t i = 0; i < nc; ++i) {
        if (f.cones[i].empty()) continue;
        s.is_stratum[i] = mode == Mode::all_orbits || !s.mult[i].smooth();
    }
    // closure: a cone containing a singular face is singular
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < nc; ++j)
            if (s.is_stratum[i] && f.is_face(static_cast<int>(i), static_cast<int>(j))) s.is_stratum[j] = true;
    std::vector<int> order;
    for (std::size_t i = 0; i < nc; ++i)
        if (s.is_stratum[i]) order.push_back(static_cast<int>(i));
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return f.dim(a) < f.dim(b); });
    s.strata = order;
    for (int c : order) s.codim.push_back(2 * f.dim(c));
    return s;
}

// ---------------------------------------------------------------- exterior algebra on Q^d

namespace ext {

using LVec = QVec;  // coordinates on the subsets of {0..d-1}, indexed by bitmask

inline int popcount(unsigned m) { return __builtin_popcount(m); }

inline int wedge_sign(unsigned a, unsigned b) {
    int inv = 0;
    for (unsigned i = 0; i < 32; ++i)
        if (a & (1u << i)) inv += popcount(b & ((1u << i) - 1));
    return inv % 2 ? -1 : 1;
}

inline LVec one(int d) {
    LVec v(std::size_t(1) << d, Rational(0));
    v[0] = Rational(1);
    return v;
}

inline LVec wedge(const LVec& a, const LVec& b) {
    LVec out(a.size(), Rational(0));
    for (unsigned i = 0; i < a.size(); ++i) {
        if (a[i].is_zero()) continue;
        for (unsigned j = 0; j < b.size(); ++j) {
            if (b[j].is_zero() || (i & j)) continue;
            Rational t = a[i] * b[j];
            out[i | j] = wedge_sign(i, j) == 1 ? out[i | j] + t : out[i | j] - t;
        }
    }
    return out;
}

inline LVec from_vector(const QVec& v) {
    LVec out(std::size_t(1) << v.size(), Rational(0));
    for (std::size_t i = 0; i < v.size(); ++i) out[std::size_t(1) << i] = v[i];
    return out;
}

// Basis of Lambda(W) inside Lambda(Q^d), grouped by degree, for W spanned by
// the given independent vectors.
struct Sub {
    std::vector<std::vector<LVec>> by_degree;
    std::size_t dim() const { return by_degree.empty() ? 0 : by_degree.size() - 1; }
};

inline Sub exterior(const std::vector<QVec>& w, int d) {
    Sub s;
    const std::size_t m = w.size();
    s.by_degree.resize(m + 1);
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        LVec v = one(d);
        for (std::size_t i = 0; i < m; ++i)
            if (mask & (1u << i)) v = wedge(v, from_vector(w[i]));
        s.by_degree[static_cast<std::size_t>(popcount(mask))].push_back(std::move(v));
    }
    return s;
}

}  // namespace ext

// ---------------------------------------------------------------- fan sheaf models
//
// Values are formal: over a face tau inside an ambient subspace A the
// sections are Lambda(tau^perp n A) (x) G(tau), with G(tau) = Q in degree 0
// off the strata. Gluing uses a bar complex B_A(S) over an open set S of
// faces: pieces are chains s_0 > s_1 > ... > s_p of faces with a value in
// W_A(s_p), in degree deg + p. The differential inserts faces into the
// chain and, at the tail, applies the attachment
//   Phi_A(s): W_A(s) -> B_A(faces of s below s),
// which for a stratum face is the cocycle map of its vertex stalk into the
// punctured slice, wedged with the exterior factor.

struct PieceVec {
    std::vector<int> chain;  // decreasing faces
    int h = 0;               // basis element of G(last face)
    ext::LVec lambda;        // exterior coefficient inside Lambda(Q^d)
};

struct FaceData {
    GradedDims stalk;                     // vertex stalk G(sigma)
    std::optional<GradedDims> punctured;  // punctured slice, for strata
    std::vector<int> degree;              // degree of each basis element of G(sigma)
    bool stratum = false;
    std::vector<std::vector<PieceVec>> attach;  // per basis element, its cocycle in B_sigma(faces of sigma)
};

struct FanSheafModel {
    Theory theory = Theory::IS;
    Perversity perversity;
    Mode mode = Mode::singular_orbits;
    std::vector<FaceData> faces;
};

namespace detail {

inline std::vector<QVec> perp_within(const Fan& f, int tau, const std::vector<QVec>& w_basis) {
    std::vector<QVec> rows;
    for (const auto& r : f.generators(tau)) {
        QVec row;
        for (const auto& b : w_basis) row.push_back(la::dot(r, b));
        rows.push_back(row);
    }
    auto ker = la::kernel(rows, w_basis.size());
    std::vector<QVec> out;
    for (const auto& y : ker) {
        QVec v(static_cast<std::size_t>(f.rank), Rational(0));
        for (std::size_t i = 0; i < y.size(); ++i)
            for (std::size_t t = 0; t < v.size(); ++t) v[t] = v[t] + y[i] * w_basis[i][t];
        out.push_back(v);
    }
    return out;
}

// Coordinates on a subspace of Lambda(Q^d) through a set of pivot rows.
struct Coords {
    std::vector<ext::LVec> basis;
    std::vector<std::size_t> rows;
    std::vector<QVec> inv;  // inv * v[rows] = coordinates

    explicit Coords(std::vector<ext::LVec> b) : basis(std::move(b)) {
        if (basis.empty()) return;
        const std::size_t n = basis[0].size(), k = basis.size();
        // pick independent rows greedily
        std::vector<QVec> acc;
        for (std::size_t r = 0; r < n && rows.size() < k; ++r) {
            QVec row;
            for (const auto& v : basis) row.push_back(v[r]);
            acc.push_back(row);
            if (la::rank(acc) > rows.size())
                rows.push_back(r);
            else
                acc.pop_back();
        }
        if (rows.size() != k) throw StructuralError("exterior basis is dependent");
        // invert the k x k block
        std::vector<QVec> m(k, QVec(2 * k, Rational(0)));
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) m[i][j] = basis[j][rows[i]];
            m[i][k + i] = Rational(1);
        }
        la::echelon(m);
        for (std::size_t i = 0; i < k; ++i) inv.emplace_back(m[i].begin() + static_cast<long>(k), m[i].end());
    }

    QVec operator()(const ext::LVec& v) const {
        QVec x(basis.size(), Rational(0));
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = 0; j < rows.size(); ++j)
                if (!inv[i][j].is_zero()) x[i] = x[i] + inv[i][j] * v[rows[j]];
        return x;
    }
};

inline bool nonzero(const ext::LVec& v) {
    for (const auto& x : v)
        if (!x.is_zero()) return true;
    return false;
}

struct BarElem {
    int chain;
    int k;           // exterior degree
    std::size_t li;  // index in the exterior basis of that degree
    int h;           // basis element of G(last face)
    friend bool operator<(const BarElem& a, const BarElem& b) {
        return std::tie(a.chain, a.k, a.li, a.h) < std::tie(b.chain, b.k, b.li, b.h);
    }
};

struct BarSpace {
    std::vector<std::vector<int>> chains;
    std::map<std::vector<int>, int> chain_id;
    std::vector<std::vector<Coords>> lambda;  // per face in S: coordinates on Lambda^k(tau^perp n A)
    std::map<int, std::vector<BarElem>> elems;  // total degree -> basis
    std::map<BarElem, std::size_t> index;       // element -> position in its degree
    GradedComplex complex;
};

inline std::vector<std::vector<int>> decreasing_chains(const Fan& f, const std::vector<int>& s) {
    std::vector<std::vector<int>> out;
    std::function<void(std::vector<int>&)> grow = [&](std::vector<int>& c) {
        out.push_back(c);
        for (int t : s)
            if (t != c.back() && f.is_face(t, c.back())) {
                c.push_back(t);
                grow(c);
                c.pop_back();
            }
    };
    for (int t : s) {
        std::vector<int> c{t};
        grow(c);
    }
    return out;
}

// Bar complex B_A(S); S must contain every face of its members.
inline BarSpace bar_space(const Fan& f, const std::vector<FaceData>& faces, const std::vector<int>& s,
                          const std::vector<QVec>& a_basis) {
    BarSpace b;
    b.lambda.resize(f.cones.size());
    for (int t : s) {
        auto sub = ext::exterior(perp_within(f, t, a_basis), f.rank);
        for (auto& layer : sub.by_degree) b.lambda[static_cast<std::size_t>(t)].emplace_back(std::move(layer));
    }
    b.chains = decreasing_chains(f, s);
    std::sort(b.chains.begin(), b.chains.end());
    for (std::size_t i = 0; i < b.chains.size(); ++i) b.chain_id[b.chains[i]] = static_cast<int>(i);
    for (std::size_t ci = 0; ci < b.chains.size(); ++ci) {
        const auto& c = b.chains[ci];
        const int p = static_cast<int>(c.size()) - 1;
        const auto& fd = faces[static_cast<std::size_t>(c.back())];
        const auto& lam = b.lambda[static_cast<std::size_t>(c.back())];
        for (std::size_t k = 0; k < lam.size(); ++k)
            for (std::size_t li = 0; li < lam[k].basis.size(); ++li)
                for (std::size_t h = 0; h < fd.degree.size(); ++h) {
                    BarElem e{static_cast<int>(ci), static_cast<int>(k), li, static_cast<int>(h)};
                    auto& v = b.elems[static_cast<int>(k) + fd.degree[h] + p];
                    b.index[e] = v.size();
                    v.push_back(e);
                }
    }
    if (b.elems.empty()) return b;
    const int lo = b.elems.begin()->first, hi = b.elems.rbegin()->first;
    std::vector<std::size_t> dims;
    for (int k = lo; k <= hi; ++k) dims.push_back(b.elems.count(k) ? b.elems[k].size() : 0);

    std::vector<std::vector<std::tuple<std::size_t, std::size_t, Rational>>> trip(dims.size());
    for (auto& [deg, list] : b.elems) {
        auto& out = trip[static_cast<std::size_t>(deg - lo)];
        for (std::size_t col = 0; col < list.size(); ++col) {
            const BarElem& e = list[col];
            const auto& c = b.chains[static_cast<std::size_t>(e.chain)];
            const int p = static_cast<int>(c.size()) - 1;
            const int last = c.back();
            // insertions
            for (int j = 0; j <= p; ++j)
                for (int rho : s) {
                    if (std::find(c.begin(), c.end(), rho) != c.end()) continue;
                    if (!f.is_face(c[static_cast<std::size_t>(j)], rho)) continue;
                    if (j > 0 && !f.is_face(rho, c[static_cast<std::size_t>(j - 1)])) continue;
                    std::vector<int> c2 = c;
                    c2.insert(c2.begin() + j, rho);
                    BarElem e2{b.chain_id.at(c2), e.k, e.li, e.h};
                    out.emplace_back(b.index.at(e2), col, Rational(j % 2 ? -1 : 1));
                }
            // attachment at the tail, sign (-1)^{p+1}
            const Rational sign(p % 2 ? 1 : -1);
            const ext::LVec& a = b.lambda[static_cast<std::size_t>(last)][static_cast<std::size_t>(e.k)].basis[e.li];
            const auto& fd = faces[static_cast<std::size_t>(last)];
            auto emit = [&](const std::vector<int>& tail, int h2, const ext::LVec& coeff) {
                ext::LVec v = ext::wedge(a, coeff);
                if (!nonzero(v)) return;
                std::vector<int> c2 = c;
                c2.insert(c2.end(), tail.begin(), tail.end());
                const int id2 = b.chain_id.at(c2);
                int k2 = 0;
                for (std::size_t z = 0; z < v.size(); ++z)
                    if (!v[z].is_zero()) k2 = ext::popcount(static_cast<unsigned>(z));
                const auto& lam2 = b.lambda[static_cast<std::size_t>(tail.back())];
                if (k2 >= static_cast<int>(lam2.size())) throw StructuralError("attachment leaves the exterior factor");
                QVec x = lam2[static_cast<std::size_t>(k2)](v);
                ext::LVec back(v.size(), Rational(0));
                for (std::size_t li = 0; li < x.size(); ++li)
                    for (std::size_t z = 0; z < v.size(); ++z) back[z] = back[z] + x[li] * lam2[static_cast<std::size_t>(k2)].basis[li][z];
                if (back != v) throw StructuralError("attachment leaves the exterior factor");
                for (std::size_t li = 0; li < x.size(); ++li)
                    if (!x[li].is_zero())
                        out.emplace_back(b.index.at(BarElem{id2, k2, li, h2}), col, sign * x[li]);
            };
            if (!fd.stratum) {
                for (int rho : s)
                    if (rho != last && f.is_face(rho, last)) emit({rho}, 0, ext::one(f.rank));
            } else {
                for (const auto& pv : fd.attach[static_cast<std::size_t>(e.h)]) emit(pv.chain, pv.h, pv.lambda);
            }
        }
    }
    std::vector<RatMatrix> d;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        std::size_t next = i + 1 < dims.size() ? dims[i + 1] : 0;
        d.push_back(RatMatrix::from_triplets(next, dims[i], std::move(trip[i])));
    }
    try {
        b.complex = GradedComplex(lo, dims, std::move(d), Check::yes);
    } catch (const StructuralError& err) {
        throw StructuralError(std::string("attachment functoriality failure: ") + err.what());
    }
    return b;
}

inline std::vector<QVec> standard_basis(int d) {
    std::vector<QVec> b;
    for (int i = 0; i < d; ++i) {
        QVec v(static_cast<std::size_t>(d), Rational(0));
        v[static_cast<std::size_t>(i)] = Rational(1);
        b.push_back(v);
    }
    return b;
}

}  // namespace detail

// Vertex stalks by increasing cone dimension. A stratum sigma gets the
// cohomology of its punctured slice B_sigma(faces of sigma below sigma), cut
// above q(2 dim sigma) for IS and at or below p(2 dim sigma) for IC, with
// the cocycle representatives as attachment.
inline FanSheafModel fan_model(const Fan& f, const OrbitStratification& s, const Perversity& p, Theory th) {
    FanSheafModel m;
    m.theory = th;
    m.perversity = p;
    m.mode = s.mode;
    const int n = static_cast<int>(f.cones.size());
    m.faces.resize(static_cast<std::size_t>(n));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return f.dim(a) < f.dim(b); });
    for (int sigma : order) {
        FaceData& fd = m.faces[static_cast<std::size_t>(sigma)];
        if (!s.is_stratum[static_cast<std::size_t>(sigma)]) {
            fd.stalk.set(0, 1);
            fd.degree = {0};
            for (int t = 0; t < n; ++t)
                if (t != sigma && f.is_face(t, sigma) && m.faces[static_cast<std::size_t>(t)].stratum)
                    throw StructuralError("smooth cone " + f.cone_name(sigma) + " has a stratum face");
            continue;
        }
        fd.stratum = true;
        std::vector<int> proper;
        for (int t = 0; t < n; ++t)
            if (t != sigma && f.is_face(t, sigma)) proper.push_back(t);
        const int c = 2 * f.dim(sigma);
        auto bar = detail::bar_space(f, m.faces, proper, la::span_basis(f.generators(sigma)));
        Cohomology h = cohomology(bar.complex);
        fd.punctured = h.dims;
        const int cutoff = th == Theory::IS ? c - 2 - p.at(c) : p.at(c);
        for (auto& [deg, reps] : h.representatives) {
            if (th == Theory::IS ? deg <= cutoff : deg > cutoff) continue;
            const auto& list = bar.elems.at(deg);
            for (std::size_t j = 0; j < reps.cols(); ++j) {
                fd.degree.push_back(deg);
                fd.stalk.add(deg, 1);
                std::map<std::pair<int, int>, ext::LVec> acc;  // (chain, h) -> exterior coefficient
                for (const auto& [row, val] : reps.col(j)) {
                    const auto& e = list[row];
                    const auto& lv = bar.lambda[static_cast<std::size_t>(bar.chains[static_cast<std::size_t>(e.chain)].back())]
                                                [static_cast<std::size_t>(e.k)]
                                                    .basis[e.li];
                    auto it = acc.try_emplace({e.chain, e.h}, ext::LVec(lv.size(), Rational(0))).first;
                    for (std::size_t z = 0; z < lv.size(); ++z) it->second[z] = it->second[z] + val * lv[z];
                }
                std::vector<PieceVec> pieces;
                for (auto& [key, lv] : acc)
                    if (detail::nonzero(lv)) pieces.push_back({bar.chains[static_cast<std::size_t>(key.first)], key.second, lv});
                fd.attach.push_back(std::move(pieces));
            }
        }
    }
    return m;
}

struct LocalTables {
    std::vector<GradedDims> stalk;                     // per cone
    std::vector<std::optional<GradedDims>> punctured;  // per cone, strata only
};

inline LocalTables local_tables(const FanSheafModel& m) {
    LocalTables t;
    for (const auto& fd : m.faces) {
        t.stalk.push_back(fd.stalk);
        t.punctured.push_back(fd.punctured);
    }
    return t;
}

inline LocalTables fan_local_tables(const Fan& f, const OrbitStratification& s, const Perversity& p, Theory th) {
    return local_tables(fan_model(f, s, p, th));
}

// Sections over the open set of all faces of `cone` (-1: the whole fan),
// in the full ambient Q^d.
inline GradedComplex fan_sections(const Fan& f, const FanSheafModel& m, int cone = -1) {
    std::vector<int> s;
    for (int t = 0; t < static_cast<int>(f.cones.size()); ++t)
        if (cone < 0 || f.is_face(t, cone)) s.push_back(t);
    return detail::bar_space(f, m.faces, s, detail::standard_basis(f.rank)).complex;
}

inline bool is_complete(const Fan& f) {
    const int d = f.rank;
    std::vector<int> top, ridge;
    for (std::size_t i = 0; i < f.cones.size(); ++i) {
        int k = f.dim(static_cast<int>(i));
        if (k == d) top.push_back(static_cast<int>(i));
        if (k == d - 1) ridge.push_back(static_cast<int>(i));
    }
    if (top.empty()) return false;
    for (std::size_t i = 0; i < f.cones.size(); ++i) {
        bool under = false;
        for (int t : top) under |= f.is_face(static_cast<int>(i), t);
        if (!under) return false;
    }
    for (int r : ridge) {
        int cnt = 0;
        for (int t : top) cnt += f.is_face(r, t);
        if (cnt != 2) return false;
    }
    return true;
}

struct FanBetti {
    GradedDims dims;
    long long euler = 0;
    long long fixed_point_euler = 0;  // sum over maximal cones of the stalk Euler characteristic
    bool euler_rule() const { return euler == fixed_point_euler; }
};

inline FanBetti fan_global_betti(const Fan& f, const OrbitStratification& s, const Perversity& p, Theory th) {
    if (!is_complete(f)) throw StructuralError("fan is not complete; only local tables are available");
    auto m = fan_model(f, s, p, th);
    FanBetti b;
    b.dims = cohomology_dims(fan_sections(f, m));
    b.euler = b.dims.euler();
    for (std::size_t i = 0; i < f.cones.size(); ++i)
        if (f.dim(static_cast<int>(i)) == f.rank) b.fixed_point_euler += m.faces[i].stalk.euler();
    return b;
}

struct WittVerdict {
    bool witt = true;
    std::vector<std::string> witnesses;
};

// Orbit strata have even real codimension 2k, so every link has odd
// dimension 2k-1 and the Witt condition is vacuous.
inline WittVerdict toric_witt(const Fan& f, const OrbitStratification& s) {
    WittVerdict v;
    for (std::size_t i = 0; i < s.strata.size(); ++i) {
        int c = s.codim[i];
        v.witnesses.push_back("stratum " + f.cone_name(s.strata[i]) + ": codim " + std::to_string(c) + ", link dim " +
                              std::to_string(c - 1) + (c % 2 == 0 ? " odd" : " even"));
        if (c % 2 != 0) v.witt = false;
    }
    return v;
}

// ---------------------------------------------------------------- named fans

inline Fan p1() { return Fan{1, {{1}, {-1}}, {{}, {0}, {1}}}; }
inline Fan p2() { return Fan{2, {{1, 0}, {0, 1}, {-1, -1}}, {{}, {0}, {1}, {2}, {0, 1}, {1, 2}, {0, 2}}}; }
inline Fan p112() { return Fan{2, {{1, 0}, {0, 1}, {-1, -2}}, {{}, {0}, {1}, {2}, {0, 1}, {1, 2}, {0, 2}}}; }
inline Fan conifold() {
    return Fan{3,
               {{1, 0, 0}, {0, 1, 0}, {0, 1, 1}, {1, 0, 1}},
               {{}, {0}, {1}, {2}, {3}, {0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 1, 2, 3}}};
}
inline Fan p1xp1() {
    return Fan{2, {{1, 0}, {0, 1}, {-1, 0}, {0, -1}}, {{}, {0}, {1}, {2}, {3}, {0, 1}, {1, 2}, {2, 3}, {0, 3}}};
}

inline Fan by_name(const std::string& n) {
    if (n == "p1") return p1();
    if (n == "p2") return p2();
    if (n == "p112") return p112();
    if (n == "conifold") return conifold();
    if (n == "p1xp1") return p1xp1();
    throw StructuralError("unknown fan '" + n + "'");
}

inline std::vector<std::string> fan_names() { return {"p1", "p2", "p112", "p1xp1", "conifold"}; }

}  // namespace kis::toric
