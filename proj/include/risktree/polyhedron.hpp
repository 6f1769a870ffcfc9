#pragma once

#include "risktree/lp.hpp"
#include "risktree/numeric.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace risktree::polyhedra {

// One closed halfspace {x : a.x >= b}.
template <class S>
struct Halfspace {
    Vec<S> normal;
    S offset;
};

template <class S>
struct SupportValue {
    bool finite = false;
    S value = S(0);  // inf_{x in P} c.x when finite
};

// H-representation of a convex polyhedron in R^dim: the intersection of
// finitely many halfspaces {a.x >= b}.  The explicitly-empty set and the
// full space (no constraints) are both first-class values.  Risk-measure
// values are upper sets (all facet normals >= 0), but the type itself is
// general.
template <class S>
class Polyhedron {
public:
    Polyhedron() = default;
    explicit Polyhedron(int dim) : dim_(dim) {}

    static Polyhedron full(int dim) { return Polyhedron(dim); }
    static Polyhedron empty_set(int dim) {
        Polyhedron p(dim);
        p.empty_flag_ = true;
        return p;
    }
    static Polyhedron from_halfspaces(int dim, std::vector<Halfspace<S>> hs) {
        Polyhedron p(dim);
        p.hs_ = std::move(hs);
        return p;
    }

    int dim() const { return dim_; }
    bool marked_empty() const { return empty_flag_; }
    const std::vector<Halfspace<S>>& halfspaces() const { return hs_; }

    void add_halfspace(Vec<S> a, S b) {
        if (static_cast<int>(a.size()) != dim_)
            throw std::invalid_argument("polyhedron: normal dimension mismatch");
        hs_.push_back({std::move(a), std::move(b)});
    }

    bool is_empty(const S& eps) const {
        if (empty_flag_) return true;
        if (hs_.empty()) return false;
        return feasible_point(eps) == std::nullopt;
    }

    bool contains(const Vec<S>& x, const S& eps) const {
        if (empty_flag_) return false;
        for (const auto& h : hs_)
            if (dot(h.normal, x) < h.offset - eps) return false;
        return true;
    }

    std::optional<Vec<S>> feasible_point(const S& eps) const {
        if (empty_flag_) return std::nullopt;
        std::vector<Vec<S>> A;
        Vec<S> b;
        rows(A, b);
        auto r = solve_lp<S>(zero_vec<S>(dim_), A, b, eps);
        if (r.status != LpStatus::Optimal) return std::nullopt;
        return r.x;
    }

    // inf_{x in P} c.x; finite == false means the infimum is -inf.
    // Throws on the empty set (callers check emptiness first).
    SupportValue<S> inf_support(const Vec<S>& c, const S& eps) const {
        if (empty_flag_) throw std::logic_error("inf_support on empty set");
        std::vector<Vec<S>> A;
        Vec<S> b;
        rows(A, b);
        auto r = solve_lp<S>(c, A, b, eps);
        if (r.status == LpStatus::Infeasible)
            throw std::logic_error("inf_support on infeasible set");
        if (r.status == LpStatus::Unbounded) return {false, S(0)};
        return {true, r.objective};
    }

    Polyhedron intersect(const Polyhedron& other) const {
        check_dim(other);
        if (empty_flag_ || other.empty_flag_) return empty_set(dim_);
        Polyhedron p(dim_);
        p.hs_ = hs_;
        p.hs_.insert(p.hs_.end(), other.hs_.begin(), other.hs_.end());
        return p;
    }

    // True iff this is contained in `other` up to eps on every facet of
    // `other` (max violation of each facet over this set <= eps).
    bool subset_of(const Polyhedron& other, const S& eps) const {
        check_dim(other);
        if (is_empty(eps)) return true;
        if (other.empty_flag_) return false;
        if (other.hs_.empty()) return true;
        if (other.is_empty(eps)) return false;
        for (const auto& h : other.hs_) {
            auto v = inf_support(h.normal, eps);
            if (!v.finite || v.value < h.offset - eps) return false;
        }
        return true;
    }

    bool set_equals(const Polyhedron& other, const S& eps) const {
        return subset_of(other, eps) && other.subset_of(*this, eps);
    }

    // Closed Minkowski sum rebuilt from support values over the union of
    // both normal fans.  Exact whenever the facet normals of the true sum
    // lie in that union (halfspaces, parallel facets, upper sets in <= 2
    // eligible dimensions); directions with support -inf drop out.
    Polyhedron minkowski_sum(const Polyhedron& other, const S& eps) const {
        check_dim(other);
        if (is_empty(eps) || other.is_empty(eps)) return empty_set(dim_);
        std::vector<Vec<S>> dirs;
        collect_directions(dirs);
        other.collect_directions(dirs);
        Polyhedron p(dim_);
        for (const auto& a : dirs) {
            auto va = inf_support(a, eps);
            if (!va.finite) continue;
            auto vb = other.inf_support(a, eps);
            if (!vb.finite) continue;
            p.add_halfspace(a, va.value + vb.value);
        }
        return p;
    }

    // Minkowski difference {m : other + m subseteq this}.
    Polyhedron minkowski_diff(const Polyhedron& other, const S& eps) const {
        check_dim(other);
        if (other.is_empty(eps)) return full(dim_);
        if (is_empty(eps)) return empty_set(dim_);
        Polyhedron p(dim_);
        for (const auto& h : hs_) {
            auto v = other.inf_support(h.normal, eps);
            if (!v.finite) return empty_set(dim_);
            p.add_halfspace(h.normal, h.offset - v.value);
        }
        return p;
    }

    // Image under a nonnegative scalar: offsets scale, normals unchanged.
    Polyhedron scaled(const S& lambda) const {
        if (lambda < S(0)) throw std::invalid_argument("scaled: negative factor");
        Polyhedron p(dim_);
        p.empty_flag_ = empty_flag_;
        if (lambda == S(0) && !empty_flag_) {
            // lambda * P = {0} for nonempty P
            for (int i = 0; i < dim_; ++i) {
                Vec<S> e = zero_vec<S>(dim_);
                e[i] = S(1);
                p.add_halfspace(e, S(0));
                e[i] = S(-1);
                p.add_halfspace(std::move(e), S(0));
            }
            return p;
        }
        for (const auto& h : hs_) p.add_halfspace(h.normal, lambda * h.offset);
        return p;
    }

    Polyhedron translated(const Vec<S>& v) const {
        Polyhedron p(dim_);
        p.empty_flag_ = empty_flag_;
        for (const auto& h : hs_) p.add_halfspace(h.normal, h.offset + dot(h.normal, v));
        return p;
    }

    // Upper-set test w.r.t. the nonnegative orthant: all facet normals >= 0.
    bool is_upper(const S& eps) const {
        for (const auto& h : hs_)
            for (const S& a : h.normal)
                if (a < -eps) return false;
        return true;
    }

    // Drops duplicate and redundant halfspaces; marks detected emptiness.
    Polyhedron canonicalized(const S& eps) const {
        if (empty_flag_) return empty_set(dim_);
        if (is_empty(eps)) return empty_set(dim_);
        std::vector<Halfspace<S>> kept;
        for (const auto& h : hs_) {
            bool dup = false;
            for (auto& k : kept) {
                if (same_direction(k.normal, h.normal, eps)) {
                    // keep the tighter offset under a common scaling
                    S scale = direction_scale(h.normal, k.normal);
                    if (h.offset * scale > k.offset) k.offset = h.offset * scale;
                    dup = true;
                    break;
                }
            }
            if (!dup) kept.push_back(h);
        }
        // sequential redundancy elimination by LP
        for (std::size_t i = 0; i < kept.size();) {
            Polyhedron rest(dim_);
            for (std::size_t j = 0; j < kept.size(); ++j)
                if (j != i) rest.hs_.push_back(kept[j]);
            auto v = rest.inf_support(kept[i].normal, eps);
            if (v.finite && v.value >= kept[i].offset - eps)
                kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(i));
            else
                ++i;
        }
        Polyhedron p(dim_);
        p.hs_ = std::move(kept);
        return p;
    }

    // Existential projection eliminating coordinate `var` (Fourier-Motzkin).
    Polyhedron eliminate(int var, const S& eps) const {
        if (empty_flag_) return empty_set(dim_ - 1);
        std::vector<Halfspace<S>> pos, neg, zero;
        for (const auto& h : hs_) {
            if (h.normal[var] > eps)
                pos.push_back(h);
            else if (h.normal[var] < -eps)
                neg.push_back(h);
            else
                zero.push_back(h);
        }
        Polyhedron p(dim_ - 1);
        auto drop_var = [&](const Vec<S>& a) {
            Vec<S> r;
            r.reserve(a.size() - 1);
            for (int j = 0; j < dim_; ++j)
                if (j != var) r.push_back(a[j]);
            return r;
        };
        for (const auto& h : zero) p.add_halfspace(drop_var(h.normal), h.offset);
        for (const auto& hp : pos) {
            for (const auto& hn : neg) {
                // hp: a.x >= b with a_var > 0 ; hn: c.x >= d with c_var < 0
                S wp = -hn.normal[var];
                S wn = hp.normal[var];
                Vec<S> comb(static_cast<std::size_t>(dim_), S(0));
                for (int j = 0; j < dim_; ++j)
                    comb[j] = wp * hp.normal[j] + wn * hn.normal[j];
                p.add_halfspace(drop_var(comb), wp * hp.offset + wn * hn.offset);
            }
        }
        return p;
    }

    // Vertex enumeration by facet combinations; intended for dim <= 3.
    std::vector<Vec<S>> vertices(const S& eps) const {
        std::vector<Vec<S>> out;
        if (empty_flag_ || dim_ == 0) return out;
        const std::size_t n = hs_.size();
        if (static_cast<int>(n) < dim_) return out;
        std::vector<std::size_t> idx(static_cast<std::size_t>(dim_));
        enumerate_combinations(idx, 0, 0, n, eps, out);
        return out;
    }

private:
    int dim_ = 0;
    bool empty_flag_ = false;
    std::vector<Halfspace<S>> hs_;

    void check_dim(const Polyhedron& other) const {
        if (other.dim_ != dim_)
            throw std::invalid_argument("polyhedron: dimension mismatch");
    }

    void rows(std::vector<Vec<S>>& A, Vec<S>& b) const {
        A.clear();
        b.clear();
        for (const auto& h : hs_) {
            A.push_back(h.normal);
            b.push_back(h.offset);
        }
    }

    void collect_directions(std::vector<Vec<S>>& dirs) const {
        for (const auto& h : hs_) {
            bool seen = false;
            for (const auto& d : dirs)
                if (same_direction(d, h.normal, S(0))) { seen = true; break; }
            if (!seen) dirs.push_back(normalized_direction(h.normal));
        }
    }

    // Scale so the first nonzero entry has absolute value 1 (deterministic
    // canonical representative of the positive ray).
    static Vec<S> normalized_direction(const Vec<S>& a) {
        for (const S& v : a) {
            if (v != S(0)) {
                S s = Num<S>::abs(v);
                Vec<S> r = a;
                for (S& x : r) x /= s;
                return r;
            }
        }
        return a;
    }

    static bool same_direction(const Vec<S>& a, const Vec<S>& b, const S& eps) {
        Vec<S> na = normalized_direction(a);
        Vec<S> nb = normalized_direction(b);
        for (std::size_t i = 0; i < na.size(); ++i)
            if (Num<S>::abs(na[i] - nb[i]) > eps) return false;
        return true;
    }

    // factor f with f * a == b for positively proportional directions
    static S direction_scale(const Vec<S>& a, const Vec<S>& b) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] != S(0)) return b[i] / a[i];
        return S(1);
    }

    void enumerate_combinations(std::vector<std::size_t>& idx,
                                std::size_t pos,
                                std::size_t start,
                                std::size_t n,
                                const S& eps,
                                std::vector<Vec<S>>& out) const {
        if (pos == idx.size()) {
            auto x = solve_square(idx, eps);
            if (!x) return;
            if (!contains(*x, eps == S(0) ? S(0) : eps * S(10))) return;
            for (const auto& v : out) {
                S diff(0);
                for (int j = 0; j < dim_; ++j) diff += Num<S>::abs(v[j] - (*x)[j]);
                if (diff <= eps * S(10) + S(0)) return;
            }
            out.push_back(*x);
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            idx[pos] = i;
            enumerate_combinations(idx, pos + 1, i + 1, n, eps, out);
        }
    }

    std::optional<Vec<S>> solve_square(const std::vector<std::size_t>& idx,
                                       const S& eps) const {
        const int n = dim_;
        std::vector<Vec<S>> M(static_cast<std::size_t>(n),
                              Vec<S>(static_cast<std::size_t>(n) + 1, S(0)));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) M[i][j] = hs_[idx[i]].normal[j];
            M[i][n] = hs_[idx[i]].offset;
        }
        for (int col = 0; col < n; ++col) {
            int piv = -1;
            S best(0);
            for (int r = col; r < n; ++r) {
                S a = Num<S>::abs(M[r][col]);
                if (a > best) { best = a; piv = r; }
            }
            if (piv < 0 || best <= eps) return std::nullopt;  // singular
            std::swap(M[col], M[piv]);
            for (int r = 0; r < n; ++r) {
                if (r == col || M[r][col] == S(0)) continue;
                S f = M[r][col] / M[col][col];
                for (int j = col; j <= n; ++j) M[r][j] -= f * M[col][j];
            }
        }
        Vec<S> x(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) x[i] = M[i][n] / M[i][i];
        return x;
    }
};

// Halfspace {x : w.x >= 0}; degenerate w == 0 is rejected.
template <class S>
Polyhedron<S> gamma_halfspace(const Vec<S>& w) {
    if (is_zero_vec(w))
        throw std::invalid_argument("gamma_halfspace: zero direction");
    Polyhedron<S> p(static_cast<int>(w.size()));
    p.add_halfspace(w, S(0));
    return p;
}

}  // namespace risktree::polyhedra
