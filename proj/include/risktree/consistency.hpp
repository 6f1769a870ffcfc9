#pragma once

#include "risktree/bridge.hpp"
#include "risktree/riskproc.hpp"
#include "risktree/riskvec.hpp"
#include "risktree/sampling.hpp"

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace risktree::consistency {

using polyhedra::ConditionalPolyhedron;
using polyhedra::EligibleStructure;
using polyhedra::Polyhedron;
using space::AdaptedProcess;
using space::OptionalSpace;
using space::ScenarioSpace;
using space::VecField;

// ---------------------------------------------------------------------------
// Inclusion of a conditional polyhedron into a finite union of others.
//
// The sets are sets of measurable selections: a member of the left set picks
// one point per atom and must make all of its picks inside a single
// right-hand set.  The union of such product sets is strictly smaller than
// the product of the blockwise unions, so inclusion is decided by
// enumerating assignments of right-hand sets to "defeating" atoms: the left
// set escapes the union exactly when every right-hand set can be routed to
// an atom that retains a left point outside all sets routed there.  Residues
// against a single set are decided exactly by LP, one-dimensional residues
// by interval covering; higher-dimensional multi-set residues fall back to
// probing vertices, midpoints, ray shifts and seeded random points (a pass
// that relied on such a residue is reported with exact = false).
// ---------------------------------------------------------------------------

template <class S>
struct UnionWitness {
    int atom = -1;
    Vec<S> point;
    std::vector<std::string> certificates;  // one exclusion reason per right set
};

template <class S>
struct UnionCheck {
    bool included = true;
    bool exact = true;
    std::optional<UnionWitness<S>> witness;
};

namespace detail {

template <class S>
bool point_in_any(const Vec<S>& x,
                  const std::vector<const Polyhedron<S>*>& rs,
                  const S& eps) {
    for (const auto* p : rs)
        if (p->contains(x, eps)) return true;
    return false;
}

// why the point chosen at atom a lies outside right-hand set k
template <class S>
std::string exclusion_certificate(int k,
                                  int a,
                                  const Vec<S>& x,
                                  const Polyhedron<S>& R,
                                  const S& eps) {
    std::ostringstream os;
    os << "set " << k << " atom " << a << ": ";
    if (R.marked_empty() || R.is_empty(eps)) {
        os << "the set is empty";
        return os.str();
    }
    const auto& hs = R.halfspaces();
    std::size_t bad = hs.size();
    for (std::size_t j = 0; j < hs.size(); ++j)
        if (dot(hs[j].normal, x) < hs[j].offset - eps) {
            bad = j;
            break;
        }
    os << "facet " << bad << " separates the point";
    return os.str();
}

// Exact interval cover in one dimension.  Returns an uncovered point of L or
// nullopt when L is covered by the union.
template <class S>
std::optional<S> uncovered_1d(const Polyhedron<S>& L,
                              const std::vector<const Polyhedron<S>*>& rs,
                              const S& eps) {
    if (L.is_empty(eps)) return std::nullopt;
    Vec<S> e1{S(1)}, ne1{S(-1)};
    auto lo = L.inf_support(e1, eps);              // inf L
    auto hi = L.inf_support(ne1, eps);             // -sup L
    struct Iv {
        bool lo_inf, hi_inf;
        S lo, hi;
    };
    std::vector<Iv> ivs;
    for (const auto* p : rs) {
        if (p->is_empty(eps)) continue;
        auto a = p->inf_support(e1, eps);
        auto b = p->inf_support(ne1, eps);
        ivs.push_back({!a.finite, !b.finite, a.value, -b.value});
    }
    // frontier: everything of L up to (and including) this point is covered
    bool frontier_set = false;  // false only while L's lower end is -inf and uncovered
    S frontier(0);
    if (lo.finite) {
        frontier_set = true;
        frontier = lo.value;
    } else {
        // need some interval reaching down to -inf
        bool found = false;
        for (const auto& iv : ivs)
            if (iv.lo_inf) {
                if (iv.hi_inf) return std::nullopt;  // covers all of R
                if (!found || iv.hi > frontier) frontier = iv.hi;
                found = true;
            }
        if (!found) {
            // pick a concrete uncovered point below every interval start
            S cand = hi.finite ? -hi.value : S(0);
            for (const auto& iv : ivs)
                if (!iv.lo_inf && iv.lo - S(1) < cand) cand = iv.lo - S(1);
            return cand;
        }
        frontier_set = true;
    }
    for (std::size_t pass = 0; pass <= ivs.size(); ++pass) {
        if (hi.finite && frontier >= -hi.value - eps) return std::nullopt;
        // extend the frontier with every interval starting at or below it
        bool extended = false;
        for (const auto& iv : ivs) {
            if (!iv.lo_inf && iv.lo > frontier + eps) continue;
            if (iv.hi_inf) return std::nullopt;
            if (iv.hi > frontier + eps) {
                frontier = iv.hi;
                extended = true;
            }
        }
        if (!extended) break;
    }
    // gap directly above the frontier: witness strictly inside the gap
    S next(0);
    bool have_next = false;
    for (const auto& iv : ivs)
        if (!iv.lo_inf && iv.lo > frontier + eps && (!have_next || iv.lo < next)) {
            next = iv.lo;
            have_next = true;
        }
    S top = hi.finite ? -hi.value : frontier + S(2);
    if (have_next && next < top) top = next;
    (void)frontier_set;
    return (frontier + top) / S(2);
}

// probe points of one block: vertices, pairwise midpoints, a feasible point,
// coordinate-ray shifts, and seeded random convex combinations with shifts
template <class S>
std::vector<Vec<S>> probe_points(const Polyhedron<S>& L,
                                 sampling::Rng<S>& rng,
                                 int samples,
                                 const S& eps) {
    std::vector<Vec<S>> pts = L.vertices(eps);
    const int m = L.dim();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            Vec<S> mid(m);
            for (int c = 0; c < m; ++c) mid[c] = (pts[i][c] + pts[j][c]) / S(2);
            pts.push_back(std::move(mid));
        }
    if (auto fp = L.feasible_point(eps)) pts.push_back(*fp);
    const std::size_t base = pts.size();
    for (std::size_t k = 0; k < base; ++k)
        for (int c = 0; c < m; ++c)
            for (int step : {1, 7}) {
                Vec<S> q = pts[k];
                q[c] += S(step);
                pts.push_back(std::move(q));
            }
    if (base > 0) {
        for (int k = 0; k < samples; ++k) {
            const Vec<S>& a = pts[static_cast<std::size_t>(rng.index(static_cast<int>(base)))];
            const Vec<S>& b = pts[static_cast<std::size_t>(rng.index(static_cast<int>(base)))];
            S lam = rng.ratio(0, 8, 8);
            Vec<S> q(m);
            for (int c = 0; c < m; ++c)
                q[c] = lam * a[c] + (S(1) - lam) * b[c] + rng.ratio(0, 16, 4);
            pts.push_back(std::move(q));
        }
    }
    return pts;
}

// A point of L \ R, or nullopt when L subseteq R.  Exact in any dimension:
// L escapes R iff some facet of R can be pushed below its offset over L.
template <class S>
std::optional<Vec<S>> residue_point_single(const Polyhedron<S>& L,
                                           const Polyhedron<S>& R,
                                           const S& eps) {
    if (R.marked_empty() || R.is_empty(eps)) return L.feasible_point(eps);
    for (const auto& h : R.halfspaces()) {
        auto a = L.inf_support(h.normal, eps);
        if (a.finite && a.value >= h.offset - eps) continue;
        S bound = a.finite ? (a.value + h.offset) / S(2) : h.offset - S(1);
        Polyhedron<S> W = L;
        Vec<S> neg = h.normal;
        for (auto& c : neg) c = -c;
        W.add_halfspace(std::move(neg), -bound);
        if (auto p = W.feasible_point(eps)) return p;
    }
    return std::nullopt;
}

template <class S>
struct Residue {
    bool certain = true;          // emptiness (if claimed) is certified
    std::optional<Vec<S>> point;  // a point of L outside every routed set
};

template <class S>
Residue<S> residue(const Polyhedron<S>& L,
                   const std::vector<const Polyhedron<S>*>& rs,
                   sampling::Rng<S>& rng,
                   int samples,
                   const S& eps) {
    if (rs.size() == 1) return {true, residue_point_single(L, *rs[0], eps)};
    if (L.dim() == 1) {
        auto bad = uncovered_1d(L, rs, eps);
        if (bad) return {true, Vec<S>{*bad}};
        return {true, std::nullopt};
    }
    for (const auto& p : probe_points(L, rng, samples, eps)) {
        if (!L.contains(p, eps)) continue;
        if (!point_in_any(p, rs, eps)) return {false, p};
    }
    return {false, std::nullopt};
}

}  // namespace detail

// L subseteq union of rights, as sets of measurable selections over atoms.
template <class S>
UnionCheck<S> included_in_union(const polyhedra::ConditionalPolyhedron<S>& L,
                                const std::vector<polyhedra::ConditionalPolyhedron<S>>& rights,
                                sampling::Rng<S>& rng,
                                int samples,
                                const S& eps) {
    UnionCheck<S> out;
    const int A = L.num_atoms();
    const int K = static_cast<int>(rights.size());
    for (const auto& R : rights)
        if (R.num_atoms() != A)
            throw std::invalid_argument("union check: atom count mismatch");
    for (int a = 0; a < A; ++a)
        if (L.atom(a).is_empty(eps)) return out;  // L admits no selection at all
    if (K == 0) {
        out.included = false;
        UnionWitness<S> w;
        w.atom = 0;
        if (auto p = L.atom(0).feasible_point(eps)) w.point = *p;
        out.witness = std::move(w);
        return out;
    }
    double combos = 1.0;
    for (int k = 0; k < K; ++k) combos *= A;
    if (combos > 65536.0)
        throw std::invalid_argument("union check: assignment space too large");

    // residues cached per (atom, subset of right-hand sets routed to it)
    std::map<std::pair<int, unsigned long long>, detail::Residue<S>> cache;
    auto residue_at = [&](int a, unsigned long long mask) -> const detail::Residue<S>& {
        auto key = std::make_pair(a, mask);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        std::vector<const Polyhedron<S>*> rs;
        for (int k = 0; k < K; ++k)
            if (mask >> k & 1ULL) rs.push_back(&rights[k].atom(a));
        return cache.emplace(key, detail::residue(L.atom(a), rs, rng, samples, eps))
            .first->second;
    };

    std::vector<int> alpha(K, 0);  // which atom defeats each right-hand set
    bool undecided = false;
    while (true) {
        std::vector<unsigned long long> masks(A, 0);
        for (int k = 0; k < K; ++k) masks[alpha[k]] |= 1ULL << k;
        bool defeated = true, certain = true;
        for (int a = 0; a < A && defeated; ++a) {
            if (!masks[a]) continue;
            const auto& r = residue_at(a, masks[a]);
            if (!r.point) {
                defeated = false;
                if (!r.certain) undecided = true;
            } else if (!r.certain) {
                certain = false;
            }
        }
        if (defeated) {
            out.included = false;
            out.exact = certain;
            UnionWitness<S> w;
            w.atom = alpha[0];
            w.point = *residue_at(alpha[0], masks[alpha[0]]).point;
            for (int k = 0; k < K; ++k) {
                int a = alpha[k];
                w.certificates.push_back(detail::exclusion_certificate(
                    k, a, *residue_at(a, masks[a]).point, rights[k].atom(a), eps));
            }
            out.witness = std::move(w);
            return out;
        }
        int k = 0;
        for (; k < K; ++k) {
            if (++alpha[k] < A) break;
            alpha[k] = 0;
        }
        if (k == K) break;
    }
    out.exact = !undecided;
    return out;
}

// ---------------------------------------------------------------------------
// Fixtures and implication checks
// ---------------------------------------------------------------------------

// One multiportfolio comparison for processes: pivot X and family B live in
// R_s^{infty,d}; Z supplies the common slice on [t, s).
template <class S>
struct ProcessFixture {
    space::AdaptedProcess<S> Z;
    space::AdaptedProcess<S> X;
    std::vector<space::AdaptedProcess<S>> B;
    int t = 0;
    int s = 1;
};

// Z 1_{[t,s)} + X 1_{T_s}
template <class S>
space::AdaptedProcess<S> splice(const space::ScenarioSpace<S>& sp,
                                const space::AdaptedProcess<S>& Z,
                                const space::AdaptedProcess<S>& X,
                                int t,
                                int s) {
    auto out = space::AdaptedProcess<S>::zero(sp, X.d, t);
    for (int r = t; r <= sp.horizon(); ++r)
        out.vals[r] = r < s ? Z.vals[r] : X.vals[r];
    return out;
}

template <class S>
struct ImplicationResult {
    bool hypothesis = false;
    bool conclusion = false;
    bool exact = true;
    std::string witness;

    bool violated() const { return hypothesis && !conclusion; }
};

template <class S>
struct MptcReport {
    std::vector<ImplicationResult<S>> items;
    bool holds() const {
        for (const auto& r : items)
            if (r.violated()) return false;
        return true;
    }
    bool exact() const {
        for (const auto& r : items)
            if (!r.exact) return false;
        return true;
    }
};

namespace detail {

template <class S>
std::string describe(const UnionCheck<S>& c) {
    if (c.included || !c.witness) return "";
    std::ostringstream os;
    os << "atom " << c.witness->atom << " point (";
    for (std::size_t i = 0; i < c.witness->point.size(); ++i)
        os << (i ? ", " : "") << Num<S>::to_double(c.witness->point[i]);
    os << ")";
    for (const auto& cert : c.witness->certificates) os << "; " << cert;
    return os.str();
}

}  // namespace detail

// Definition of multiportfolio time consistency for processes, checked on a
// family of acceptance sets indexed by time.
template <class S>
MptcReport<S> check_mptc_process(const space::ScenarioSpace<S>& sp,
                                 const std::vector<riskproc::ProcessAcceptanceSet<S>>& fam,
                                 const std::vector<ProcessFixture<S>>& fixtures,
                                 sampling::Rng<S>& rng,
                                 int samples,
                                 const S& eps) {
    MptcReport<S> rep;
    for (const auto& fx : fixtures) {
        ImplicationResult<S> item;
        auto Ls = riskproc::rho_eval(sp, fam[fx.s], fx.X, eps);
        std::vector<polyhedra::ConditionalPolyhedron<S>> Rs;
        for (const auto& Y : fx.B) Rs.push_back(riskproc::rho_eval(sp, fam[fx.s], Y, eps));
        auto hyp = included_in_union(Ls, Rs, rng, samples, eps);
        item.hypothesis = hyp.included;
        item.exact = hyp.exact;
        if (hyp.included) {
            auto Lt = riskproc::rho_eval(sp, fam[fx.t], splice(sp, fx.Z, fx.X, fx.t, fx.s), eps);
            std::vector<polyhedra::ConditionalPolyhedron<S>> Rt;
            for (const auto& Y : fx.B)
                Rt.push_back(
                    riskproc::rho_eval(sp, fam[fx.t], splice(sp, fx.Z, Y, fx.t, fx.s), eps));
            auto concl = included_in_union(Lt, Rt, rng, samples, eps);
            item.conclusion = concl.included;
            item.exact = item.exact && concl.exact;
            if (!concl.included) item.witness = detail::describe(concl);
        }
        rep.items.push_back(std::move(item));
    }
    return rep;
}

// Vector-side fixture: pivot and family are optional-space vectors, compared
// at s and then at t with the same arguments.
template <class S>
struct VectorFixture {
    space::AdaptedProcess<S> X;
    std::vector<space::AdaptedProcess<S>> B;
    int t = 0;
    int s = 1;
};

// Expand the product family of the vector definition: per slice r < s a list
// of F_r-measurable choices, plus a list of tails from s on.
template <class S>
std::vector<space::AdaptedProcess<S>> product_family(
    const space::ScenarioSpace<S>& sp,
    const std::vector<std::vector<space::VecField<S>>>& slice_choices,
    const std::vector<space::AdaptedProcess<S>>& tails,
    int s) {
    if (static_cast<int>(slice_choices.size()) != s)
        throw std::invalid_argument("product_family: one choice list per slice r < s");
    std::vector<space::AdaptedProcess<S>> out;
    std::vector<std::size_t> pick(slice_choices.size(), 0);
    for (const auto& tail : tails) {
        std::fill(pick.begin(), pick.end(), std::size_t{0});
        while (true) {
            auto Y = tail;
            for (int r = 0; r < s; ++r) Y.vals[r] = slice_choices[r][pick[r]];
            Y.start_time = 0;
            out.push_back(std::move(Y));
            int r = 0;
            for (; r < s; ++r) {
                if (++pick[r] < slice_choices[r].size()) break;
                pick[r] = 0;
            }
            if (r == s) break;
        }
    }
    return out;
}

template <class S>
MptcReport<S> check_mptc_vector(const space::OptionalSpace<S>& osp,
                                const std::vector<riskvec::VectorAcceptanceSet<S>>& fam,
                                const std::vector<VectorFixture<S>>& fixtures,
                                sampling::Rng<S>& rng,
                                int samples,
                                const S& eps) {
    MptcReport<S> rep;
    for (const auto& fx : fixtures) {
        ImplicationResult<S> item;
        auto Ls = riskvec::rbar_eval(osp, fam[fx.s], fx.X, eps);
        std::vector<polyhedra::ConditionalPolyhedron<S>> Rs;
        for (const auto& Y : fx.B) Rs.push_back(riskvec::rbar_eval(osp, fam[fx.s], Y, eps));
        auto hyp = included_in_union(Ls, Rs, rng, samples, eps);
        item.hypothesis = hyp.included;
        item.exact = hyp.exact;
        if (hyp.included) {
            auto Lt = riskvec::rbar_eval(osp, fam[fx.t], fx.X, eps);
            std::vector<polyhedra::ConditionalPolyhedron<S>> Rt;
            for (const auto& Y : fx.B) Rt.push_back(riskvec::rbar_eval(osp, fam[fx.t], Y, eps));
            auto concl = included_in_union(Lt, Rt, rng, samples, eps);
            item.conclusion = concl.included;
            item.exact = item.exact && concl.exact;
            if (!concl.included) item.witness = detail::describe(concl);
        }
        rep.items.push_back(std::move(item));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Joint multiportfolio time consistency of (rho_t, (R_s^t)_{s < t})
// ---------------------------------------------------------------------------

// Condition (2) fixture: common slices X_r with alternatives B_r on [t, s)
// and a shared tail Z from s on.
template <class S>
struct JointSliceFixture {
    std::vector<space::VecField<S>> X;               // [r - t] for r in [t, s)
    std::vector<std::vector<space::VecField<S>>> B;  // [r - t] -> choices
    space::AdaptedProcess<S> Z;
    int t = 0;
    int s = 1;
};

// Condition (3) fixture: a single restricted comparison at r, moved from the
// horizon-s family to the horizon-t family, r < t < s.
template <class S>
struct JointCrossFixture {
    space::VecField<S> X;
    std::vector<space::VecField<S>> B;
    int r = 0;
    int t = 1;
    int s = 2;
};

template <class S>
struct JointReport {
    MptcReport<S> process;     // condition (1)
    MptcReport<S> restricted;  // condition (2)
    MptcReport<S> cross;       // condition (3)
    bool holds() const { return process.holds() && restricted.holds() && cross.holds(); }
};

template <class S>
JointReport<S> check_joint_mptc(const space::ScenarioSpace<S>& sp,
                                const std::vector<bridge::Augmented<S>>& fam,
                                const std::vector<ProcessFixture<S>>& process_fixtures,
                                const std::vector<JointSliceFixture<S>>& slice_fixtures,
                                const std::vector<JointCrossFixture<S>>& cross_fixtures,
                                sampling::Rng<S>& rng,
                                int samples,
                                const S& eps) {
    JointReport<S> rep;
    std::vector<riskproc::ProcessAcceptanceSet<S>> rhos;
    for (const auto& aug : fam) rhos.push_back(aug.rho);
    rep.process = check_mptc_process(sp, rhos, process_fixtures, rng, samples, eps);

    for (const auto& fx : slice_fixtures) {
        ImplicationResult<S> item;
        item.hypothesis = true;
        // hypothesis: restricted inclusion at every slice r in [t, s)
        for (int r = fx.t; r < fx.s && item.hypothesis; ++r) {
            const auto& R = fam[fx.s].restricted[r];
            auto L = riskvec::restricted_eval(sp, R, fx.X[r - fx.t], eps);
            std::vector<polyhedra::ConditionalPolyhedron<S>> Rs;
            for (const auto& b : fx.B[r - fx.t])
                Rs.push_back(riskvec::restricted_eval(sp, R, b, eps));
            auto hyp = included_in_union(L, Rs, rng, samples, eps);
            item.hypothesis = hyp.included;
            item.exact = item.exact && hyp.exact;
        }
        if (item.hypothesis) {
            // conclusion: rho_t over the product of the slice choices
            auto pivot = space::AdaptedProcess<S>::zero(sp, fx.Z.d, fx.t);
            for (int r = fx.t; r < fx.s; ++r) pivot.vals[r] = fx.X[r - fx.t];
            for (int r = fx.s; r <= sp.horizon(); ++r) pivot.vals[r] = fx.Z.vals[r];
            auto Lt = riskproc::rho_eval(sp, fam[fx.t].rho, pivot, eps);
            std::vector<std::vector<space::VecField<S>>> head(fx.B.begin(), fx.B.end());
            std::vector<space::AdaptedProcess<S>> combos;
            {
                std::vector<std::size_t> pick(head.size(), 0);
                while (true) {
                    auto Y = space::AdaptedProcess<S>::zero(sp, fx.Z.d, fx.t);
                    for (int r = fx.t; r < fx.s; ++r) Y.vals[r] = head[r - fx.t][pick[r - fx.t]];
                    for (int r = fx.s; r <= sp.horizon(); ++r) Y.vals[r] = fx.Z.vals[r];
                    combos.push_back(std::move(Y));
                    std::size_t r = 0;
                    for (; r < head.size(); ++r) {
                        if (++pick[r] < head[r].size()) break;
                        pick[r] = 0;
                    }
                    if (r == head.size()) break;
                }
            }
            std::vector<polyhedra::ConditionalPolyhedron<S>> Rt;
            for (const auto& Y : combos)
                Rt.push_back(riskproc::rho_eval(sp, fam[fx.t].rho, Y, eps));
            auto concl = included_in_union(Lt, Rt, rng, samples, eps);
            item.conclusion = concl.included;
            item.exact = item.exact && concl.exact;
            if (!concl.included) item.witness = detail::describe(concl);
        }
        rep.restricted.items.push_back(std::move(item));
    }

    for (const auto& fx : cross_fixtures) {
        ImplicationResult<S> item;
        auto Ls = riskvec::restricted_eval(sp, fam[fx.s].restricted[fx.r], fx.X, eps);
        std::vector<polyhedra::ConditionalPolyhedron<S>> Rs;
        for (const auto& b : fx.B)
            Rs.push_back(riskvec::restricted_eval(sp, fam[fx.s].restricted[fx.r], b, eps));
        auto hyp = included_in_union(Ls, Rs, rng, samples, eps);
        item.hypothesis = hyp.included;
        item.exact = hyp.exact;
        if (hyp.included) {
            auto Lt = riskvec::restricted_eval(sp, fam[fx.t].restricted[fx.r], fx.X, eps);
            std::vector<polyhedra::ConditionalPolyhedron<S>> Rt;
            for (const auto& b : fx.B)
                Rt.push_back(riskvec::restricted_eval(sp, fam[fx.t].restricted[fx.r], b, eps));
            auto concl = included_in_union(Lt, Rt, rng, samples, eps);
            item.conclusion = concl.included;
            item.exact = item.exact && concl.exact;
            if (!concl.included) item.witness = detail::describe(concl);
        }
        rep.cross.items.push_back(std::move(item));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Equivalence harness: joint verdict on (rho, R) against the vector verdict
// on the lifted family, in both directions.
// ---------------------------------------------------------------------------

template <class S>
struct FixtureSet {
    std::vector<ProcessFixture<S>> process;
    std::vector<JointSliceFixture<S>> slices;
    std::vector<JointCrossFixture<S>> cross;
    std::vector<VectorFixture<S>> vectors;
};

template <class S>
struct HarnessReport {
    JointReport<S> joint;            // direction 1, joint side
    MptcReport<S> lifted;            // direction 1, vector side
    JointReport<S> projected_joint;  // direction 2, joint side after round trip
    MptcReport<S> vector_direct;     // direction 2, vector side
    bool agree_forward = false;
    bool agree_backward = false;
    bool agree() const { return agree_forward && agree_backward; }
};

template <class S>
HarnessReport<S> equivalence_harness(const space::OptionalSpace<S>& osp,
                                     const std::vector<bridge::Augmented<S>>& fam,
                                     const FixtureSet<S>& fixtures,
                                     sampling::Rng<S>& rng,
                                     int samples,
                                     const S& eps) {
    const auto& sp = osp.base();
    HarnessReport<S> rep;
    rep.joint = check_joint_mptc(sp, fam, fixtures.process, fixtures.slices, fixtures.cross,
                                 rng, samples, eps);
    std::vector<riskvec::VectorAcceptanceSet<S>> lifted;
    for (const auto& aug : fam) lifted.push_back(bridge::lift_acceptance(aug));
    rep.lifted = check_mptc_vector(osp, lifted, fixtures.vectors, rng, samples, eps);
    rep.agree_forward = rep.joint.holds() == rep.lifted.holds();

    std::vector<bridge::Augmented<S>> projected;
    for (const auto& A : lifted) projected.push_back(bridge::project_acceptance(A));
    rep.projected_joint = check_joint_mptc(sp, projected, fixtures.process, fixtures.slices,
                                           fixtures.cross, rng, samples, eps);
    rep.vector_direct = check_mptc_vector(osp, lifted, fixtures.vectors, rng, samples, eps);
    rep.agree_backward = rep.vector_direct.holds() == rep.projected_joint.holds();
    return rep;
}

// One-step sufficiency: the direct (t, s) implication versus the chain of
// single-step implications through the intermediate times.
template <class S>
std::pair<bool, bool> one_step_versus_direct(const space::ScenarioSpace<S>& sp,
                                             const std::vector<riskproc::ProcessAcceptanceSet<S>>& fam,
                                             const ProcessFixture<S>& fx,
                                             sampling::Rng<S>& rng,
                                             int samples,
                                             const S& eps) {
    auto implication = [&](int t, int s, const space::AdaptedProcess<S>& X,
                           const std::vector<space::AdaptedProcess<S>>& B) {
        ProcessFixture<S> one{fx.Z, X, B, t, s};
        auto rep = check_mptc_process(sp, fam, {one}, rng, samples, eps);
        return !rep.items[0].violated();
    };
    bool direct = implication(fx.t, fx.s, fx.X, fx.B);
    bool chained = true;
    auto X = fx.X;
    auto B = fx.B;
    for (int u = fx.s - 1; u >= fx.t && chained; --u) {
        chained = implication(u, u + 1, X, B);
        X = splice(sp, fx.Z, X, u, u + 1);
        for (auto& Y : B) Y = splice(sp, fx.Z, Y, u, u + 1);
    }
    return {direct, chained};
}

}  // namespace risktree::consistency
