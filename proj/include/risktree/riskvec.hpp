#pragma once

#include "risktree/conditional_set.hpp"
#include "risktree/generators.hpp"
#include "risktree/riskproc.hpp"
#include "risktree/sampling.hpp"
#include "risktree/space.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace risktree::riskvec {

using polyhedra::ConditionalPolyhedron;
using polyhedra::EligibleStructure;
using polyhedra::Polyhedron;
using space::AdaptedProcess;
using space::OptionalMeasure;
using space::OptionalSpace;
using space::ScenarioSpace;
using space::VecField;

// Cell-to-atom indexing of the bar-F_t atoms: realized past slices
// (r, F_r-atom) for r < t followed by the frozen blocks (F_t-atom) x T_t.
template <class S>
class BarIndex {
public:
    using BarAtom = typename OptionalSpace<S>::BarAtom;

    BarIndex(const OptionalSpace<S>& osp, int t) : t_(t), atoms_(osp.bar_atoms(t)) {
        const auto& sp = osp.base();
        offsets_.assign(t + 1, 0);
        int n = 0;
        for (int r = 0; r < t; ++r) {
            offsets_[r] = n;
            n += sp.num_atoms(r);
        }
        offsets_[t] = n;  // frozen block base
    }

    int t() const { return t_; }
    int count() const { return static_cast<int>(atoms_.size()); }
    const BarAtom& atom(int k) const { return atoms_.at(k); }

    int of_cell(const ScenarioSpace<S>& sp, int r, int state) const {
        if (r < t_) return offsets_[r] + sp.atom_of(r, state);
        return offsets_[t_] + sp.atom_of(t_, state);
    }

    int rep_state(const ScenarioSpace<S>& sp, int k) const {
        const auto& ba = atoms_[k];
        return sp.atom_states(ba.time, ba.atom)[0];
    }

    // a cell (time, state) inside atom k
    int rep_time(int k) const { return atoms_[k].time; }

private:
    int t_;
    std::vector<BarAtom> atoms_;
    std::vector<int> offsets_;
};

// Polyhedral acceptance set bar A_t in bar L^infty(R^d): linear generators
// over optional-space cells (time slice, state, asset).
template <class S>
struct VectorAcceptanceSet {
    int t = 0;
    EligibleStructure el;
    std::vector<Generator<S>> gens;

    bool is_cone(const S& eps) const {
        for (const auto& g : gens)
            if (Num<S>::abs(g.offset) > eps) return false;
        return true;
    }
};

template <class S>
bool accepts(const VectorAcceptanceSet<S>& A, const AdaptedProcess<S>& X, const S& eps) {
    for (const auto& g : A.gens)
        if (eval_generator(g, X) < g.offset - eps) return false;
    return true;
}

// {m in bar M_t : X + m in bar A_t} per bar-F_t atom.  Generators must not
// couple distinct bar atoms at level t.
template <class S>
ConditionalPolyhedron<S> rbar_eval(const OptionalSpace<S>& osp,
                                   const VectorAcceptanceSet<S>& A,
                                   const AdaptedProcess<S>& X,
                                   const S& eps) {
    const auto& sp = osp.base();
    const int m = A.el.m;
    BarIndex<S> bi(osp, A.t);
    std::vector<Polyhedron<S>> atoms(bi.count(), Polyhedron<S>::full(m));
    for (const auto& g : A.gens) {
        int owner = -1;
        Vec<S> normal = zero_vec<S>(m);
        S off = g.offset;
        for (const auto& [c, coef] : g.terms) {
            int k = bi.of_cell(sp, c.time, c.state);
            if (owner < 0) owner = k;
            if (k != owner)
                throw std::invalid_argument("generator couples distinct bar atoms");
            if (c.asset < m) normal[c.asset] += coef;
            off -= coef * X.vals[c.time][c.state][c.asset];
        }
        if (owner < 0) {
            if (off > eps)
                for (auto& p : atoms) p = Polyhedron<S>::empty_set(m);
            continue;
        }
        if (is_zero_vec(normal)) {
            if (off > eps) atoms[owner] = Polyhedron<S>::empty_set(m);
        } else {
            atoms[owner].add_halfspace(std::move(normal), std::move(off));
        }
    }
    return ConditionalPolyhedron<S>(A.t, std::move(atoms));
}

// Restriction R_s: an acceptance set in L_s^infty(R^d) is a process
// acceptance set at t = s whose generators live on slice s only.
template <class S>
ConditionalPolyhedron<S> restricted_eval(const ScenarioSpace<S>& sp,
                                         const riskproc::ProcessAcceptanceSet<S>& R,
                                         const VecField<S>& Z,
                                         const S& eps) {
    for (const auto& g : R.gens)
        for (const auto& [c, coef] : g.terms)
            if (c.time != R.t)
                throw std::invalid_argument("restricted acceptance set must live on one slice");
    AdaptedProcess<S> X = AdaptedProcess<S>::zero(sp, R.el.d, R.t);
    X.vals[R.t] = Z;
    return riskproc::rho_eval(sp, R, X, eps);
}

// ---------------------------------------------------------------------------
// named acceptance families

// nonnegativity cone {X : X >= 0 on every cell}
template <class S>
VectorAcceptanceSet<S> nonneg_cone(const OptionalSpace<S>& osp,
                                   int t,
                                   const EligibleStructure& el) {
    const auto& sp = osp.base();
    VectorAcceptanceSet<S> A;
    A.t = t;
    A.el = el;
    for (int r = 0; r <= sp.horizon(); ++r)
        for (int a = 0; a < sp.num_atoms(r); ++a)
            for (int i = 0; i < el.d; ++i) {
                Generator<S> g;
                g.terms.push_back({{r, sp.atom_states(r, a)[0], i}, S(1)});
                A.gens.push_back(std::move(g));
            }
    return A;
}

// ---------------------------------------------------------------------------
// dual variables

// Element of the dual domain on the optional space: one optional measure per
// asset (each in bar M_t(bar P)) and a bar-F_t-measurable direction w-bar
// stored per bar atom.
template <class S>
struct VectorDual {
    int t = 0;
    std::vector<OptionalMeasure<S>> Qbar;  // [asset]
    std::vector<Vec<S>> wbar;              // [bar atom] -> d comps
    bool boundary = false;
};

// w-bar expanded to per-cell values (as an element of bar L^infty)
template <class S>
AdaptedProcess<S> wbar_process(const OptionalSpace<S>& osp, const VectorDual<S>& dual) {
    const auto& sp = osp.base();
    const int d = static_cast<int>(dual.Qbar.size());
    BarIndex<S> bi(osp, dual.t);
    AdaptedProcess<S> out = AdaptedProcess<S>::zero(sp, d);
    for (int r = 0; r <= sp.horizon(); ++r)
        for (int w = 0; w < sp.num_states(); ++w)
            out.vals[r][w] = dual.wbar[bi.of_cell(sp, r, w)];
    return out;
}

// bar w_t^s(Qbar, wbar) as per-cell values
template <class S>
AdaptedProcess<S> dual_bar_w(const OptionalSpace<S>& osp, const VectorDual<S>& dual, int s) {
    return space::bar_w_map(osp, dual.Qbar, wbar_process(osp, dual), dual.t, s);
}

template <class S>
bool in_Wbart(const OptionalSpace<S>& osp,
              const VectorDual<S>& dual,
              const EligibleStructure& el,
              const S& eps) {
    const auto& sp = osp.base();
    if (static_cast<int>(dual.Qbar.size()) != el.d) return false;
    for (const auto& qb : dual.Qbar)
        if (!space::is_Mt_preserving(osp, qb, dual.t, eps)) return false;
    bool m_part_nonzero = false;
    for (const auto& v : dual.wbar) {
        for (int i = 0; i < el.m; ++i) {
            if (v[i] < -eps) return false;
            if (v[i] > eps) m_part_nonzero = true;
        }
    }
    if (!dual.boundary && !m_part_nonzero) return false;
    auto wt = dual_bar_w(osp, dual, sp.horizon());
    for (int r = 0; r <= sp.horizon(); ++r)
        for (int w = 0; w < sp.num_states(); ++w)
            for (int i = 0; i < el.d; ++i)
                if (wt.vals[r][w][i] < -eps) return false;
    return true;
}

// objective coefficients of Z |-> wbar^T bar E_t^{Qbar}[Z] at every bar atom,
// over adapted-process variables starting at slice 0; row k is the atom-k
// functional.
template <class S>
std::vector<Vec<S>> bar_pairing_coefficients(const OptionalSpace<S>& osp,
                                             const VectorDual<S>& dual,
                                             const ProcessVars<S>& vars,
                                             const BarIndex<S>& bi) {
    const auto& sp = osp.base();
    const int d = static_cast<int>(dual.Qbar.size());
    std::vector<Vec<S>> rows(bi.count(), zero_vec<S>(vars.count()));
    for (int i = 0; i < d; ++i) {
        for (int r = 0; r <= sp.horizon(); ++r)
            for (int a = 0; a < sp.num_atoms(r); ++a) {
                AdaptedProcess<S> ind = AdaptedProcess<S>::zero(sp, 1);
                for (int w : sp.atom_states(r, a)) ind.vals[r][w][0] = S(1);
                auto e = space::bar_cond_expectation(osp, ind, dual.Qbar[i], dual.t);
                int var = vars.index(r, sp.atom_states(r, a)[0], i);
                for (int k = 0; k < bi.count(); ++k) {
                    S v = e.vals[bi.rep_time(k)][bi.rep_state(sp, k)][0];
                    rows[k][var] += dual.wbar[k][i] * v;
                }
            }
    }
    return rows;
}

// minimal penalty bar alpha_t(Qbar, wbar) per bar atom
template <class S>
ConditionalPolyhedron<S> penalty_vector(const OptionalSpace<S>& osp,
                                        const VectorAcceptanceSet<S>& A,
                                        const VectorDual<S>& dual,
                                        const S& eps) {
    const auto& sp = osp.base();
    const int m = A.el.m;
    BarIndex<S> bi(osp, A.t);
    ProcessVars<S> vars(sp, 0, A.el.d);
    std::vector<Vec<S>> rows;
    Vec<S> rhs;
    vars.rows(A.gens, rows, rhs);
    auto obj = bar_pairing_coefficients(osp, dual, vars, bi);
    std::vector<Polyhedron<S>> atoms;
    for (int k = 0; k < bi.count(); ++k) {
        auto r = solve_lp<S>(obj[k], rows, rhs, eps);
        if (r.status == LpStatus::Infeasible)
            throw std::invalid_argument("penalty over empty acceptance set");
        if (r.status == LpStatus::Unbounded) {
            atoms.push_back(Polyhedron<S>::empty_set(m));
            continue;
        }
        S sup = -r.objective;
        Vec<S> normal(dual.wbar[k].begin(), dual.wbar[k].begin() + m);
        if (is_zero_vec(normal)) {
            atoms.push_back(sup > eps ? Polyhedron<S>::empty_set(m)
                                      : Polyhedron<S>::full(m));
        } else {
            Polyhedron<S> p(m);
            p.add_halfspace(std::move(normal), std::move(sup));
            atoms.push_back(std::move(p));
        }
    }
    return ConditionalPolyhedron<S>(A.t, std::move(atoms));
}

// one dual term (bar E_t^{Qbar}[-X] + Gamma(wbar)) cap bar M_t -. bar alpha
template <class S>
ConditionalPolyhedron<S> dual_term_vector(const OptionalSpace<S>& osp,
                                          const VectorAcceptanceSet<S>& A,
                                          const AdaptedProcess<S>& X,
                                          const VectorDual<S>& dual,
                                          const S& eps) {
    const auto& sp = osp.base();
    const int m = A.el.m, d = A.el.d;
    BarIndex<S> bi(osp, A.t);
    auto alpha = penalty_vector(osp, A, dual, eps);
    auto e = space::bar_cond_expectation(osp, X, dual.Qbar, A.t);
    std::vector<Polyhedron<S>> atoms;
    for (int k = 0; k < bi.count(); ++k) {
        S beta(0);
        for (int i = 0; i < d; ++i)
            beta += dual.wbar[k][i] * (-e.vals[bi.rep_time(k)][bi.rep_state(sp, k)][i]);
        Vec<S> normal(dual.wbar[k].begin(), dual.wbar[k].begin() + m);
        Polyhedron<S> h(m);
        if (is_zero_vec(normal)) {
            if (beta > eps) {
                atoms.push_back(Polyhedron<S>::empty_set(m));
                continue;
            }
            h = Polyhedron<S>::full(m);
        } else {
            h.add_halfspace(std::move(normal), std::move(beta));
        }
        atoms.push_back(h.minkowski_diff(alpha.atom(k), eps));
    }
    return ConditionalPolyhedron<S>(A.t, std::move(atoms));
}

template <class S>
ConditionalPolyhedron<S> dual_eval_vector(const OptionalSpace<S>& osp,
                                          const VectorAcceptanceSet<S>& A,
                                          const AdaptedProcess<S>& X,
                                          const std::vector<VectorDual<S>>& duals,
                                          const S& eps) {
    BarIndex<S> bi(osp, A.t);
    auto out = ConditionalPolyhedron<S>::full(A.t, bi.count(), A.el.m);
    for (const auto& dual : duals)
        out = out.intersect(dual_term_vector(osp, A, X, dual, eps));
    return out;
}

// bar W_t^max membership for coherent bar A: the pairing of
// bar w_t^T(Qbar, wbar) with the acceptance set is >= 0 per bar atom.
template <class S>
bool is_max_dual_vector(const OptionalSpace<S>& osp,
                        const VectorAcceptanceSet<S>& A,
                        const VectorDual<S>& dual,
                        const S& eps) {
    if (!A.is_cone(eps))
        throw std::invalid_argument("max-dual set defined for coherent acceptance sets");
    const auto& sp = osp.base();
    const int d = A.el.d, t = A.t, T = sp.horizon();
    BarIndex<S> bi(osp, t);
    ProcessVars<S> vars(sp, 0, d);
    std::vector<Vec<S>> rows;
    Vec<S> rhs;
    vars.rows(A.gens, rows, rhs);
    auto G = dual_bar_w(osp, dual, T);
    for (int k = 0; k < bi.count(); ++k) {
        Vec<S> c = zero_vec<S>(vars.count());
        const auto& ba = bi.atom(k);
        if (!ba.frozen) {
            int rep = sp.atom_states(ba.time, ba.atom)[0];
            for (int i = 0; i < d; ++i)
                c[vars.index(ba.time, rep, i)] += G.vals[ba.time][rep][i];
        } else {
            S pa = sp.atom_prob(t, ba.atom);
            int rep = sp.atom_states(t, ba.atom)[0];
            S mu_pre(0);
            for (int r = 0; r < t; ++r) mu_pre += sp.mu(r, rep);
            for (int s = t; s <= T; ++s)
                for (int w : sp.atom_states(t, ba.atom))
                    for (int i = 0; i < d; ++i)
                        c[vars.index(s, w, i)] += sp.prob_of(w) * sp.mu(s, w) *
                                                  G.vals[s][w][i] /
                                                  ((S(1) - mu_pre) * pa);
        }
        auto r = solve_lp<S>(c, rows, rhs, eps);
        if (r.status != LpStatus::Optimal || r.objective < -eps) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// axiom checking

template <class S>
AdaptedProcess<S> slice_only(const ScenarioSpace<S>& sp, const AdaptedProcess<S>& X, int s) {
    AdaptedProcess<S> out = AdaptedProcess<S>::zero(sp, X.d);
    out.vals[s] = X.vals[s];
    return out;
}

template <class S>
AdaptedProcess<S> tail_only(const ScenarioSpace<S>& sp, const AdaptedProcess<S>& X, int t) {
    AdaptedProcess<S> out = X;
    for (int s = 0; s < t; ++s)
        for (int w = 0; w < sp.num_states(); ++w) out.vals[s][w] = zero_vec<S>(X.d);
    return out;
}

// Time decomposability at X: the past atoms agree with rbar_eval(X 1_s) and
// the frozen atoms with rbar_eval(X 1_{T_t}).
template <class S>
bool check_time_decomposable(const OptionalSpace<S>& osp,
                             const VectorAcceptanceSet<S>& A,
                             const AdaptedProcess<S>& X,
                             const S& eps) {
    const auto& sp = osp.base();
    BarIndex<S> bi(osp, A.t);
    auto full = rbar_eval(osp, A, X, eps);
    auto tail = rbar_eval(osp, A, tail_only(sp, X, A.t), eps);
    for (int k = 0; k < bi.count(); ++k) {
        const auto& ba = bi.atom(k);
        if (ba.frozen) {
            if (!full.atom(k).set_equals(tail.atom(k), eps)) return false;
        } else {
            auto sl = rbar_eval(osp, A, slice_only(sp, X, ba.time), eps);
            if (!full.atom(k).set_equals(sl.atom(k), eps)) return false;
        }
    }
    return true;
}

template <class S>
struct VectorAxiomReport {
    riskproc::AxiomResult cash_invariant, monotone, finite_at_zero, normalized, convex,
        pos_hom, time_decomposable;

    bool all_pass() const {
        return cash_invariant.pass && monotone.pass && finite_at_zero.pass &&
               normalized.pass && convex.pass && pos_hom.pass && time_decomposable.pass;
    }
};

template <class S>
VectorAxiomReport<S> check_axioms_vector(const OptionalSpace<S>& osp,
                                         const VectorAcceptanceSet<S>& A,
                                         sampling::Rng<S>& rng,
                                         int samples,
                                         const S& eps) {
    const auto& sp = osp.base();
    const int t = A.t, m = A.el.m, d = A.el.d;
    BarIndex<S> bi(osp, t);
    const int na = bi.count();
    const S tol = eps * S(10);
    VectorAxiomReport<S> rep;

    auto r0 = rbar_eval(osp, A, AdaptedProcess<S>::zero(sp, d), eps);
    for (int k = 0; k < na; ++k) {
        if (r0.atom(k).is_empty(eps))
            rep.finite_at_zero = {false, "Rbar(0) empty on bar atom " + std::to_string(k)};
        else if (r0.atom(k).canonicalized(eps).halfspaces().empty())
            rep.finite_at_zero = {false, "Rbar(0) full on bar atom " + std::to_string(k)};
    }

    for (int s = 0; s < samples; ++s) {
        auto X = sampling::random_process(sp, rng, d);
        auto rx = rbar_eval(osp, A, X, eps);

        // cash invariance with bar-F_t-measurable shifts
        std::vector<Vec<S>> mshift(na), neg(na);
        for (int k = 0; k < na; ++k) {
            mshift[k] = zero_vec<S>(m);
            for (int i = 0; i < m; ++i) mshift[k][i] = rng.value(-2.0, 2.0);
            neg[k] = mshift[k];
            for (S& v : neg[k]) v = -v;
        }
        AdaptedProcess<S> Xs = X;
        for (int r = 0; r <= sp.horizon(); ++r)
            for (int w = 0; w < sp.num_states(); ++w)
                for (int i = 0; i < m; ++i)
                    Xs.vals[r][w][i] += mshift[bi.of_cell(sp, r, w)][i];
        if (rep.cash_invariant.pass &&
            !rbar_eval(osp, A, Xs, eps).set_equals(rx.translated(neg), tol))
            rep.cash_invariant = {false, "sample " + std::to_string(s)};

        // monotonicity
        AdaptedProcess<S> Y = X;
        for (int r = 0; r <= sp.horizon(); ++r)
            for (int a = 0; a < sp.num_atoms(r); ++a) {
                Vec<S> up(d);
                for (int i = 0; i < d; ++i) up[i] = rng.value(0.0, 2.0);
                for (int w : sp.atom_states(r, a))
                    for (int i = 0; i < d; ++i) Y.vals[r][w][i] += up[i];
            }
        if (rep.monotone.pass && !rx.subset_of(rbar_eval(osp, A, Y, eps), tol))
            rep.monotone = {false, "sample " + std::to_string(s)};

        if (rep.normalized.pass && !rx.set_equals(rx.minkowski_sum(r0, eps), tol))
            rep.normalized = {false, "sample " + std::to_string(s)};

        // conditional convexity / positive homogeneity with bar-F_t lambda
        auto X2 = sampling::random_process(sp, rng, d);
        Vec<S> lam(na), one_minus(na), pos(na);
        for (int k = 0; k < na; ++k) {
            lam[k] = rng.ratio(0, 8, 8);
            one_minus[k] = S(1) - lam[k];
            pos[k] = rng.ratio(1, 8, 4);
        }
        AdaptedProcess<S> mix = X;
        AdaptedProcess<S> scl = X;
        for (int r = 0; r <= sp.horizon(); ++r)
            for (int w = 0; w < sp.num_states(); ++w) {
                int k = bi.of_cell(sp, r, w);
                for (int i = 0; i < d; ++i) {
                    mix.vals[r][w][i] =
                        lam[k] * X.vals[r][w][i] + one_minus[k] * X2.vals[r][w][i];
                    scl.vals[r][w][i] = pos[k] * X.vals[r][w][i];
                }
            }
        auto rx2 = rbar_eval(osp, A, X2, eps);
        auto comb = rx.scaled(lam).minkowski_sum(rx2.scaled(one_minus), eps);
        if (rep.convex.pass && !comb.subset_of(rbar_eval(osp, A, mix, eps), tol))
            rep.convex = {false, "sample " + std::to_string(s)};
        if (rep.pos_hom.pass &&
            !rbar_eval(osp, A, scl, eps).set_equals(rx.scaled(pos), tol))
            rep.pos_hom = {false, "sample " + std::to_string(s)};

        if (rep.time_decomposable.pass && !check_time_decomposable(osp, A, X, tol))
            rep.time_decomposable = {false, "sample " + std::to_string(s)};
    }
    return rep;
}

}  // namespace risktree::riskvec
