#pragma once

#include "risktree/conditional_set.hpp"
#include "risktree/generators.hpp"
#include "risktree/sampling.hpp"
#include "risktree/space.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace risktree::riskproc {

using polyhedra::ConditionalPolyhedron;
using polyhedra::EligibleStructure;
using polyhedra::Polyhedron;
using space::AdaptedProcess;
using space::ScenarioSpace;
using space::VecField;
using space::VectorMeasure;

// Polyhedral acceptance set A_t in R_t^{infty,d}: finitely many linear
// generators over process coordinates at times >= t.
template <class S>
struct ProcessAcceptanceSet {
    int t = 0;
    EligibleStructure el;
    std::vector<Generator<S>> gens;

    bool is_cone(const S& eps) const {
        for (const auto& g : gens)
            if (Num<S>::abs(g.offset) > eps) return false;
        return true;
    }

    void check_times() const {
        for (const auto& g : gens)
            for (const auto& [c, coef] : g.terms)
                if (c.time < t)
                    throw std::invalid_argument("acceptance generator before time t");
    }
};

template <class S>
bool accepts(const ProcessAcceptanceSet<S>& A, const AdaptedProcess<S>& X, const S& eps) {
    for (const auto& g : A.gens)
        if (eval_generator(g, X) < g.offset - eps) return false;
    return true;
}

// {m in M_t : X + m 1_{T_t} in A_t} assembled per F_t atom by substituting
// the eligible shift into every generator.  Generators must not couple
// distinct F_t atoms (all shipped families are F_t-decomposable).
template <class S>
ConditionalPolyhedron<S> rho_eval(const ScenarioSpace<S>& sp,
                                  const ProcessAcceptanceSet<S>& A,
                                  const AdaptedProcess<S>& X,
                                  const S& eps) {
    A.check_times();
    const int t = A.t, m = A.el.m;
    std::vector<Polyhedron<S>> atoms(sp.num_atoms(t), Polyhedron<S>::full(m));
    for (const auto& g : A.gens) {
        int owner = -1;
        Vec<S> normal = zero_vec<S>(m);
        S off = g.offset;
        for (const auto& [c, coef] : g.terms) {
            int a = sp.atom_of(t, c.state);
            if (owner < 0) owner = a;
            if (a != owner)
                throw std::invalid_argument("generator couples distinct F_t atoms");
            if (c.asset < m) normal[c.asset] += coef;
            off -= coef * X.vals[c.time][c.state][c.asset];
        }
        if (owner < 0) {
            // term-free generator: infeasible everywhere when violated
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
    return ConditionalPolyhedron<S>(t, std::move(atoms));
}

// ---------------------------------------------------------------------------
// named acceptance families

// worst-case cone {X : X_s >= 0 componentwise for all s in T_t}
template <class S>
ProcessAcceptanceSet<S> worst_case_cone(const ScenarioSpace<S>& sp,
                                        int t,
                                        const EligibleStructure& el) {
    ProcessAcceptanceSet<S> A;
    A.t = t;
    A.el = el;
    for (int s = t; s <= sp.horizon(); ++s)
        for (int a = 0; a < sp.num_atoms(s); ++a)
            for (int i = 0; i < el.d; ++i) {
                Generator<S> g;
                g.terms.push_back({{s, sp.atom_states(s, a)[0], i}, S(1)});
                A.gens.push_back(std::move(g));
            }
    return A;
}

// shifted cone {X : X_s >= c} (conditionally convex, not a cone for c != 0)
template <class S>
ProcessAcceptanceSet<S> shifted_cone(const ScenarioSpace<S>& sp,
                                     int t,
                                     const EligibleStructure& el,
                                     const Vec<S>& c) {
    ProcessAcceptanceSet<S> A = worst_case_cone(sp, t, el);
    for (auto& g : A.gens) g.offset = c[g.terms[0].first.asset];
    return A;
}

// cone constraining only the listed times (used for max-dual counterexamples)
template <class S>
ProcessAcceptanceSet<S> partial_cone(const ScenarioSpace<S>& sp,
                                     int t,
                                     const EligibleStructure& el,
                                     const std::vector<int>& times) {
    ProcessAcceptanceSet<S> A;
    A.t = t;
    A.el = el;
    for (int s : times)
        for (int a = 0; a < sp.num_atoms(s); ++a)
            for (int i = 0; i < el.d; ++i) {
                Generator<S> g;
                g.terms.push_back({{s, sp.atom_states(s, a)[0], i}, S(1)});
                A.gens.push_back(std::move(g));
            }
    return A;
}

// deliberately non-monotone set: worst-case cone plus the cap X_T <= cap
template <class S>
ProcessAcceptanceSet<S> capped_set(const ScenarioSpace<S>& sp,
                                   int t,
                                   const EligibleStructure& el,
                                   const S& cap) {
    ProcessAcceptanceSet<S> A = worst_case_cone(sp, t, el);
    for (int a = 0; a < sp.num_atoms(sp.horizon()); ++a)
        for (int i = 0; i < el.d; ++i) {
            Generator<S> g;
            g.terms.push_back({{sp.horizon(), sp.atom_states(sp.horizon(), a)[0], i}, S(-1)});
            g.offset = -cap;
            A.gens.push_back(std::move(g));
        }
    return A;
}

// conditional-expectation floor per F_t atom and time: E_t[X_s] >= level
template <class S>
ProcessAcceptanceSet<S> expectation_floor(const ScenarioSpace<S>& sp,
                                          int t,
                                          const EligibleStructure& el,
                                          const Vec<S>& level) {
    ProcessAcceptanceSet<S> A;
    A.t = t;
    A.el = el;
    for (int s = t; s <= sp.horizon(); ++s)
        for (int a = 0; a < sp.num_atoms(t); ++a) {
            S pa = sp.atom_prob(t, a);
            for (int i = 0; i < el.d; ++i) {
                Generator<S> g;
                for (int w : sp.atom_states(t, a))
                    g.terms.push_back({{s, w, i}, sp.prob_of(w) / pa});
                g.offset = level[i];
                A.gens.push_back(std::move(g));
            }
        }
    return A;
}

// ---------------------------------------------------------------------------
// dual variables

// Element of the dual domain for processes at time t: per s in T_t a vector
// of measures Q_s (componentwise densities, equal to P on F_t) and an
// F_t-measurable direction w_s (stored per state).
template <class S>
struct ProcessDual {
    int t = 0;
    std::vector<VectorMeasure<S>> Q;  // [s - t]
    std::vector<VecField<S>> w;       // [s - t][state] -> d comps
    bool boundary = false;            // Dirac-style: some w_s in M_t^perp

    int horizon_span() const { return static_cast<int>(Q.size()); }
};

// w_t^s(Q_s, w_s) per state for slice s of the dual variable
template <class S>
VecField<S> dual_w_map(const ScenarioSpace<S>& sp, const ProcessDual<S>& dual, int s) {
    return space::w_map(sp, dual.Q[s - dual.t], dual.w[s - dual.t], dual.t, s);
}

// membership in W_t (boundary variables skip the "not in M_t^perp" clause)
template <class S>
bool in_Wt(const ScenarioSpace<S>& sp,
           const ProcessDual<S>& dual,
           const EligibleStructure& el,
           const S& eps) {
    const int t = dual.t, T = sp.horizon();
    if (dual.horizon_span() != T - t + 1 || dual.w.size() != dual.Q.size()) return false;
    for (int s = t; s <= T; ++s) {
        const auto& Q = dual.Q[s - t];
        if (Q.dim() != el.d) return false;
        for (int i = 0; i < el.d; ++i) {
            // Q_{s,i} = P on F_t  <=>  E_t[dQ/dP] = 1
            auto et = sp.cond_exp(Q.densities[i], t);
            for (int st = 0; st < sp.num_states(); ++st)
                if (Num<S>::abs(et[st] - S(1)) > eps) return false;
        }
        const auto& ws = dual.w[s - t];
        bool m_part_nonzero = false;
        for (int st = 0; st < sp.num_states(); ++st) {
            for (int i = 0; i < el.m; ++i) {
                if (ws[st][i] < -eps) return false;
                if (ws[st][i] > eps) m_part_nonzero = true;
            }
        }
        for (int i = 0; i < el.d; ++i) {
            space::Field<S> comp(sp.num_states());
            for (int st = 0; st < sp.num_states(); ++st) comp[st] = ws[st][i];
            if (!sp.is_adapted(comp, t, eps)) return false;
        }
        if (!dual.boundary && !m_part_nonzero) return false;
        auto wts = dual_w_map(sp, dual, s);
        for (int st = 0; st < sp.num_states(); ++st)
            for (int i = 0; i < el.d; ++i)
                if (wts[st][i] < -eps) return false;
    }
    return true;
}

// objective coefficients of Z |-> sum_s w_s^T E_t^{Q_s}[Z_s] at one F_t atom,
// over the adapted-process variables of `vars`
template <class S>
Vec<S> pairing_coefficients(const ScenarioSpace<S>& sp,
                            const ProcessDual<S>& dual,
                            const ProcessVars<S>& vars,
                            int atom) {
    const int t = dual.t, T = sp.horizon();
    Vec<S> c = zero_vec<S>(vars.count());
    S pa = sp.atom_prob(t, atom);
    for (int s = t; s <= T; ++s) {
        const auto& Q = dual.Q[s - t];
        const auto& ws = dual.w[s - t];
        for (int i = 0; i < Q.dim(); ++i) {
            auto x = space::xi(sp, Q.densities[i], t, T);
            for (int w : sp.atom_states(t, atom))
                c[vars.index(s, w, i)] += ws[w][i] * sp.prob_of(w) * x[w] / pa;
        }
    }
    return c;
}

// minimal penalty alpha_t(Q, w): per atom the halfspace
// {u : sum_s w_s^T u >= sup_{Z in A} sum_s w_s^T E_t^{Q_s}[-Z_s]},
// empty when the supremum is unbounded.
template <class S>
ConditionalPolyhedron<S> penalty_process(const ScenarioSpace<S>& sp,
                                         const ProcessAcceptanceSet<S>& A,
                                         const ProcessDual<S>& dual,
                                         const S& eps) {
    A.check_times();
    const int t = A.t, m = A.el.m;
    ProcessVars<S> vars(sp, t, A.el.d);
    std::vector<Vec<S>> rows;
    Vec<S> rhs;
    vars.rows(A.gens, rows, rhs);
    std::vector<Polyhedron<S>> atoms;
    for (int a = 0; a < sp.num_atoms(t); ++a) {
        Vec<S> c = pairing_coefficients(sp, dual, vars, a);
        auto r = solve_lp<S>(c, rows, rhs, eps);
        if (r.status == LpStatus::Infeasible)
            throw std::invalid_argument("penalty over empty acceptance set");
        if (r.status == LpStatus::Unbounded) {
            atoms.push_back(Polyhedron<S>::empty_set(m));
            continue;
        }
        S sup = -r.objective;  // sup of the pairing with -Z
        Vec<S> normal = zero_vec<S>(m);
        int rep = sp.atom_states(t, a)[0];
        for (int s = t; s <= sp.horizon(); ++s)
            for (int i = 0; i < m; ++i) normal[i] += dual.w[s - t][rep][i];
        if (is_zero_vec(normal)) {
            atoms.push_back(sup > eps ? Polyhedron<S>::empty_set(m)
                                      : Polyhedron<S>::full(m));
        } else {
            Polyhedron<S> p(m);
            p.add_halfspace(std::move(normal), std::move(sup));
            atoms.push_back(std::move(p));
        }
    }
    return ConditionalPolyhedron<S>(t, std::move(atoms));
}

// One dual term of the representation:
// {u : sum_s w_s^T u >= sum_s w_s^T E_t^{Q_s}[-X_s]} -. alpha_t(Q, w)
template <class S>
ConditionalPolyhedron<S> dual_term_process(const ScenarioSpace<S>& sp,
                                           const ProcessAcceptanceSet<S>& A,
                                           const AdaptedProcess<S>& X,
                                           const ProcessDual<S>& dual,
                                           const S& eps) {
    const int t = A.t, m = A.el.m, d = A.el.d;
    auto alpha = penalty_process(sp, A, dual, eps);
    std::vector<Polyhedron<S>> atoms;
    for (int a = 0; a < sp.num_atoms(t); ++a) {
        int rep = sp.atom_states(t, a)[0];
        S beta(0);
        Vec<S> normal = zero_vec<S>(m);
        for (int s = t; s <= sp.horizon(); ++s) {
            auto e = space::cond_expectation(sp, X.vals[s], dual.Q[s - t], t);
            for (int i = 0; i < d; ++i) beta += dual.w[s - t][rep][i] * (-e[rep][i]);
            for (int i = 0; i < m; ++i) normal[i] += dual.w[s - t][rep][i];
        }
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
        atoms.push_back(h.minkowski_diff(alpha.atom(a), eps));
    }
    return ConditionalPolyhedron<S>(t, std::move(atoms));
}

// Intersection of dual terms over a finite dual list: an outer approximation
// of rho_eval, exact for the Dirac facet family on coherent instances.
template <class S>
ConditionalPolyhedron<S> dual_eval_process(const ScenarioSpace<S>& sp,
                                           const ProcessAcceptanceSet<S>& A,
                                           const AdaptedProcess<S>& X,
                                           const std::vector<ProcessDual<S>>& duals,
                                           const S& eps) {
    auto out = ConditionalPolyhedron<S>::full(A.t, sp.num_atoms(A.t), A.el.m);
    for (const auto& dual : duals)
        out = out.intersect(dual_term_process(sp, A, X, dual, eps));
    return out;
}

// W_t^max membership for coherent A: inf_{Z in A} sum_s w_s^T E_t^{Q_s}[Z_s]
// >= 0 per atom (0 or -inf for a cone).
template <class S>
bool is_max_dual_process(const ScenarioSpace<S>& sp,
                         const ProcessAcceptanceSet<S>& A,
                         const ProcessDual<S>& dual,
                         const S& eps) {
    if (!A.is_cone(eps))
        throw std::invalid_argument("max-dual set defined for coherent acceptance sets");
    ProcessVars<S> vars(sp, A.t, A.el.d);
    std::vector<Vec<S>> rows;
    Vec<S> rhs;
    vars.rows(A.gens, rows, rhs);
    for (int a = 0; a < sp.num_atoms(A.t); ++a) {
        Vec<S> c = pairing_coefficients(sp, dual, vars, a);
        auto r = solve_lp<S>(c, rows, rhs, eps);
        if (r.status != LpStatus::Optimal || r.objective < -eps) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// axiom checking

struct AxiomResult {
    bool pass = true;
    std::string witness;
};

struct ProcessAxiomReport {
    AxiomResult cash_invariant, monotone, finite_at_zero, normalized, convex, pos_hom;

    bool all_pass() const {
        return cash_invariant.pass && monotone.pass && finite_at_zero.pass &&
               normalized.pass && convex.pass && pos_hom.pass;
    }
};

namespace detail {

template <class S>
AdaptedProcess<S> add_eligible_shift(const ScenarioSpace<S>& sp,
                                     const AdaptedProcess<S>& X,
                                     const std::vector<Vec<S>>& mshift,
                                     int t,
                                     int m) {
    AdaptedProcess<S> out = X;
    for (int s = t; s <= sp.horizon(); ++s)
        for (int w = 0; w < sp.num_states(); ++w)
            for (int i = 0; i < m; ++i) out.vals[s][w][i] += mshift[sp.atom_of(t, w)][i];
    return out;
}

template <class S>
AdaptedProcess<S> combine(const ScenarioSpace<S>& sp,
                          const AdaptedProcess<S>& X,
                          const AdaptedProcess<S>& Y,
                          const Vec<S>& lam,
                          int t) {
    AdaptedProcess<S> out = X;
    for (int s = 0; s <= sp.horizon(); ++s)
        for (int w = 0; w < sp.num_states(); ++w) {
            const S& l = lam[sp.atom_of(t, w)];
            for (int i = 0; i < X.d; ++i)
                out.vals[s][w][i] = l * X.vals[s][w][i] + (S(1) - l) * Y.vals[s][w][i];
        }
    return out;
}

}  // namespace detail

template <class S>
ProcessAxiomReport check_axioms_process(const ScenarioSpace<S>& sp,
                                        const ProcessAcceptanceSet<S>& A,
                                        sampling::Rng<S>& rng,
                                        int samples,
                                        const S& eps) {
    ProcessAxiomReport rep;
    const int t = A.t, m = A.el.m, d = A.el.d;
    const int na = sp.num_atoms(t);
    const S tol = eps * S(10);

    auto rho0 = rho_eval(sp, A, AdaptedProcess<S>::zero(sp, d, t), eps);
    for (int a = 0; a < na; ++a) {
        if (rho0.atom(a).is_empty(eps)) {
            rep.finite_at_zero = {false, "rho(0) empty on atom " + std::to_string(a)};
        } else if (rho0.atom(a).canonicalized(eps).halfspaces().empty()) {
            rep.finite_at_zero = {false, "rho(0) is all of M on atom " + std::to_string(a)};
        }
    }

    for (int k = 0; k < samples; ++k) {
        auto X = sampling::random_process(sp, rng, d, t);
        auto rx = rho_eval(sp, A, X, eps);

        // cash invariance: rho(X + m 1_{T_t}) = rho(X) - m
        std::vector<Vec<S>> mshift(na);
        for (int a = 0; a < na; ++a) {
            mshift[a] = zero_vec<S>(m);
            for (int i = 0; i < m; ++i) mshift[a][i] = rng.value(-2.0, 2.0);
        }
        auto shifted = rho_eval(sp, A, detail::add_eligible_shift(sp, X, mshift, t, m), eps);
        std::vector<Vec<S>> neg(na);
        for (int a = 0; a < na; ++a) {
            neg[a] = mshift[a];
            for (S& v : neg[a]) v = -v;
        }
        if (rep.cash_invariant.pass && !shifted.set_equals(rx.translated(neg), tol))
            rep.cash_invariant = {false, "sample " + std::to_string(k)};

        // monotonicity: X <= Y pointwise implies rho(X) subseteq rho(Y)
        AdaptedProcess<S> Y = X;
        for (int s = t; s <= sp.horizon(); ++s)
            for (int a = 0; a < sp.num_atoms(s); ++a) {
                Vec<S> up(d);
                for (int i = 0; i < d; ++i) up[i] = rng.value(0.0, 2.0);
                for (int w : sp.atom_states(s, a))
                    for (int i = 0; i < d; ++i) Y.vals[s][w][i] += up[i];
            }
        if (rep.monotone.pass && !rx.subset_of(rho_eval(sp, A, Y, eps), tol))
            rep.monotone = {false, "sample " + std::to_string(k)};

        // normalization: rho(X) = rho(X) + rho(0)
        if (rep.normalized.pass && !rx.set_equals(rx.minkowski_sum(rho0, eps), tol))
            rep.normalized = {false, "sample " + std::to_string(k)};

        // conditional convexity and positive homogeneity
        auto X2 = sampling::random_process(sp, rng, d, t);
        Vec<S> lam(na);
        for (int a = 0; a < na; ++a) lam[a] = rng.ratio(0, 8, 8);
        auto mix = rho_eval(sp, A, detail::combine(sp, X, X2, lam, t), eps);
        Vec<S> one_minus(na);
        for (int a = 0; a < na; ++a) one_minus[a] = S(1) - lam[a];
        auto rx2 = rho_eval(sp, A, X2, eps);
        auto comb = rx.scaled(lam).minkowski_sum(rx2.scaled(one_minus), eps);
        if (rep.convex.pass && !comb.subset_of(mix, tol))
            rep.convex = {false, "sample " + std::to_string(k)};

        Vec<S> pos(na);
        for (int a = 0; a < na; ++a) pos[a] = rng.ratio(1, 8, 4);
        AdaptedProcess<S> Xs = X;
        for (int s = 0; s <= sp.horizon(); ++s)
            for (int w = 0; w < sp.num_states(); ++w)
                for (int i = 0; i < d; ++i) Xs.vals[s][w][i] *= pos[sp.atom_of(t, w)];
        if (rep.pos_hom.pass &&
            !rho_eval(sp, A, Xs, eps).set_equals(rx.scaled(pos), tol))
            rep.pos_hom = {false, "sample " + std::to_string(k)};
    }
    return rep;
}

}  // namespace risktree::riskproc
