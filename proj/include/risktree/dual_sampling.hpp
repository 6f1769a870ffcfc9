#pragma once

#include "risktree/riskproc.hpp"
#include "risktree/riskvec.hpp"
#include "risktree/sampling.hpp"

#include <vector>

namespace risktree::sampling {

// Random element of W_t: per s a vector of measures equal to P on F_t and an
// F_t-measurable nonnegative direction with a nonzero eligible part.
template <class S>
riskproc::ProcessDual<S> random_process_dual(const space::ScenarioSpace<S>& sp,
                                             Rng<S>& rng,
                                             int t,
                                             const polyhedra::EligibleStructure& el) {
    riskproc::ProcessDual<S> out;
    out.t = t;
    const int n = sp.num_states();
    for (int s = t; s <= sp.horizon(); ++s) {
        out.Q.push_back(random_vector_measure(sp, rng, el.d, t));
        space::VecField<S> w(n, zero_vec<S>(el.d));
        bool eligible_hit = false;
        for (int a = 0; a < sp.num_atoms(t); ++a) {
            Vec<S> v(el.d);
            for (int i = 0; i < el.d; ++i) {
                v[i] = rng.ratio(0, 8, 4);
                if (i < el.m && v[i] > S(0)) eligible_hit = true;
            }
            for (int st : sp.atom_states(t, a)) w[st] = v;
        }
        if (!eligible_hit)
            for (int st = 0; st < n; ++st) w[st][0] = S(1);
        out.w.push_back(std::move(w));
    }
    return out;
}

// Random element of bar W_t: componentwise bar M_t(bar P) optional measures
// and a nonnegative bar-F_t direction.
template <class S>
riskvec::VectorDual<S> random_vector_dual(const space::OptionalSpace<S>& osp,
                                          Rng<S>& rng,
                                          int t,
                                          const polyhedra::EligibleStructure& el,
                                          const S& eps) {
    riskvec::VectorDual<S> out;
    out.t = t;
    for (int i = 0; i < el.d; ++i)
        out.Qbar.push_back(random_optional_measure(osp, rng, eps, t, true));
    riskvec::BarIndex<S> bi(osp, t);
    bool eligible_hit = false;
    for (int k = 0; k < bi.count(); ++k) {
        Vec<S> v(el.d);
        for (int i = 0; i < el.d; ++i) {
            v[i] = rng.ratio(0, 8, 4);
            if (i < el.m && v[i] > S(0)) eligible_hit = true;
        }
        out.wbar.push_back(std::move(v));
    }
    if (!eligible_hit)
        for (auto& v : out.wbar) v[0] = S(1);
    return out;
}

// The Dirac facet family on the coherent worst-case instance: one boundary
// dual per (time s, terminal state), concentrating all weight there.  Exact
// for d = m = 1.
template <class S>
std::vector<riskproc::ProcessDual<S>> dirac_process_duals(
    const space::ScenarioSpace<S>& sp, int t) {
    std::vector<riskproc::ProcessDual<S>> out;
    const int n = sp.num_states();
    for (int s = t; s <= sp.horizon(); ++s) {
        for (int a = 0; a < sp.num_atoms(s); ++a) {
            riskproc::ProcessDual<S> dual;
            dual.t = t;
            dual.boundary = true;
            for (int r = t; r <= sp.horizon(); ++r) {
                space::VectorMeasure<S> Q;
                space::Field<S> z(n, S(1));
                if (r == s) {
                    // concentrate Q_s on the chosen F_s atom within each
                    // F_t block that contains it; P elsewhere
                    z.assign(n, S(0));
                    int block = sp.atom_of(t, sp.atom_states(s, a)[0]);
                    S mass(0);
                    for (int w : sp.atom_states(s, a)) mass += sp.prob_of(w);
                    S block_mass = sp.atom_prob(t, block);
                    for (int w = 0; w < n; ++w) {
                        if (sp.atom_of(s, w) == a)
                            z[w] = block_mass / mass;
                        else if (sp.atom_of(t, w) != block)
                            z[w] = S(1);
                    }
                }
                Q.densities.assign(1, z);
                dual.Q.push_back(std::move(Q));
                space::VecField<S> w(n, zero_vec<S>(1));
                if (r == s) {
                    int block = sp.atom_of(t, sp.atom_states(s, a)[0]);
                    for (int st : sp.atom_states(t, block)) w[st][0] = S(1);
                }
                dual.w.push_back(std::move(w));
            }
            out.push_back(std::move(dual));
        }
    }
    return out;
}

// The analogous per-cell boundary family on the optional space: for every
// bar-F_t atom and every cell group inside it, the direction 1 with the
// optional measure concentrated there.
template <class S>
std::vector<riskvec::VectorDual<S>> dirac_vector_duals(const space::OptionalSpace<S>& osp,
                                                       int t,
                                                       const S& eps) {
    const auto& sp = osp.base();
    const int T = sp.horizon(), n = sp.num_states();
    riskvec::BarIndex<S> bi(osp, t);
    std::vector<riskvec::VectorDual<S>> out;
    // one dual per (slice r >= t, F_r atom): psi concentrated at r on the
    // atom, mu elsewhere; plus the past-slice direction duals
    for (int r = 0; r <= T; ++r) {
        for (int a = 0; a < sp.num_atoms(r); ++a) {
            riskvec::VectorDual<S> dual;
            dual.t = t;
            dual.boundary = true;
            std::vector<space::Field<S>> weights(T + 1, space::Field<S>(n));
            for (int s = 0; s <= T; ++s)
                for (int w = 0; w < n; ++w) weights[s][w] = sp.prob_of(w) * sp.mu(s, w);
            if (r >= t) {
                // within the F_t block of the chosen atom, concentrate Q on
                // the F_r atom (scaled to preserve the block mass) and all of
                // its remaining psi-weight on slice r; this stays inside
                // bar M_t(bar P)
                int block = sp.atom_of(t, sp.atom_states(r, a)[0]);
                S block_mass = sp.atom_prob(t, block);
                S target_mass(0);
                for (int w : sp.atom_states(r, a)) target_mass += sp.prob_of(w);
                for (int w : sp.atom_states(t, block)) {
                    S q = sp.atom_of(r, w) == a
                              ? sp.prob_of(w) * block_mass / target_mass
                              : S(0);
                    S mu_pre(0);
                    for (int s = 0; s < t; ++s) mu_pre += sp.mu(s, w);
                    for (int s = 0; s < t; ++s) weights[s][w] = q * sp.mu(s, w);
                    for (int s = t; s <= T; ++s)
                        weights[s][w] = s == r ? q * (S(1) - mu_pre) : S(0);
                }
            }
            dual.Qbar.assign(1, space::decompose(osp, weights, eps));
            dual.wbar.assign(bi.count(), zero_vec<S>(1));
            int cell_atom = bi.of_cell(sp, r, sp.atom_states(r, a)[0]);
            dual.wbar[cell_atom][0] = S(1);
            out.push_back(std::move(dual));
        }
    }
    return out;
}

}  // namespace risktree::sampling
