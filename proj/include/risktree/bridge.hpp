#pragma once

#include "risktree/riskproc.hpp"
#include "risktree/riskvec.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace risktree::bridge {

using polyhedra::ConditionalPolyhedron;
using polyhedra::EligibleStructure;
using polyhedra::Polyhedron;
using riskproc::ProcessAcceptanceSet;
using riskproc::ProcessDual;
using riskvec::BarIndex;
using riskvec::VectorAcceptanceSet;
using riskvec::VectorDual;
using space::AdaptedProcess;
using space::Field;
using space::OptionalMeasure;
using space::OptionalSpace;
using space::ScenarioSpace;
using space::VecField;
using space::VectorMeasure;

// A process risk measure at time t together with the restricted measures
// (R_s)_{s<t}; restricted[s] holds A_{R_s} with generators on slice s only.
template <class S>
struct Augmented {
    ProcessAcceptanceSet<S> rho;
    std::vector<ProcessAcceptanceSet<S>> restricted;

    int t() const { return rho.t; }
};

// bar A_t = sum_{s<t} A_{R_s} 1_s + A_t 1_{T_t}: membership is the
// conjunction, so the generator lists concatenate.
template <class S>
VectorAcceptanceSet<S> lift_acceptance(const Augmented<S>& aug) {
    VectorAcceptanceSet<S> A;
    A.t = aug.t();
    A.el = aug.rho.el;
    for (const auto& R : aug.restricted)
        A.gens.insert(A.gens.end(), R.gens.begin(), R.gens.end());
    A.gens.insert(A.gens.end(), aug.rho.gens.begin(), aug.rho.gens.end());
    return A;
}

namespace detail {

// restriction of a generator to the coordinates selected by `keep`; the
// dropped coordinates are substituted with zero
template <class S, class Keep>
std::vector<Generator<S>> restrict_gens(const std::vector<Generator<S>>& gens, Keep keep) {
    std::vector<Generator<S>> out;
    for (const auto& g : gens) {
        Generator<S> r;
        r.offset = g.offset;
        for (const auto& term : g.terms)
            if (keep(term.first)) r.terms.push_back(term);
        if (r.terms.empty() && r.offset <= S(0)) continue;  // vacuous
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace detail

// A_t = {X : X 1_{T_t} in bar A_t} and A_{R_s} = (bar A_t)_s
template <class S>
Augmented<S> project_acceptance(const VectorAcceptanceSet<S>& Abar) {
    Augmented<S> aug;
    aug.rho.t = Abar.t;
    aug.rho.el = Abar.el;
    aug.rho.gens =
        detail::restrict_gens(Abar.gens, [&](const Coord& c) { return c.time >= Abar.t; });
    for (int s = 0; s < Abar.t; ++s) {
        ProcessAcceptanceSet<S> R;
        R.t = s;
        R.el = Abar.el;
        R.gens =
            detail::restrict_gens(Abar.gens, [&](const Coord& c) { return c.time == s; });
        aug.restricted.push_back(std::move(R));
    }
    return aug;
}

// bar R_t(X) assembled from the display
// sum_{s<t} R_s(X_s) 1_s + rho_t(pi_{t,T}(X)) 1_{T_t}
template <class S>
ConditionalPolyhedron<S> lift_eval(const OptionalSpace<S>& osp,
                                   const Augmented<S>& aug,
                                   const AdaptedProcess<S>& X,
                                   const S& eps) {
    const auto& sp = osp.base();
    const int t = aug.t();
    BarIndex<S> bi(osp, t);
    std::vector<Polyhedron<S>> atoms;
    atoms.reserve(bi.count());
    auto rho_part = riskproc::rho_eval(sp, aug.rho, space::project_process(sp, X, t), eps);
    std::vector<ConditionalPolyhedron<S>> r_part;
    for (int s = 0; s < t; ++s)
        r_part.push_back(riskvec::restricted_eval(sp, aug.restricted[s], X.vals[s], eps));
    for (int k = 0; k < bi.count(); ++k) {
        const auto& ba = bi.atom(k);
        atoms.push_back(ba.frozen ? rho_part.atom(ba.atom) : r_part[ba.time].atom(ba.atom));
    }
    return ConditionalPolyhedron<S>(t, std::move(atoms));
}

// ---------------------------------------------------------------------------
// dual-variable maps

// W_t(Q (x) psi, wbar) = (Qhat, w):
//   dQhat_{s,i}/dP = psi_{s,i}/E_t^{Q_i}[psi_{s,i}] xi_{t,s}(Q_i) where the
//       conditional expectation is positive, mu_s/E_t[mu_s] otherwise;
//   w_{s,i} = E_t^{Q_i}[psi_{s,i}]/(1 - sum_{r<t} mu_r) wbar_{t,i}.
template <class S>
ProcessDual<S> map_dual_to_process(const OptionalSpace<S>& osp,
                                   const VectorDual<S>& vdual,
                                   const EligibleStructure& el) {
    const auto& sp = osp.base();
    const int t = vdual.t, T = sp.horizon(), n = sp.num_states(), d = el.d;
    BarIndex<S> bi(osp, t);
    ProcessDual<S> out;
    out.t = t;
    out.boundary = vdual.boundary;
    Field<S> mu_pre(n, S(0));
    for (int w = 0; w < n; ++w)
        for (int r = 0; r < t; ++r) mu_pre[w] += sp.mu(r, w);
    // the formula reads off psi pathwise, so the decomposition must be the
    // adapted normal form (psi_s F_s-measurable); re-decompose the cells
    std::vector<space::OptionalMeasure<S>> qb;
    qb.reserve(d);
    for (int i = 0; i < d; ++i)
        qb.push_back(space::adapted_decompose(osp, vdual.Qbar[i].cell_weights(sp)));
    for (int s = t; s <= T; ++s) {
        VectorMeasure<S> Q;
        VecField<S> ws(n, zero_vec<S>(d));
        for (int i = 0; i < d; ++i) {
            Field<S> z = qb[i].density(sp);
            Field<S> f = space::xi(sp, z, t, T);
            for (int w = 0; w < n; ++w) f[w] *= qb[i].psi[s][w];
            Field<S> epsi = sp.cond_exp(f, t);
            Field<S> mus(n);
            for (int w = 0; w < n; ++w) mus[w] = sp.mu(s, w);
            Field<S> emu = sp.cond_exp(mus, t);
            Field<S> xi_ts = space::xi(sp, z, t, s);
            Field<S> dens(n);
            for (int w = 0; w < n; ++w)
                dens[w] = epsi[w] > S(0)
                              ? S(qb[i].psi[s][w] * xi_ts[w] / epsi[w])
                              : S(sp.mu(s, w) / emu[w]);
            Q.densities.push_back(std::move(dens));
            for (int w = 0; w < n; ++w) {
                const S& wti = vdual.wbar[bi.of_cell(sp, t, w)][i];
                ws[w][i] = epsi[w] / (S(1) - mu_pre[w]) * wti;
            }
        }
        out.Q.push_back(std::move(Q));
        out.w.push_back(std::move(ws));
    }
    return out;
}

// bar W_t(Q, w) = (Qbar, wbar):
//   wbar = sum_s diag(1_{w_s>0}) w_s on the frozen block, zero on past slices;
//   (dQbar_i/dPbar)_s = 1 on [0,t) and
//       (1 - sum_{r<t} mu_r)/mu_s (w_{s,i}/wbar_{t,i} or 1 when wbar_{t,i}=0)
//       xi_{t,s}(Q_{s,i}) on the frozen block.
template <class S>
VectorDual<S> map_dual_to_vector(const OptionalSpace<S>& osp,
                                 const ProcessDual<S>& pdual,
                                 const EligibleStructure& el,
                                 const S& eps) {
    const auto& sp = osp.base();
    const int t = pdual.t, T = sp.horizon(), n = sp.num_states(), d = el.d;
    BarIndex<S> bi(osp, t);
    VectorDual<S> out;
    out.t = t;
    out.boundary = pdual.boundary;
    out.wbar.assign(bi.count(), zero_vec<S>(d));
    for (int k = 0; k < bi.count(); ++k) {
        const auto& ba = bi.atom(k);
        if (!ba.frozen) continue;
        int rep = sp.atom_states(t, ba.atom)[0];
        for (int s = t; s <= T; ++s)
            for (int i = 0; i < d; ++i)
                if (pdual.w[s - t][rep][i] > S(0)) out.wbar[k][i] += pdual.w[s - t][rep][i];
    }
    Field<S> mu_pre(n, S(0));
    for (int w = 0; w < n; ++w)
        for (int r = 0; r < t; ++r) mu_pre[w] += sp.mu(r, w);
    for (int i = 0; i < d; ++i) {
        std::vector<Field<S>> weights(T + 1, Field<S>(n, S(0)));
        for (int s = 0; s < t; ++s)
            for (int w = 0; w < n; ++w) weights[s][w] = sp.prob_of(w) * sp.mu(s, w);
        for (int s = t; s <= T; ++s) {
            Field<S> xi_ts = space::xi(sp, pdual.Q[s - t].densities[i], t, s);
            for (int w = 0; w < n; ++w) {
                const S& wti = out.wbar[bi.of_cell(sp, t, w)][i];
                S ratio = wti > S(0) ? pdual.w[s - t][w][i] / wti : S(1);
                weights[s][w] =
                    sp.prob_of(w) * (S(1) - mu_pre[w]) * ratio * xi_ts[w];
            }
        }
        out.Qbar.push_back(space::decompose(osp, weights, eps));
    }
    return out;
}

// (bar P, w 1_s) as a vector dual variable at level t: the reference optional
// measure with the direction supported on the slice-s past atoms.
template <class S>
VectorDual<S> pbar_slice_dual(const OptionalSpace<S>& osp,
                              int t,
                              int s,
                              const VecField<S>& w,
                              int d) {
    const auto& sp = osp.base();
    if (s >= t) throw std::invalid_argument("slice dual requires s < t");
    BarIndex<S> bi(osp, t);
    VectorDual<S> out;
    out.t = t;
    out.boundary = true;
    std::vector<Field<S>> mu_rows(sp.horizon() + 1, Field<S>(sp.num_states()));
    for (int r = 0; r <= sp.horizon(); ++r)
        for (int st = 0; st < sp.num_states(); ++st) mu_rows[r][st] = sp.mu(r, st);
    auto pbar = space::decompose(
        osp, space::compose(osp, sp.prob(), mu_rows, S(0)), S(0));
    out.Qbar.assign(d, pbar);
    out.wbar.assign(bi.count(), zero_vec<S>(d));
    for (int a = 0; a < sp.num_atoms(s); ++a) {
        int rep = sp.atom_states(s, a)[0];
        int k = bi.of_cell(sp, s, rep);
        out.wbar[k] = w[rep];
    }
    return out;
}

// alpha_{R_s}(w) for a restricted acceptance set via the process-side LP
// (only the slice-s component of the dual weight is nonzero).
template <class S>
ConditionalPolyhedron<S> restricted_penalty(const ScenarioSpace<S>& sp,
                                            const ProcessAcceptanceSet<S>& R,
                                            const VecField<S>& w,
                                            const S& eps) {
    ProcessDual<S> dual;
    dual.t = R.t;
    dual.boundary = true;
    const int d = R.el.d;
    for (int s = R.t; s <= sp.horizon(); ++s) {
        dual.Q.push_back(VectorMeasure<S>::reference(sp, d));
        dual.w.push_back(s == R.t ? w
                                  : VecField<S>(sp.num_states(), zero_vec<S>(d)));
    }
    return riskproc::penalty_process(sp, R, dual, eps);
}

// slice-s restriction of a bar direction as a state field
template <class S>
VecField<S> slice_direction(const OptionalSpace<S>& osp,
                            const VectorDual<S>& vdual,
                            int s) {
    const auto& sp = osp.base();
    BarIndex<S> bi(osp, vdual.t);
    VecField<S> w(sp.num_states());
    for (int st = 0; st < sp.num_states(); ++st) w[st] = vdual.wbar[bi.of_cell(sp, s, st)];
    return w;
}

struct PenaltyDecomposeReport {
    bool forward = true;  // bar alpha equals the slice/tail decomposition
    std::string witness;
};

// bar alpha_t(Qbar, wbar) = sum_{s<t} alpha_{R_s}(wbar_s) 1_s
//                           + alpha_t(W_t(Qbar, wbar)) 1_{T_t}
template <class S>
PenaltyDecomposeReport penalty_decompose_check(const OptionalSpace<S>& osp,
                                               const Augmented<S>& aug,
                                               const VectorDual<S>& vdual,
                                               const S& eps) {
    const auto& sp = osp.base();
    const int t = aug.t();
    BarIndex<S> bi(osp, t);
    PenaltyDecomposeReport rep;
    auto Abar = lift_acceptance(aug);
    auto bar_alpha = riskvec::penalty_vector(osp, Abar, vdual, eps);
    auto pdual = map_dual_to_process(osp, vdual, aug.rho.el);
    auto tail_alpha = riskproc::penalty_process(sp, aug.rho, pdual, eps);
    std::vector<ConditionalPolyhedron<S>> slice_alphas;
    for (int s = 0; s < t; ++s)
        slice_alphas.push_back(
            restricted_penalty(sp, aug.restricted[s], slice_direction(osp, vdual, s), eps));
    for (int k = 0; k < bi.count() && rep.forward; ++k) {
        const auto& ba = bi.atom(k);
        const auto& rhs =
            ba.frozen ? tail_alpha.atom(ba.atom) : slice_alphas[ba.time].atom(ba.atom);
        if (!bar_alpha.atom(k).set_equals(rhs, eps * S(100)))
            rep = {false, "bar atom " + std::to_string(k)};
    }
    return rep;
}

// reverse slice identity: alpha_{R_s}(w) = bar alpha_t(bar P, w 1_s)_s
template <class S>
bool penalty_reverse_slice_check(const OptionalSpace<S>& osp,
                                 const Augmented<S>& aug,
                                 int s,
                                 const VecField<S>& w,
                                 const S& eps) {
    const auto& sp = osp.base();
    const int t = aug.t();
    BarIndex<S> bi(osp, t);
    auto Abar = lift_acceptance(aug);
    auto vdual = pbar_slice_dual(osp, t, s, w, aug.rho.el.d);
    auto bar_alpha = riskvec::penalty_vector(osp, Abar, vdual, eps);
    auto slice_alpha = restricted_penalty(sp, aug.restricted[s], w, eps);
    for (int a = 0; a < sp.num_atoms(s); ++a) {
        int k = bi.of_cell(sp, s, sp.atom_states(s, a)[0]);
        if (!bar_alpha.atom(k).set_equals(slice_alpha.atom(a), eps * S(100))) return false;
    }
    return true;
}

// reverse tail identity: alpha_t(Q, w) = bar alpha_t(bar W_t(Q, w))_t
template <class S>
bool penalty_reverse_tail_check(const OptionalSpace<S>& osp,
                                const Augmented<S>& aug,
                                const ProcessDual<S>& pdual,
                                const S& eps) {
    const auto& sp = osp.base();
    const int t = aug.t();
    BarIndex<S> bi(osp, t);
    auto Abar = lift_acceptance(aug);
    auto vdual = map_dual_to_vector(osp, pdual, aug.rho.el, eps);
    auto bar_alpha = riskvec::penalty_vector(osp, Abar, vdual, eps);
    auto tail_alpha = riskproc::penalty_process(sp, aug.rho, pdual, eps);
    for (int a = 0; a < sp.num_atoms(t); ++a) {
        int k = bi.of_cell(sp, t, sp.atom_states(t, a)[0]);
        if (!bar_alpha.atom(k).set_equals(tail_alpha.atom(a), eps * S(100))) return false;
    }
    return true;
}

struct MaxDualReport {
    bool vector_side = false;   // (Qbar, wbar) in bar W_t^max for the lifted set
    bool slices_side = true;    // wbar_s in W_{R_s}^max for every s < t
    bool process_side = false;  // W_t(Qbar, wbar) in W_t^max for rho
    bool agree() const { return vector_side == (slices_side && process_side); }
};

// the coherent max-dual correspondence:
// bar W_t^max = {(Qbar, wbar) in bar W_t : wbar_s in W_{R_s}^max for all s < t,
//                W_t(Qbar, wbar) in W_t^max}
template <class S>
MaxDualReport max_dual_correspondence(const OptionalSpace<S>& osp,
                                      const Augmented<S>& aug,
                                      const VectorDual<S>& vdual,
                                      const S& eps) {
    const auto& sp = osp.base();
    const int t = aug.t(), d = aug.rho.el.d;
    MaxDualReport rep;
    rep.vector_side = riskvec::is_max_dual_vector(osp, lift_acceptance(aug), vdual, eps);
    for (int s = 0; s < t && rep.slices_side; ++s) {
        ProcessDual<S> slice;
        slice.t = s;
        slice.boundary = true;
        for (int r = s; r <= sp.horizon(); ++r) {
            slice.Q.push_back(VectorMeasure<S>::reference(sp, d));
            slice.w.push_back(r == s ? slice_direction(osp, vdual, s)
                                     : VecField<S>(sp.num_states(), zero_vec<S>(d)));
        }
        rep.slices_side = riskproc::is_max_dual_process(sp, aug.restricted[s], slice, eps);
    }
    auto pdual = map_dual_to_process(osp, vdual, aug.rho.el);
    rep.process_side = riskproc::is_max_dual_process(sp, aug.rho, pdual, eps);
    return rep;
}

// ---------------------------------------------------------------------------
// M = R^d simplification

// C_s := bar R_t(0)_s for s < t plus the process part rho_t; only valid when
// every asset is eligible.
template <class S>
struct FullEligible {
    std::vector<Polyhedron<S>> C;  // per past bar atom, bar R_t(0) there
    Augmented<S> aug;
};

template <class S>
FullEligible<S> full_eligible_simplify(const OptionalSpace<S>& osp,
                                       const VectorAcceptanceSet<S>& Abar,
                                       const S& eps) {
    if (Abar.el.m != Abar.el.d)
        throw std::invalid_argument("full-eligible simplification requires m = d");
    const auto& sp = osp.base();
    BarIndex<S> bi(osp, Abar.t);
    auto r0 = riskvec::rbar_eval(osp, Abar, AdaptedProcess<S>::zero(sp, Abar.el.d), eps);
    FullEligible<S> out;
    for (int k = 0; k < bi.count(); ++k)
        if (!bi.atom(k).frozen) out.C.push_back(r0.atom(k));
    out.aug = project_acceptance(Abar);
    return out;
}

// reconstruction bar R_t(X) = sum_{s<t} (-X_s + C_s) 1_s + rho_t(pi X) 1_{T_t}
template <class S>
ConditionalPolyhedron<S> full_eligible_eval(const OptionalSpace<S>& osp,
                                            const FullEligible<S>& fe,
                                            const AdaptedProcess<S>& X,
                                            const S& eps) {
    const auto& sp = osp.base();
    const int t = fe.aug.t(), d = fe.aug.rho.el.d;
    BarIndex<S> bi(osp, t);
    auto rho_part =
        riskproc::rho_eval(sp, fe.aug.rho, space::project_process(sp, X, t), eps);
    std::vector<Polyhedron<S>> atoms;
    int past = 0;
    for (int k = 0; k < bi.count(); ++k) {
        const auto& ba = bi.atom(k);
        if (ba.frozen) {
            atoms.push_back(rho_part.atom(ba.atom));
        } else {
            Vec<S> shift(d);
            int rep = sp.atom_states(ba.time, ba.atom)[0];
            for (int i = 0; i < d; ++i) shift[i] = -X.vals[ba.time][rep][i];
            atoms.push_back(fe.C[past++].translated(shift));
        }
    }
    return ConditionalPolyhedron<S>(t, std::move(atoms));
}

}  // namespace risktree::bridge
