#pragma once

#include "risktree/numeric.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace risktree::space {

// Scalar random variable on Omega, one value per terminal state.
template <class S>
using Field = Vec<S>;

// R^d-valued random variable on Omega: per state, a d-vector.
template <class S>
using VecField = std::vector<Vec<S>>;

// Finite filtered probability space on a scenario tree with horizon T,
// reference measure P (full support) and adapted weight process mu with
// sum_t mu_t = 1 pathwise.
template <class S>
class ScenarioSpace {
public:
    ScenarioSpace(int T,
                  std::vector<std::string> state_names,
                  std::vector<std::vector<std::vector<int>>> partitions,
                  Vec<S> prob,
                  std::vector<Vec<S>> mu = {})
        : T_(T),
          names_(std::move(state_names)),
          partitions_(std::move(partitions)),
          prob_(std::move(prob)),
          mu_(std::move(mu)) {
        n_ = static_cast<int>(names_.size());
        if (mu_.empty()) {
            // default: uniform weight 1/(T+1) at every time
            S u = S(1) / S(T_ + 1);
            mu_.assign(static_cast<std::size_t>(T_) + 1, Vec<S>(n_, u));
        }
        validate();
        index_atoms();
    }

    int horizon() const { return T_; }
    int num_states() const { return n_; }
    const std::vector<std::string>& state_names() const { return names_; }
    const Vec<S>& prob() const { return prob_; }
    const S& prob_of(int state) const { return prob_[state]; }
    const S& mu(int t, int state) const { return mu_[t][state]; }

    int num_atoms(int t) const { return static_cast<int>(partitions_[t].size()); }
    const std::vector<int>& atom_states(int t, int a) const { return partitions_[t][a]; }
    int atom_of(int t, int state) const { return atom_index_[t][state]; }

    S atom_prob(int t, int a) const {
        S p(0);
        for (int w : partitions_[t][a]) p += prob_[w];
        return p;
    }

    // E_t[x] for an F_T-measurable scalar field, returned per state.
    Field<S> cond_exp(const Field<S>& x, int t) const {
        check_time(t);
        Field<S> out(n_, S(0));
        for (int a = 0; a < num_atoms(t); ++a) {
            S num(0), den(0);
            for (int w : partitions_[t][a]) {
                num += prob_[w] * x[w];
                den += prob_[w];
            }
            S v = num / den;
            for (int w : partitions_[t][a]) out[w] = v;
        }
        return out;
    }

    S expectation(const Field<S>& x) const {
        S v(0);
        for (int w = 0; w < n_; ++w) v += prob_[w] * x[w];
        return v;
    }

    bool is_adapted(const Field<S>& x, int t, const S& eps) const {
        for (int a = 0; a < num_atoms(t); ++a) {
            const auto& ws = partitions_[t][a];
            for (std::size_t k = 1; k < ws.size(); ++k)
                if (Num<S>::abs(x[ws[k]] - x[ws[0]]) > eps) return false;
        }
        return true;
    }

    void check_time(int t) const {
        if (t < 0 || t > T_) throw std::out_of_range("time index out of range");
    }

private:
    int T_;
    int n_;
    std::vector<std::string> names_;
    std::vector<std::vector<std::vector<int>>> partitions_;
    Vec<S> prob_;
    std::vector<Vec<S>> mu_;
    std::vector<std::vector<int>> atom_index_;  // [t][state] -> atom

    void validate() const {
        if (T_ < 1) throw std::invalid_argument("horizon must be >= 1");
        if (static_cast<int>(prob_.size()) != n_ || static_cast<int>(mu_.size()) != T_ + 1 ||
            static_cast<int>(partitions_.size()) != T_ + 1)
            throw std::invalid_argument("scenario space: inconsistent sizes");
        S total(0);
        for (const S& p : prob_) {
            if (p <= S(0)) throw std::invalid_argument("P must have full support");
            total += p;
        }
        if (total != S(1) && std::abs(Num<S>::to_double(total) - 1.0) > 1e-9)
            throw std::invalid_argument("P does not sum to 1");
        // partitions: each time covers all states exactly once
        for (int t = 0; t <= T_; ++t) {
            std::vector<int> seen(n_, 0);
            for (const auto& atom : partitions_[t]) {
                if (atom.empty()) throw std::invalid_argument("empty atom");
                for (int w : atom) {
                    if (w < 0 || w >= n_ || seen[w]++)
                        throw std::invalid_argument("partition is not a partition");
                }
            }
            for (int w = 0; w < n_; ++w)
                if (!seen[w]) throw std::invalid_argument("partition misses a state");
        }
        if (partitions_[0].size() != 1)
            throw std::invalid_argument("F_0 must be trivial");
        if (static_cast<int>(partitions_[T_].size()) != n_)
            throw std::invalid_argument("F_T must separate states");
        // refinement: every F_{t+1}-atom inside an F_t-atom
        for (int t = 0; t + 1 <= T_; ++t) {
            for (const auto& atom : partitions_[t + 1]) {
                for (const auto& coarse : partitions_[t]) {
                    bool first_in =
                        std::find(coarse.begin(), coarse.end(), atom[0]) != coarse.end();
                    if (!first_in) continue;
                    for (int w : atom)
                        if (std::find(coarse.begin(), coarse.end(), w) == coarse.end())
                            throw std::invalid_argument("partitions do not refine");
                }
            }
        }
        // mu: positive, adapted, sums to 1 along every path
        for (int w = 0; w < n_; ++w) {
            S s(0);
            for (int t = 0; t <= T_; ++t) {
                if (mu_[t][w] <= S(0)) throw std::invalid_argument("mu must be positive");
                s += mu_[t][w];
            }
            if (s != S(1) && std::abs(Num<S>::to_double(s) - 1.0) > 1e-9)
                throw std::invalid_argument("mu does not sum to 1 pathwise");
        }
        for (int t = 0; t <= T_; ++t) {
            for (const auto& atom : partitions_[t])
                for (std::size_t k = 1; k < atom.size(); ++k)
                    if (mu_[t][atom[k]] != mu_[t][atom[0]])
                        throw std::invalid_argument("mu is not adapted");
        }
    }

    void index_atoms() {
        atom_index_.assign(static_cast<std::size_t>(T_) + 1, std::vector<int>(n_, -1));
        for (int t = 0; t <= T_; ++t)
            for (int a = 0; a < num_atoms(t); ++a)
                for (int w : partitions_[t][a]) atom_index_[t][w] = a;
    }
};

// d-dimensional adapted process; vals[t][state] is the d-vector X_t(state).
// Elements of R_t^{infty,d} carry start_time t and vanish before it.  The
// same storage represents elements of bar L^infty on the optional space
// (slice X_t is F_t-measurable there too).
template <class S>
struct AdaptedProcess {
    int d = 1;
    int start_time = 0;
    std::vector<VecField<S>> vals;  // [t][state] -> d components

    static AdaptedProcess zero(const ScenarioSpace<S>& sp, int d, int start_time = 0) {
        AdaptedProcess p;
        p.d = d;
        p.start_time = start_time;
        p.vals.assign(static_cast<std::size_t>(sp.horizon()) + 1,
                      VecField<S>(sp.num_states(), zero_vec<S>(d)));
        return p;
    }

    const Vec<S>& at(int t, int state) const { return vals[t][state]; }
    Vec<S>& at(int t, int state) { return vals[t][state]; }

    bool is_adapted(const ScenarioSpace<S>& sp, const S& eps) const {
        for (int t = 0; t <= sp.horizon(); ++t)
            for (int a = 0; a < sp.num_atoms(t); ++a) {
                const auto& ws = sp.atom_states(t, a);
                for (std::size_t k = 1; k < ws.size(); ++k)
                    for (int i = 0; i < d; ++i)
                        if (Num<S>::abs(vals[t][ws[k]][i] - vals[t][ws[0]][i]) > eps)
                            return false;
            }
        return true;
    }
};

// Projection pi_{t,T}: zero before t, frozen cumulative value after (values
// at times >= t are kept as-is since X is cumulative).
template <class S>
AdaptedProcess<S> project_process(const ScenarioSpace<S>& sp, const AdaptedProcess<S>& X, int t) {
    AdaptedProcess<S> out = X;
    out.start_time = t;
    for (int s = 0; s < t; ++s)
        for (int w = 0; w < sp.num_states(); ++w) out.vals[s][w] = zero_vec<S>(X.d);
    return out;
}

// d-vector of measures on Omega given by densities dQ_i/dP per state.
template <class S>
struct VectorMeasure {
    std::vector<Field<S>> densities;  // [i][state]

    int dim() const { return static_cast<int>(densities.size()); }

    static VectorMeasure reference(const ScenarioSpace<S>& sp, int d) {
        VectorMeasure q;
        q.densities.assign(d, Field<S>(sp.num_states(), S(1)));
        return q;
    }

    void validate(const ScenarioSpace<S>& sp, const S& eps) const {
        for (const auto& z : densities) {
            if (static_cast<int>(z.size()) != sp.num_states())
                throw std::invalid_argument("density size mismatch");
            S e(0);
            for (int w = 0; w < sp.num_states(); ++w) {
                if (z[w] < S(0)) throw std::invalid_argument("negative density");
                e += sp.prob_of(w) * z[w];
            }
            if (Num<S>::abs(e - S(1)) > eps)
                throw std::invalid_argument("density does not integrate to 1");
        }
    }
};

// xi_{t,s}(Q): E_s[dQ/dP]/E_t[dQ/dP] on {E_t > 0}, and 1 otherwise.
template <class S>
Field<S> xi(const ScenarioSpace<S>& sp, const Field<S>& density, int t, int s) {
    sp.check_time(t);
    sp.check_time(s);
    if (t > s) throw std::invalid_argument("xi requires t <= s");
    Field<S> et = sp.cond_exp(density, t);
    Field<S> es = sp.cond_exp(density, s);
    Field<S> out(sp.num_states(), S(1));
    for (int w = 0; w < sp.num_states(); ++w)
        if (et[w] > S(0)) out[w] = es[w] / et[w];
    return out;
}

// E_t^Q[X] = E_t[xi_{t,T}(Q) X] componentwise (Q_i applied to coordinate i).
template <class S>
VecField<S> cond_expectation(const ScenarioSpace<S>& sp,
                             const VecField<S>& X,
                             const VectorMeasure<S>& Q,
                             int t) {
    const int d = Q.dim();
    VecField<S> out(sp.num_states(), zero_vec<S>(d));
    for (int i = 0; i < d; ++i) {
        Field<S> f = xi(sp, Q.densities[i], t, sp.horizon());
        for (int w = 0; w < sp.num_states(); ++w) f[w] *= X[w][i];
        Field<S> e = sp.cond_exp(f, t);
        for (int w = 0; w < sp.num_states(); ++w) out[w][i] = e[w];
    }
    return out;
}

// w_t^s(Q, w) = diag(w) xi_{t,s}(Q); w itself when s = t.
template <class S>
VecField<S> w_map(const ScenarioSpace<S>& sp,
                  const VectorMeasure<S>& Q,
                  const VecField<S>& w,
                  int t,
                  int s) {
    if (s == t) return w;
    const int d = Q.dim();
    VecField<S> out(sp.num_states(), zero_vec<S>(d));
    for (int i = 0; i < d; ++i) {
        Field<S> x = xi(sp, Q.densities[i], t, s);
        for (int st = 0; st < sp.num_states(); ++st) out[st][i] = w[st][i] * x[st];
    }
    return out;
}

// tau(Q): per state, the first time the conditional density vanishes on the
// state's atom (sentinel T+1 when it never does).
template <class S>
std::vector<int> stopping_time(const ScenarioSpace<S>& sp, const Field<S>& density) {
    std::vector<int> tau(sp.num_states(), sp.horizon() + 1);
    for (int t = 0; t <= sp.horizon(); ++t) {
        Field<S> et = sp.cond_exp(density, t);
        for (int w = 0; w < sp.num_states(); ++w)
            if (tau[w] > sp.horizon() && et[w] == S(0)) tau[w] = t;
    }
    return tau;
}

// Measure on the optional space Omega x T, stored in decomposed normal form
// Qbar = Q (x) psi-hat: per-state masses q and the per-(time,state) weights
// psi (psi-hat rewrite of the decomposition applied at construction).
template <class S>
struct OptionalMeasure {
    Field<S> q;                  // Q({state}) masses, sum 1
    std::vector<Field<S>> psi;   // [t][state], rows sum to 1 per state

    Field<S> density(const ScenarioSpace<S>& sp) const {
        Field<S> z(sp.num_states());
        for (int w = 0; w < sp.num_states(); ++w) z[w] = q[w] / sp.prob_of(w);
        return z;
    }

    // raw cell weights q(state) * psi_t(state)
    std::vector<Field<S>> cell_weights(const ScenarioSpace<S>& sp) const {
        std::vector<Field<S>> out(sp.horizon() + 1, Field<S>(sp.num_states()));
        for (int t = 0; t <= sp.horizon(); ++t)
            for (int w = 0; w < sp.num_states(); ++w) out[t][w] = q[w] * psi[t][w];
        return out;
    }
};

// The optional filtration over a scenario space: bar Omega = Omega x T,
// bar F_t atoms are the realized past slices (r, F_r-atom) for r < t plus
// the frozen blocks (F_t-atom) x T_t; bar P = P (x) mu.
template <class S>
class OptionalSpace {
public:
    struct BarAtom {
        int time;     // r for past slices; t for frozen blocks
        int atom;     // atom index in F_time
        bool frozen;  // true for the D_t x T_t blocks
    };

    explicit OptionalSpace(ScenarioSpace<S> base) : sp_(std::move(base)) {}

    const ScenarioSpace<S>& base() const { return sp_; }

    std::vector<BarAtom> bar_atoms(int t) const {
        sp_.check_time(t);
        std::vector<BarAtom> out;
        for (int r = 0; r < t; ++r)
            for (int a = 0; a < sp_.num_atoms(r); ++a) out.push_back({r, a, false});
        for (int a = 0; a < sp_.num_atoms(t); ++a) out.push_back({t, a, true});
        return out;
    }

    // bar P mass of a bar atom
    S bar_atom_prob(const BarAtom& ba) const {
        S p(0);
        if (!ba.frozen) {
            for (int w : sp_.atom_states(ba.time, ba.atom))
                p += sp_.prob_of(w) * sp_.mu(ba.time, w);
        } else {
            for (int w : sp_.atom_states(ba.time, ba.atom))
                for (int t = ba.time; t <= sp_.horizon(); ++t)
                    p += sp_.prob_of(w) * sp_.mu(t, w);
        }
        return p;
    }

    // bar E[X] = E[sum_t mu_t X_t] componentwise
    Vec<S> bar_expectation(const AdaptedProcess<S>& X) const {
        Vec<S> out = zero_vec<S>(X.d);
        for (int t = 0; t <= sp_.horizon(); ++t)
            for (int w = 0; w < sp_.num_states(); ++w)
                for (int i = 0; i < X.d; ++i)
                    out[i] += sp_.prob_of(w) * sp_.mu(t, w) * X.vals[t][w][i];
        return out;
    }

    // pairing bar E^{Qbar}[X] for scalar component i of X
    S pair(const OptionalMeasure<S>& qb, const AdaptedProcess<S>& X, int i = 0) const {
        S out(0);
        for (int t = 0; t <= sp_.horizon(); ++t)
            for (int w = 0; w < sp_.num_states(); ++w)
                out += qb.q[w] * qb.psi[t][w] * X.vals[t][w][i];
        return out;
    }

private:
    ScenarioSpace<S> sp_;
};

// Decomposition Qbar = Q (x) psi-hat from raw nonnegative cell weights
// weights[t][state] summing to 1.  psi is replaced by its normal form: kept
// before tau(Q) and proportional to mu from tau(Q) on (mu itself on Q-null
// paths).
template <class S>
OptionalMeasure<S> decompose(const OptionalSpace<S>& osp,
                             const std::vector<Field<S>>& weights,
                             const S& eps) {
    const auto& sp = osp.base();
    const int T = sp.horizon(), n = sp.num_states();
    if (static_cast<int>(weights.size()) != T + 1)
        throw std::invalid_argument("weights: wrong number of time slices");
    S total(0);
    for (const auto& row : weights) {
        if (static_cast<int>(row.size()) != n)
            throw std::invalid_argument("weights: wrong slice size");
        for (const S& v : row) {
            if (v < S(0)) throw std::invalid_argument("negative optional weight");
            total += v;
        }
    }
    if (Num<S>::abs(total - S(1)) > eps)
        throw std::invalid_argument("optional weights do not sum to 1");

    OptionalMeasure<S> out;
    out.q.assign(n, S(0));
    for (int w = 0; w < n; ++w)
        for (int t = 0; t <= T; ++t) out.q[w] += weights[t][w];

    std::vector<int> tau = stopping_time(sp, out.density(sp));
    out.psi.assign(T + 1, Field<S>(n, S(0)));
    for (int w = 0; w < n; ++w) {
        // raw psi where defined; mu on Q-null states
        Field<S> raw(T + 1);
        for (int t = 0; t <= T; ++t)
            raw[t] = out.q[w] > S(0) ? weights[t][w] / out.q[w] : sp.mu(t, w);
        // psi-hat rewrite from tau onward
        S mu_pre(0), psi_pre(0);
        for (int t = 0; t < tau[w] && t <= T; ++t) {
            mu_pre += sp.mu(t, w);
            psi_pre += raw[t];
        }
        for (int t = 0; t <= T; ++t) {
            if (t < tau[w])
                out.psi[t][w] = raw[t];
            else
                out.psi[t][w] = sp.mu(t, w) / (S(1) - mu_pre) * (S(1) - psi_pre);
        }
    }
    return out;
}

// Decomposition Qbar = Q (x) psi with psi adapted (psi_s measurable w.r.t.
// F_s), via the randomized-stopping-time construction: aggregate the cell
// masses per (s, F_s-atom), stop the surviving mass at s with the conditional
// fraction h_s = m_s / S_s, and spread the terminal mass P-conditionally
// within the last atoms.  Represents the same measure on the optional
// sigma-algebra as `decompose` (only atom aggregates are observable) but in
// the normal form the dual-variable formulas require.
template <class S>
OptionalMeasure<S> adapted_decompose(const OptionalSpace<S>& osp,
                                     const std::vector<Field<S>>& weights) {
    const auto& sp = osp.base();
    const int T = sp.horizon(), n = sp.num_states();
    if (static_cast<int>(weights.size()) != T + 1)
        throw std::invalid_argument("weights: wrong number of time slices");
    for (const auto& row : weights) {
        if (static_cast<int>(row.size()) != n)
            throw std::invalid_argument("weights: wrong slice size");
        for (const S& v : row)
            if (v < S(0)) throw std::invalid_argument("negative optional weight");
    }
    // m[s][a]: slice-s mass on the F_s-atom a; S[s][a]: mass surviving into s
    std::vector<std::vector<S>> slice_mass(T + 1), surviving(T + 1);
    for (int s = 0; s <= T; ++s) {
        slice_mass[s].assign(sp.num_atoms(s), S(0));
        surviving[s].assign(sp.num_atoms(s), S(0));
        for (int a = 0; a < sp.num_atoms(s); ++a)
            for (int w : sp.atom_states(s, a)) {
                slice_mass[s][a] += weights[s][w];
                for (int r = s; r <= T; ++r) surviving[s][a] += weights[r][w];
            }
    }
    OptionalMeasure<S> out;
    out.q.assign(n, S(0));
    out.psi.assign(T + 1, Field<S>(n, S(0)));
    for (int w = 0; w < n; ++w) {
        S surv(1);
        for (int s = 0; s <= T; ++s) {
            int a = sp.atom_of(s, w);
            S h = surviving[s][a] > S(0) ? slice_mass[s][a] / surviving[s][a] : S(1);
            out.psi[s][w] = surv * h;
            surv *= S(1) - h;
        }
    }
    // path masses top-down: each atom's mass splits over its children in
    // proportion to the mass surviving into them, P-conditionally once the
    // measure has stopped for good
    std::vector<S> atom_mass(1, surviving[0][0]);
    for (int s = 0; s + 1 <= T; ++s) {
        std::vector<S> next(sp.num_atoms(s + 1), S(0));
        for (int b = 0; b < sp.num_atoms(s + 1); ++b) {
            int w0 = sp.atom_states(s + 1, b)[0];
            int a = sp.atom_of(s, w0);
            S rem = surviving[s][a] - slice_mass[s][a];
            if (rem > S(0)) {
                next[b] = atom_mass[a] * surviving[s + 1][b] / rem;
            } else {
                S pb(0), pa(0);
                for (int v : sp.atom_states(s + 1, b)) pb += sp.prob_of(v);
                for (int v : sp.atom_states(s, a)) pa += sp.prob_of(v);
                next[b] = atom_mass[a] * pb / pa;
            }
        }
        atom_mass = std::move(next);
    }
    for (int w = 0; w < n; ++w) out.q[w] = atom_mass[sp.atom_of(T, w)];
    // psi-hat rewrite on and after tau(Q) exactly as in `decompose`
    std::vector<int> tau = stopping_time(sp, out.density(sp));
    for (int w = 0; w < n; ++w) {
        S mu_pre(0), psi_pre(0);
        for (int t = 0; t < tau[w] && t <= T; ++t) {
            mu_pre += sp.mu(t, w);
            psi_pre += out.psi[t][w];
        }
        for (int t = 0; t <= T; ++t)
            if (t >= tau[w])
                out.psi[t][w] = sp.mu(t, w) / (S(1) - mu_pre) * (S(1) - psi_pre);
    }
    return out;
}

// Qbar = Q (x) psi from masses q and row-stochastic psi; returns the raw
// cell-weight matrix.  decompose(compose(q, psi-hat)) round-trips on normal
// forms.
template <class S>
std::vector<Field<S>> compose(const OptionalSpace<S>& osp,
                              const Field<S>& q,
                              const std::vector<Field<S>>& psi,
                              const S& eps) {
    const auto& sp = osp.base();
    const int T = sp.horizon(), n = sp.num_states();
    for (int w = 0; w < n; ++w) {
        S row(0);
        for (int t = 0; t <= T; ++t) {
            if (psi[t][w] < S(0)) throw std::invalid_argument("negative psi");
            row += psi[t][w];
        }
        if (Num<S>::abs(row - S(1)) > eps)
            throw std::invalid_argument("psi rows must sum to 1");
    }
    std::vector<Field<S>> weights(T + 1, Field<S>(n));
    for (int t = 0; t <= T; ++t)
        for (int w = 0; w < n; ++w) weights[t][w] = q[w] * psi[t][w];
    return weights;
}

// Membership in bar M_t(bar P): Q = P on F_t and psi_s = mu_s for s < t.
template <class S>
bool is_Mt_preserving(const OptionalSpace<S>& osp,
                      const OptionalMeasure<S>& qb,
                      int t,
                      const S& eps) {
    const auto& sp = osp.base();
    sp.check_time(t);
    for (int a = 0; a < sp.num_atoms(t); ++a) {
        S qm(0), pm(0);
        for (int w : sp.atom_states(t, a)) {
            qm += qb.q[w];
            pm += sp.prob_of(w);
        }
        if (Num<S>::abs(qm - pm) > eps) return false;
    }
    for (int s = 0; s < t; ++s)
        for (int w = 0; w < sp.num_states(); ++w)
            if (Num<S>::abs(qb.psi[s][w] - sp.mu(s, w)) > eps) return false;
    return true;
}

// bar xi_{t,s}(Qbar)_r per (r, state), from the closed-form display in terms
// of the decomposition (Q, psi-hat):
//   r in [t,s), sum_{tau<t} psi_tau < 1:
//       ((1 - sum_{tau<t} mu_tau)/mu_r) (psi_r/(1 - sum_{tau<t} psi_tau)) xi_{t,r}(Q)
//   r >= s, same condition:
//       ((1 - sum mu)/(sum_{tau>=s} mu_tau)) ((sum_{tau>=s} psi_tau)/(1 - sum psi)) xi_{t,s}(Q)
//   1 otherwise (in particular on past slices r < t).
template <class S>
std::vector<Field<S>> xi_bar(const OptionalSpace<S>& osp,
                             const OptionalMeasure<S>& qb,
                             int t,
                             int s) {
    const auto& sp = osp.base();
    sp.check_time(t);
    sp.check_time(s);
    if (t > s) throw std::invalid_argument("xi_bar requires t <= s");
    const int T = sp.horizon(), n = sp.num_states();
    // the display reads psi pathwise, which is only meaningful for the
    // adapted normal form of the decomposition; canonicalize first
    OptionalMeasure<S> ad = adapted_decompose(osp, qb.cell_weights(sp));
    Field<S> z = ad.density(sp);
    std::vector<Field<S>> out(T + 1, Field<S>(n, S(1)));
    std::vector<Field<S>> xi_tr(T + 1);
    for (int r = t; r <= s; ++r) xi_tr[r] = xi(sp, z, t, r);
    for (int w = 0; w < n; ++w) {
        S mu_pre(0), psi_pre(0);
        for (int r = 0; r < t; ++r) {
            mu_pre += sp.mu(r, w);
            psi_pre += ad.psi[r][w];
        }
        if (psi_pre >= S(1)) continue;  // all-ones branch
        S mu_tail(0), psi_tail(0);
        for (int r = s; r <= T; ++r) {
            mu_tail += sp.mu(r, w);
            psi_tail += ad.psi[r][w];
        }
        for (int r = t; r < s; ++r)
            out[r][w] = (S(1) - mu_pre) / sp.mu(r, w) * ad.psi[r][w] / (S(1) - psi_pre) *
                        xi_tr[r][w];
        for (int r = s; r <= T; ++r)
            out[r][w] = (S(1) - mu_pre) / mu_tail * psi_tail / (S(1) - psi_pre) * xi_tr[s][w];
    }
    return out;
}

// bar E_t^{Qbar}[X]: past slices keep X_s; the frozen block carries the
// psi-weighted Q-conditional average with the mu-average fallback on
// {sum_{r<t} psi_r = 1}.  Componentwise with one optional measure per
// coordinate.
template <class S>
AdaptedProcess<S> bar_cond_expectation(const OptionalSpace<S>& osp,
                                       const AdaptedProcess<S>& X,
                                       const std::vector<OptionalMeasure<S>>& qbars,
                                       int t) {
    const auto& sp = osp.base();
    sp.check_time(t);
    if (static_cast<int>(qbars.size()) != X.d)
        throw std::invalid_argument("need one optional measure per coordinate");
    const int T = sp.horizon(), n = sp.num_states();
    AdaptedProcess<S> out = AdaptedProcess<S>::zero(sp, X.d);
    for (int r = 0; r < t; ++r) out.vals[r] = X.vals[r];
    for (int i = 0; i < X.d; ++i) {
        // pathwise psi reads require the adapted normal form
        OptionalMeasure<S> qb = adapted_decompose(osp, qbars[i].cell_weights(sp));
        Field<S> z = qb.density(sp);
        // pathwise inner integrands for both branches
        Field<S> inner_q(n, S(0)), inner_mu(n, S(0));
        Field<S> psi_pre(n, S(0)), mu_pre(n, S(0));
        for (int w = 0; w < n; ++w) {
            for (int r = 0; r < t; ++r) {
                psi_pre[w] += qb.psi[r][w];
                mu_pre[w] += sp.mu(r, w);
            }
            for (int s = t; s <= T; ++s) {
                if (psi_pre[w] < S(1))
                    inner_q[w] += qb.psi[s][w] / (S(1) - psi_pre[w]) * X.vals[s][w][i];
                inner_mu[w] += sp.mu(s, w) / (S(1) - mu_pre[w]) * X.vals[s][w][i];
            }
        }
        Field<S> xi_tT = xi(sp, z, t, T);
        for (int w = 0; w < n; ++w) inner_q[w] *= xi_tT[w];
        Field<S> eq = sp.cond_exp(inner_q, t);
        Field<S> em = sp.cond_exp(inner_mu, t);
        for (int w = 0; w < n; ++w) {
            S v = psi_pre[w] < S(1) ? eq[w] : em[w];
            for (int r = t; r <= T; ++r) out.vals[r][w][i] = v;
        }
    }
    return out;
}

template <class S>
AdaptedProcess<S> bar_cond_expectation(const OptionalSpace<S>& osp,
                                       const AdaptedProcess<S>& X,
                                       const OptionalMeasure<S>& qb,
                                       int t) {
    return bar_cond_expectation(osp, X, std::vector<OptionalMeasure<S>>(X.d, qb), t);
}

// bar w_t^s(Qbar, wbar): past slices keep wbar_r; on [t, s) each slice is
// diag(wbar_t) barxi_{t,s}(Qbar)_r, frozen at barxi_{t,s}(Qbar)_s from s on.
template <class S>
AdaptedProcess<S> bar_w_map(const OptionalSpace<S>& osp,
                            const std::vector<OptionalMeasure<S>>& qbars,
                            const AdaptedProcess<S>& wbar,
                            int t,
                            int s) {
    const auto& sp = osp.base();
    sp.check_time(t);
    sp.check_time(s);
    if (t > s) throw std::invalid_argument("bar_w_map requires t <= s");
    if (s == t) return wbar;
    if (static_cast<int>(qbars.size()) != wbar.d)
        throw std::invalid_argument("need one optional measure per coordinate");
    const int T = sp.horizon(), n = sp.num_states();
    AdaptedProcess<S> out = AdaptedProcess<S>::zero(sp, wbar.d);
    for (int r = 0; r < t; ++r) out.vals[r] = wbar.vals[r];
    for (int i = 0; i < wbar.d; ++i) {
        auto xb = xi_bar(osp, qbars[i], t, s);
        for (int w = 0; w < n; ++w) {
            for (int r = t; r < s; ++r)
                out.vals[r][w][i] = wbar.vals[t][w][i] * xb[r][w];
            for (int r = s; r <= T; ++r)
                out.vals[r][w][i] = wbar.vals[t][w][i] * xb[s][w];
        }
    }
    return out;
}

}  // namespace risktree::space
