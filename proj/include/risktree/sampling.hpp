#pragma once

#include "risktree/space.hpp"

#include <random>
#include <vector>

namespace risktree::sampling {

using space::AdaptedProcess;
using space::Field;
using space::OptionalMeasure;
using space::OptionalSpace;
using space::ScenarioSpace;
using space::VectorMeasure;

// Seeded generator producing values exactly representable in both scalar
// modes: every draw is an integer ratio routed through Num<S>::from_ratio,
// so float and rational runs see identical inputs.
template <class S>
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform on {lo/den, ..., hi/den}
    S ratio(long long lo, long long hi, long long den) {
        std::uniform_int_distribution<long long> d(lo, hi);
        return Num<S>::from_ratio(d(eng_), den);
    }

    // uniform in [lo, hi] with resolution 1/64
    S value(double lo, double hi) {
        auto l = static_cast<long long>(lo * 64.0);
        auto h = static_cast<long long>(hi * 64.0);
        return ratio(l, h, 64);
    }

    int index(int n) {
        std::uniform_int_distribution<int> d(0, n - 1);
        return d(eng_);
    }

    bool coin() { return index(2) == 0; }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

// Random bounded adapted process in R_{t0}^{infty,d}.
template <class S>
AdaptedProcess<S> random_process(const ScenarioSpace<S>& sp,
                                 Rng<S>& rng,
                                 int d,
                                 int start_time = 0,
                                 double amplitude = 4.0) {
    AdaptedProcess<S> X = AdaptedProcess<S>::zero(sp, d, start_time);
    for (int t = start_time; t <= sp.horizon(); ++t)
        for (int a = 0; a < sp.num_atoms(t); ++a) {
            Vec<S> v(d);
            for (int i = 0; i < d; ++i) v[i] = rng.value(-amplitude, amplitude);
            for (int w : sp.atom_states(t, a)) X.vals[t][w] = v;
        }
    return X;
}

// Random probability density on Omega (possibly with null states).
template <class S>
Field<S> random_density(const ScenarioSpace<S>& sp, Rng<S>& rng, bool allow_null = true) {
    const int n = sp.num_states();
    Field<S> mass(n);
    S total(0);
    for (int w = 0; w < n; ++w) {
        long long lo = allow_null ? 0 : 1;
        mass[w] = rng.ratio(lo, 8, 8);
        total += mass[w];
    }
    if (total == S(0)) mass[0] = total = S(1);
    Field<S> z(n);
    for (int w = 0; w < n; ++w) z[w] = mass[w] / total / sp.prob_of(w);
    return z;
}

// Random Q in M_t(P): Q = P on F_t, random below.
template <class S>
Field<S> random_density_Mt(const ScenarioSpace<S>& sp, Rng<S>& rng, int t, bool allow_null = true) {
    const int n = sp.num_states();
    Field<S> z(n, S(0));
    for (int a = 0; a < sp.num_atoms(t); ++a) {
        const auto& ws = sp.atom_states(t, a);
        S pa = sp.atom_prob(t, a);
        Field<S> mass(ws.size());
        S total(0);
        for (std::size_t k = 0; k < ws.size(); ++k) {
            long long lo = allow_null ? 0 : 1;
            mass[k] = rng.ratio(lo, 8, 8);
            total += mass[k];
        }
        if (total == S(0)) {
            mass[0] = S(1);
            total = S(1);
        }
        for (std::size_t k = 0; k < ws.size(); ++k)
            z[ws[k]] = mass[k] / total * pa / sp.prob_of(ws[k]);
    }
    return z;
}

template <class S>
VectorMeasure<S> random_vector_measure(const ScenarioSpace<S>& sp, Rng<S>& rng, int d, int t = -1) {
    VectorMeasure<S> q;
    for (int i = 0; i < d; ++i)
        q.densities.push_back(t < 0 ? random_density(sp, rng)
                                    : random_density_Mt(sp, rng, t));
    return q;
}

// Raw optional-measure cell weights (pathwise, psi need not be adapted).
template <class S>
std::vector<Field<S>> random_cell_weights(const ScenarioSpace<S>& sp, Rng<S>& rng) {
    const int T = sp.horizon(), n = sp.num_states();
    std::vector<Field<S>> w(T + 1, Field<S>(n));
    S total(0);
    for (int t = 0; t <= T; ++t)
        for (int s = 0; s < n; ++s) {
            w[t][s] = rng.ratio(0, 8, 8);
            total += w[t][s];
        }
    if (total == S(0)) w[0][0] = total = S(1);
    for (int t = 0; t <= T; ++t)
        for (int s = 0; s < n; ++s) w[t][s] /= total;
    return w;
}

// Adapted psi in Psi(P) via per-atom stopping probabilities: at each time
// t < T an F_t-measurable stop fraction p_t in [0,1), p_T = 1, and
// psi_t = p_t prod_{s<t}(1 - p_s).  Matches the displays that presuppose an
// adapted optional random measure.
template <class S>
std::vector<Field<S>> random_adapted_psi(const ScenarioSpace<S>& sp, Rng<S>& rng) {
    const int T = sp.horizon(), n = sp.num_states();
    std::vector<Field<S>> p(T + 1, Field<S>(n, S(1)));
    for (int t = 0; t < T; ++t)
        for (int a = 0; a < sp.num_atoms(t); ++a) {
            S v = rng.ratio(0, 7, 8);  // in [0, 7/8]
            for (int w : sp.atom_states(t, a)) p[t][w] = v;
        }
    std::vector<Field<S>> psi(T + 1, Field<S>(n));
    for (int w = 0; w < n; ++w) {
        S alive(1);
        for (int t = 0; t <= T; ++t) {
            psi[t][w] = p[t][w] * alive;
            alive *= S(1) - p[t][w];
        }
    }
    return psi;
}

// Optional measure with Q in M_t(P)-style marginal (or general), adapted psi,
// stored in normal form via decompose.
template <class S>
OptionalMeasure<S> random_optional_measure(const OptionalSpace<S>& osp,
                                           Rng<S>& rng,
                                           const S& eps,
                                           int t = -1,
                                           bool mt_preserving = false) {
    const auto& sp = osp.base();
    Field<S> z = t < 0 ? random_density(sp, rng) : random_density_Mt(sp, rng, t);
    Field<S> q(sp.num_states());
    for (int w = 0; w < sp.num_states(); ++w) q[w] = z[w] * sp.prob_of(w);
    auto psi = random_adapted_psi(sp, rng);
    if (mt_preserving && t > 0) {
        // force psi_s = mu_s for s < t, rescale the tail proportionally
        for (int w = 0; w < sp.num_states(); ++w) {
            S tail_psi(0), tail_mu(0);
            for (int s = t; s <= sp.horizon(); ++s) {
                tail_psi += psi[s][w];
                tail_mu += sp.mu(s, w);
            }
            for (int s = 0; s < t; ++s) psi[s][w] = sp.mu(s, w);
            for (int s = t; s <= sp.horizon(); ++s)
                psi[s][w] = tail_psi > S(0) ? psi[s][w] / tail_psi * tail_mu
                                            : sp.mu(s, w);
        }
    }
    return space::decompose(osp, space::compose(osp, q, psi, eps), eps);
}

}  // namespace risktree::sampling
