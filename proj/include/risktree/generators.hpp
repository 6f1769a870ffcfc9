#pragma once

#include "risktree/space.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace risktree {

// Coordinate of a process/optional-vector value: X_{time}(state)[asset].
struct Coord {
    int time = 0;
    int state = 0;
    int asset = 0;
};

// One linear acceptance constraint  sum_k c_k X[coord_k] >= offset.
template <class S>
struct Generator {
    std::vector<std::pair<Coord, S>> terms;
    S offset = S(0);
};

template <class S>
S eval_generator(const Generator<S>& g, const space::AdaptedProcess<S>& X) {
    S v(0);
    for (const auto& [c, coef] : g.terms) v += coef * X.vals[c.time][c.state][c.asset];
    return v;
}

// Column indexing for LPs over adapted-process unknowns: one variable per
// (time, F_time-atom, asset) with time in [t0, T].
template <class S>
class ProcessVars {
public:
    ProcessVars(const space::ScenarioSpace<S>& sp, int t0, int d)
        : sp_(&sp), t0_(t0), d_(d) {
        offsets_.assign(sp.horizon() + 1, -1);
        int n = 0;
        for (int t = t0; t <= sp.horizon(); ++t) {
            offsets_[t] = n;
            n += sp.num_atoms(t) * d;
        }
        count_ = n;
    }

    int count() const { return count_; }

    int index(int time, int state, int asset) const {
        if (time < t0_ || time > sp_->horizon())
            throw std::out_of_range("process variable before start time");
        return offsets_[time] + sp_->atom_of(time, state) * d_ + asset;
    }

    // constraint rows A x >= b from a generator list
    void rows(const std::vector<Generator<S>>& gens,
              std::vector<Vec<S>>& A,
              Vec<S>& b) const {
        A.clear();
        b.clear();
        for (const auto& g : gens) {
            Vec<S> row = zero_vec<S>(count_);
            for (const auto& [c, coef] : g.terms) row[index(c.time, c.state, c.asset)] += coef;
            A.push_back(std::move(row));
            b.push_back(g.offset);
        }
    }

private:
    const space::ScenarioSpace<S>* sp_;
    int t0_;
    int d_;
    int count_ = 0;
    std::vector<int> offsets_;
};

}  // namespace risktree
