#pragma once

#include "risktree/polyhedron.hpp"
#include "risktree/space.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace risktree::polyhedra {

// Eligible subspace M = R^m x {0}^(d-m) of the d asset dimensions.
struct EligibleStructure {
    int d = 1;
    int m = 1;

    void validate() const {
        if (m < 1 || m > d)
            throw std::invalid_argument("eligible structure requires 1 <= m <= d");
    }
};

// F_t-decomposable upper convex set in M_t: one polyhedron in the atom's
// R^m block per atom (F_t atoms or bar-F_t atoms, by index).
template <class S>
class ConditionalPolyhedron {
public:
    ConditionalPolyhedron() = default;
    ConditionalPolyhedron(int time, std::vector<Polyhedron<S>> atoms)
        : time_(time), atoms_(std::move(atoms)) {}

    static ConditionalPolyhedron full(int time, int num_atoms, int m) {
        return ConditionalPolyhedron(
            time, std::vector<Polyhedron<S>>(num_atoms, Polyhedron<S>::full(m)));
    }
    static ConditionalPolyhedron empty_set(int time, int num_atoms, int m) {
        return ConditionalPolyhedron(
            time, std::vector<Polyhedron<S>>(num_atoms, Polyhedron<S>::empty_set(m)));
    }

    int time() const { return time_; }
    int num_atoms() const { return static_cast<int>(atoms_.size()); }
    const Polyhedron<S>& atom(int a) const { return atoms_.at(a); }
    Polyhedron<S>& atom(int a) { return atoms_.at(a); }

    bool all_empty(const S& eps) const {
        for (const auto& p : atoms_)
            if (!p.is_empty(eps)) return false;
        return true;
    }

    bool any_empty(const S& eps) const {
        for (const auto& p : atoms_)
            if (p.is_empty(eps)) return true;
        return false;
    }

    ConditionalPolyhedron intersect(const ConditionalPolyhedron& other) const {
        check_shape(other);
        return map2(other, [](const Polyhedron<S>& a, const Polyhedron<S>& b, const S&) {
            return a.intersect(b);
        }, S(0));
    }

    ConditionalPolyhedron minkowski_sum(const ConditionalPolyhedron& other,
                                        const S& eps) const {
        check_shape(other);
        return map2(other, [](const Polyhedron<S>& a, const Polyhedron<S>& b, const S& e) {
            return a.minkowski_sum(b, e);
        }, eps);
    }

    ConditionalPolyhedron minkowski_diff(const ConditionalPolyhedron& other,
                                         const S& eps) const {
        check_shape(other);
        return map2(other, [](const Polyhedron<S>& a, const Polyhedron<S>& b, const S& e) {
            return a.minkowski_diff(b, e);
        }, eps);
    }

    // per-atom nonnegative scalar field lambda
    ConditionalPolyhedron scaled(const Vec<S>& lambda) const {
        if (static_cast<int>(lambda.size()) != num_atoms())
            throw std::invalid_argument("scaled: one factor per atom required");
        ConditionalPolyhedron out(time_, atoms_);
        for (int a = 0; a < num_atoms(); ++a) out.atoms_[a] = atoms_[a].scaled(lambda[a]);
        return out;
    }

    // per-atom translation vectors
    ConditionalPolyhedron translated(const std::vector<Vec<S>>& v) const {
        if (static_cast<int>(v.size()) != num_atoms())
            throw std::invalid_argument("translated: one vector per atom required");
        ConditionalPolyhedron out(time_, atoms_);
        for (int a = 0; a < num_atoms(); ++a) out.atoms_[a] = atoms_[a].translated(v[a]);
        return out;
    }

    bool subset_of(const ConditionalPolyhedron& other, const S& eps) const {
        check_shape(other);
        for (int a = 0; a < num_atoms(); ++a)
            if (!atoms_[a].subset_of(other.atoms_[a], eps)) return false;
        return true;
    }

    bool set_equals(const ConditionalPolyhedron& other, const S& eps) const {
        return subset_of(other, eps) && other.subset_of(*this, eps);
    }

    bool contains(const std::vector<Vec<S>>& x, const S& eps) const {
        if (static_cast<int>(x.size()) != num_atoms())
            throw std::invalid_argument("contains: one point per atom required");
        for (int a = 0; a < num_atoms(); ++a)
            if (!atoms_[a].contains(x[a], eps)) return false;
        return true;
    }

    bool is_upper(const S& eps) const {
        for (const auto& p : atoms_)
            if (!p.is_upper(eps)) return false;
        return true;
    }

    ConditionalPolyhedron canonicalized(const S& eps) const {
        ConditionalPolyhedron out(time_, atoms_);
        for (auto& p : out.atoms_) p = p.canonicalized(eps);
        return out;
    }

private:
    int time_ = 0;
    std::vector<Polyhedron<S>> atoms_;

    void check_shape(const ConditionalPolyhedron& other) const {
        if (other.time_ != time_ || other.atoms_.size() != atoms_.size())
            throw std::invalid_argument("conditional polyhedron shape mismatch");
    }

    template <class F>
    ConditionalPolyhedron map2(const ConditionalPolyhedron& other, F f, const S& eps) const {
        ConditionalPolyhedron out(time_, atoms_);
        for (int a = 0; a < num_atoms(); ++a)
            out.atoms_[a] = f(atoms_[a], other.atoms_[a], eps);
        return out;
    }
};

// F_t-measurable dual direction: a d-vector per atom.
template <class S>
struct DualDirection {
    int time = 0;
    std::vector<Vec<S>> w;  // [atom] -> d components

    // membership in M_{t,+}^*: the M-projection is >= 0 on every atom
    bool in_M_dual_cone(const EligibleStructure& el, const S& eps) const {
        for (const auto& v : w)
            for (int i = 0; i < el.m; ++i)
                if (v[i] < -eps) return false;
        return true;
    }

    // membership in M_t^perp: M-projection vanishes on every atom
    bool in_M_perp(const EligibleStructure& el, const S& eps) const {
        for (const auto& v : w)
            for (int i = 0; i < el.m; ++i)
                if (Num<S>::abs(v[i]) > eps) return false;
        return true;
    }
};

// Gamma_t(w) intersected with M_t: per atom the halfspace
// {x in R^m : sum_{i<m} w_i x_i >= 0} (the tail components of w pair to zero
// against M).  Atoms whose M-projection vanishes contribute the full block.
template <class S>
ConditionalPolyhedron<S> gamma_set(const DualDirection<S>& w, const EligibleStructure& el) {
    el.validate();
    bool nonzero = false;
    for (const auto& v : w.w)
        if (!is_zero_vec(v)) nonzero = true;
    if (!nonzero) throw std::invalid_argument("gamma_set: degenerate zero direction");
    std::vector<Polyhedron<S>> atoms;
    for (const auto& v : w.w) {
        Vec<S> a(v.begin(), v.begin() + el.m);
        if (is_zero_vec(a)) {
            atoms.push_back(Polyhedron<S>::full(el.m));
        } else {
            Polyhedron<S> p(el.m);
            p.add_halfspace(std::move(a), S(0));
            atoms.push_back(std::move(p));
        }
    }
    return ConditionalPolyhedron<S>(w.time, std::move(atoms));
}

}  // namespace risktree::polyhedra
