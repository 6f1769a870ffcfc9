#pragma once

#include "risktree/numeric.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace risktree {

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <class S>
struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    S objective = S(0);
    Vec<S> x;  // a minimizer when status == Optimal
};

// Dense two-phase simplex for
//     min c.x   s.t.  A x >= b,   x free,
// with Bland's rule (deterministic, cycle-free).  Free variables are split
// into positive and negative parts internally.  `eps` is the pivot/zero
// tolerance; pass S(0) in exact-rational mode.
template <class S>
class SimplexSolver {
public:
    explicit SimplexSolver(S eps) : eps_(std::move(eps)) {}

    LpResult<S> solve(const Vec<S>& c,
                      const std::vector<Vec<S>>& A,
                      const Vec<S>& b) const {
        const std::size_t n = c.size();
        const std::size_t m = A.size();
        // columns: [u_0..u_{n-1}, v_0..v_{n-1}, slack_0..slack_{m-1}, art...]
        const std::size_t nu = 2 * n;
        const std::size_t ns = m;
        const std::size_t na = m;
        const std::size_t cols = nu + ns + na;

        // rows in equality form: A(u - v) - s + a = b, with b >= 0 after
        // row sign normalization.
        std::vector<Vec<S>> T(m, Vec<S>(cols + 1, S(0)));
        for (std::size_t i = 0; i < m; ++i) {
            if (A[i].size() != n) throw std::invalid_argument("lp: row size mismatch");
            S sign = b[i] < S(0) ? S(-1) : S(1);
            for (std::size_t j = 0; j < n; ++j) {
                T[i][j] = sign * A[i][j];
                T[i][n + j] = -sign * A[i][j];
            }
            T[i][nu + i] = -sign;      // slack of the >= constraint
            T[i][nu + ns + i] = S(1);  // artificial
            T[i][cols] = sign * b[i];
        }

        std::vector<std::size_t> basis(m);
        for (std::size_t i = 0; i < m; ++i) basis[i] = nu + ns + i;

        // Phase 1: minimize sum of artificials.
        Vec<S> obj1(cols, S(0));
        for (std::size_t i = 0; i < na; ++i) obj1[nu + ns + i] = S(1);
        Vec<S> z(cols + 1, S(0));
        build_objective_row(obj1, T, basis, z);
        if (!iterate(T, basis, z, cols)) throw std::logic_error("lp: phase 1 unbounded");
        if (z[cols] > eps_) return {LpStatus::Infeasible, S(0), {}};

        // Drive remaining artificials out of the basis where possible.
        for (std::size_t i = 0; i < m; ++i) {
            if (basis[i] < nu + ns) continue;
            std::size_t piv = cols;
            for (std::size_t j = 0; j < nu + ns; ++j) {
                if (abs_(T[i][j]) > eps_) { piv = j; break; }
            }
            if (piv < cols) pivot(T, basis, z, i, piv);
            // else: redundant row, its artificial stays basic at value 0
        }

        // Phase 2: original objective over columns u, v; artificials barred.
        Vec<S> obj2(cols, S(0));
        for (std::size_t j = 0; j < n; ++j) {
            obj2[j] = c[j];
            obj2[n + j] = -c[j];
        }
        build_objective_row(obj2, T, basis, z);
        if (!iterate(T, basis, z, nu + ns)) return {LpStatus::Unbounded, S(0), {}};

        LpResult<S> res;
        res.status = LpStatus::Optimal;
        res.x.assign(n, S(0));
        for (std::size_t i = 0; i < m; ++i) {
            if (basis[i] < n)
                res.x[basis[i]] += T[i][cols];
            else if (basis[i] < nu)
                res.x[basis[i] - n] -= T[i][cols];
        }
        res.objective = dot(c, res.x);
        return res;
    }

private:
    S eps_;

    S abs_(const S& v) const { return Num<S>::abs(v); }

    // z row: reduced costs of `obj` w.r.t. the current basis; z[cols] holds
    // the current objective value.
    void build_objective_row(const Vec<S>& obj,
                             const std::vector<Vec<S>>& T,
                             const std::vector<std::size_t>& basis,
                             Vec<S>& z) const {
        const std::size_t cols = obj.size();
        z.assign(cols + 1, S(0));
        for (std::size_t j = 0; j < cols; ++j) z[j] = obj[j];
        for (std::size_t i = 0; i < T.size(); ++i) {
            const S& cb = obj[basis[i]];
            if (cb == S(0)) continue;
            for (std::size_t j = 0; j <= cols; ++j) z[j] -= cb * T[i][j];
        }
        z[cols] = -z[cols];
    }

    void pivot(std::vector<Vec<S>>& T,
               std::vector<std::size_t>& basis,
               Vec<S>& z,
               std::size_t row,
               std::size_t col) const {
        const std::size_t cols = z.size() - 1;
        S p = T[row][col];
        for (std::size_t j = 0; j <= cols; ++j) T[row][j] /= p;
        for (std::size_t i = 0; i < T.size(); ++i) {
            if (i == row || T[i][col] == S(0)) continue;
            S f = T[i][col];
            for (std::size_t j = 0; j <= cols; ++j) T[i][j] -= f * T[row][j];
        }
        if (z[col] != S(0)) {
            S f = z[col];
            for (std::size_t j = 0; j < cols; ++j) z[j] -= f * T[row][j];
            z[cols] += f * T[row][cols];
            z[col] = S(0);
        }
        basis[row] = col;
    }

    // Returns false on unboundedness.  Only columns < allowed_cols may enter.
    bool iterate(std::vector<Vec<S>>& T,
                 std::vector<std::size_t>& basis,
                 Vec<S>& z,
                 std::size_t allowed_cols) const {
        const std::size_t m = T.size();
        const std::size_t cols = z.size() - 1;
        for (;;) {
            std::size_t enter = cols;
            for (std::size_t j = 0; j < allowed_cols; ++j) {
                if (z[j] < -eps_) { enter = j; break; }  // Bland: first index
            }
            if (enter == cols) return true;
            std::size_t leave = m;
            for (std::size_t i = 0; i < m; ++i) {
                if (T[i][enter] > eps_) {
                    if (leave == m) {
                        leave = i;
                    } else {
                        // min ratio; ties broken by smallest basis index
                        S lhs = T[i][cols] * T[leave][enter];
                        S rhs = T[leave][cols] * T[i][enter];
                        if (lhs < rhs || (lhs == rhs && basis[i] < basis[leave]))
                            leave = i;
                    }
                }
            }
            if (leave == m) return false;
            pivot(T, basis, z, leave, enter);
        }
    }
};

template <class S>
LpResult<S> solve_lp(const Vec<S>& c,
                     const std::vector<Vec<S>>& A,
                     const Vec<S>& b,
                     const S& eps) {
    return SimplexSolver<S>(eps).solve(c, A, b);
}

}  // namespace risktree
