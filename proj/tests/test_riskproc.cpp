#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "risktree/dual_sampling.hpp"
#include "risktree/fixtures.hpp"
#include "risktree/riskproc.hpp"

#include <algorithm>

using namespace risktree;
using namespace risktree::riskproc;
using space::AdaptedProcess;
using space::ScenarioSpace;

namespace {
constexpr double kTol = 1e-9;
const polyhedra::EligibleStructure kScalar{1, 1};

Polyhedron<double> ray_from(double lo) {
    Polyhedron<double> p(1);
    p.add_halfspace({1.0}, lo);
    return p;
}

// oracle for the worst-case cone: per F_t atom, m >= -min_{s >= t, w in atom} X_s(w)
polyhedra::ConditionalPolyhedron<double> worst_case_oracle(
    const ScenarioSpace<double>& sp, const AdaptedProcess<double>& X, int t) {
    std::vector<Polyhedron<double>> atoms;
    for (int a = 0; a < sp.num_atoms(t); ++a) {
        double lo = -1e30;
        for (int s = t; s <= sp.horizon(); ++s)
            for (int w : sp.atom_states(t, a)) lo = std::max(lo, -X.vals[s][w][0]);
        atoms.push_back(ray_from(lo));
    }
    return polyhedra::ConditionalPolyhedron<double>(t, std::move(atoms));
}
}  // namespace

TEST_CASE("rho_eval on the worst-case cone, two states") {
    auto sp = fixtures::two_state_T1<double>();
    auto A = worst_case_cone(sp, 0, kScalar);

    auto zero = AdaptedProcess<double>::zero(sp, 1);
    auto r0 = rho_eval(sp, A, zero, kTol);
    CHECK(r0.num_atoms() == 1);
    CHECK(r0.atom(0).set_equals(ray_from(0.0), kTol));

    auto X = zero;
    X.vals[1][0][0] = 2.0;
    X.vals[1][1][0] = -1.0;
    auto rx = rho_eval(sp, A, X, kTol);
    CHECK(rx.atom(0).set_equals(ray_from(1.0), kTol));
    CHECK(rx.set_equals(worst_case_oracle(sp, X, 0), kTol));

    // cash invariance: adding 3 on T_0 moves the bound to -2
    auto shifted = X;
    for (int s = 0; s <= 1; ++s)
        for (int w = 0; w < 2; ++w) shifted.vals[s][w][0] += 3.0;
    CHECK(rho_eval(sp, A, shifted, kTol).atom(0).set_equals(ray_from(-2.0), kTol));
}

TEST_CASE("rho_eval matches the worst-case oracle on random processes") {
    auto sp = fixtures::binary_T2<double>();
    sampling::Rng<double> rng(11);
    for (int t = 0; t <= 2; ++t) {
        auto A = worst_case_cone(sp, t, kScalar);
        for (int k = 0; k < 40; ++k) {
            auto X = sampling::random_process(sp, rng, 1, t);
            CHECK(rho_eval(sp, A, X, kTol).set_equals(worst_case_oracle(sp, X, t), kTol));
        }
    }
}

TEST_CASE("acceptance set bijection: X in A iff 0 in rho(X)") {
    auto sp = fixtures::binary_T2<double>();
    sampling::Rng<double> rng(12);
    std::vector<ProcessAcceptanceSet<double>> fams = {
        worst_case_cone(sp, 1, kScalar),
        expectation_floor(sp, 1, kScalar, Vec<double>{-0.5}),
        shifted_cone(sp, 0, kScalar, Vec<double>{0.75}),
    };
    int hits = 0;
    for (const auto& A : fams)
        for (int k = 0; k < 200; ++k) {
            auto X = sampling::random_process(sp, rng, 1, A.t);
            auto r = rho_eval(sp, A, X, kTol);
            bool zero_in = true;
            for (int a = 0; a < r.num_atoms(); ++a)
                if (!r.atom(a).contains({0.0}, kTol)) zero_in = false;
            CHECK(zero_in == accepts(A, X, kTol));
            if (zero_in) ++hits;
        }
    CHECK(hits > 0);  // both branches exercised
}

TEST_CASE("axiom checker verdicts per family") {
    auto sp = fixtures::binary_T2<double>();
    sampling::Rng<double> rng(13);

    auto cone = worst_case_cone(sp, 1, kScalar);
    auto rep = check_axioms_process(sp, cone, rng, 60, kTol);
    CHECK(rep.all_pass());

    // rho(0) is [0, inf) per atom, neither empty nor all of M
    auto r0 = rho_eval(sp, cone, AdaptedProcess<double>::zero(sp, 1, 1), kTol);
    for (int a = 0; a < r0.num_atoms(); ++a)
        CHECK(r0.atom(a).set_equals(ray_from(0.0), kTol));

    // capped set is deliberately non-monotone
    auto broken = capped_set(sp, 1, kScalar, 3.0);
    auto rep2 = check_axioms_process(sp, broken, rng, 60, kTol);
    CHECK_FALSE(rep2.monotone.pass);
    CHECK_FALSE(rep2.monotone.witness.empty());

    // shifted cone stays conditionally convex but is not positively homogeneous
    auto shifted = shifted_cone(sp, 1, kScalar, Vec<double>{-1.0});
    auto rep3 = check_axioms_process(sp, shifted, rng, 60, kTol);
    CHECK(rep3.cash_invariant.pass);
    CHECK(rep3.monotone.pass);
    CHECK(rep3.convex.pass);
    CHECK_FALSE(rep3.pos_hom.pass);
}

TEST_CASE("penalty of the worst-case cone is the homogeneous halfspace") {
    auto sp = fixtures::binary_T2<double>();
    sampling::Rng<double> rng(14);
    for (int t = 0; t <= 1; ++t) {
        auto A = worst_case_cone(sp, t, kScalar);
        for (int k = 0; k < 20; ++k) {
            auto dual = sampling::random_process_dual(sp, rng, t, kScalar);
            if (!in_Wt(sp, dual, kScalar, kTol)) continue;
            auto alpha = penalty_process(sp, A, dual, kTol);
            for (int a = 0; a < alpha.num_atoms(); ++a) {
                int rep = sp.atom_states(t, a)[0];
                double wh = 0.0;
                for (int s = t; s <= sp.horizon(); ++s) wh += dual.w[s - t][rep][0];
                if (wh < 1e-9) continue;  // degenerate atom: penalty is all of M
                auto lo = alpha.atom(a).inf_support({1.0}, kTol);
                REQUIRE(lo.finite);
                CHECK(lo.value == doctest::Approx(0.0).epsilon(1e-7));
            }
        }
    }
}

TEST_CASE("shifted acceptance set shifts the penalty by the pairing with c") {
    auto sp = fixtures::two_state_T1<double>();
    sampling::Rng<double> rng(15);
    const double c = 1.25;
    auto A = shifted_cone(sp, 0, kScalar, Vec<double>{c});
    int checked = 0;
    for (int k = 0; k < 30; ++k) {
        auto dual = sampling::random_process_dual(sp, rng, 0, kScalar);
        if (!in_Wt(sp, dual, kScalar, kTol)) continue;
        double wh = dual.w[0][0][0] + dual.w[1][0][0];
        if (wh < 1e-9) continue;
        auto alpha = penalty_process(sp, A, dual, kTol);
        // sup over Z >= c of the pairing with -Z is -(sum_s w_s) c, so the
        // ray starts at -c
        auto lo = alpha.atom(0).inf_support({1.0}, kTol);
        REQUIRE(lo.finite);
        CHECK(lo.value == doctest::Approx(-c).epsilon(1e-7));
        ++checked;
    }
    CHECK(checked > 5);
}

TEST_CASE("dual variables with a negative w-map cell fail the W_t membership") {
    auto sp = fixtures::two_state_T1<double>();
    ProcessDual<double> dual;
    dual.t = 0;
    for (int s = 0; s <= 1; ++s) {
        dual.Q.push_back(space::VectorMeasure<double>::reference(sp, 1));
        dual.w.push_back(space::VecField<double>(2, Vec<double>{1.0}));
    }
    CHECK(in_Wt(sp, dual, kScalar, kTol));
    dual.w[1][0][0] = -0.5;
    dual.w[1][1][0] = -0.5;
    CHECK_FALSE(in_Wt(sp, dual, kScalar, kTol));
}

TEST_CASE("dual representation: empty list, outer bound, Dirac exactness") {
    auto sp = fixtures::two_state_T1<double>();
    auto A = worst_case_cone(sp, 0, kScalar);
    sampling::Rng<double> rng(16);

    auto X = AdaptedProcess<double>::zero(sp, 1);
    X.vals[0][0][0] = X.vals[0][1][0] = -0.5;
    X.vals[1][0][0] = 2.0;
    X.vals[1][1][0] = -1.0;

    // empty dual list gives all of M_t
    auto full = dual_eval_process(sp, A, X, {}, kTol);
    CHECK(full.atom(0).canonicalized(kTol).halfspaces().empty());

    // every sampled member of W_t yields an outer bound
    auto rx = rho_eval(sp, A, X, kTol);
    int used = 0;
    for (int k = 0; k < 25; ++k) {
        auto dual = sampling::random_process_dual(sp, rng, 0, kScalar);
        if (!in_Wt(sp, dual, kScalar, kTol)) continue;
        CHECK(rx.subset_of(dual_term_process(sp, A, X, dual, kTol), 1e-7));
        ++used;
    }
    CHECK(used > 10);

    // the Dirac family is exact for the coherent cone
    auto diracs = sampling::dirac_process_duals(sp, 0);
    for (int k = 0; k < 20; ++k) {
        auto Y = sampling::random_process(sp, rng, 1, 0);
        CHECK(dual_eval_process(sp, A, Y, diracs, kTol)
                  .set_equals(rho_eval(sp, A, Y, kTol), 1e-7));
    }
}

TEST_CASE("Dirac exactness on the two-period tree") {
    auto sp = fixtures::binary_T2<double>();
    sampling::Rng<double> rng(17);
    for (int t = 0; t <= 1; ++t) {
        auto A = worst_case_cone(sp, t, kScalar);
        auto diracs = sampling::dirac_process_duals(sp, t);
        for (int k = 0; k < 10; ++k) {
            auto Y = sampling::random_process(sp, rng, 1, t);
            CHECK(dual_eval_process(sp, A, Y, diracs, kTol)
                      .set_equals(rho_eval(sp, A, Y, kTol), 1e-7));
        }
    }
}

TEST_CASE("max-dual membership") {
    auto sp = fixtures::binary_T2<double>();
    sampling::Rng<double> rng(18);
    auto A = worst_case_cone(sp, 0, kScalar);
    int accepted = 0;
    for (int k = 0; k < 20; ++k) {
        auto dual = sampling::random_process_dual(sp, rng, 0, kScalar);
        if (!in_Wt(sp, dual, kScalar, kTol)) continue;
        CHECK(is_max_dual_process(sp, A, dual, kTol));
        ++accepted;
    }
    CHECK(accepted > 10);

    // a cone with no constraint after time 0 rejects duals weighting time 1
    auto partial = partial_cone(sp, 0, kScalar, {0});
    ProcessDual<double> dual;
    dual.t = 0;
    for (int s = 0; s <= 2; ++s) {
        dual.Q.push_back(space::VectorMeasure<double>::reference(sp, 1));
        dual.w.push_back(space::VecField<double>(
            4, Vec<double>{s == 1 ? 1.0 : 0.0}));
    }
    dual.boundary = true;
    CHECK_FALSE(is_max_dual_process(sp, partial, dual, kTol));

    // non-cone acceptance sets are rejected outright
    auto shifted = shifted_cone(sp, 0, kScalar, Vec<double>{1.0});
    CHECK_THROWS_AS(is_max_dual_process(sp, shifted, dual, kTol),
                    std::invalid_argument);
}
