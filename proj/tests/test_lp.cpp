#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "risktree/lp.hpp"

#include <random>

using namespace risktree;

namespace {
constexpr double kEps = 1e-9;
}

TEST_CASE("1-d lower bound: min x s.t. x >= 3") {
    auto r = solve_lp<double>({1.0}, {{1.0}}, {3.0}, kEps);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(3.0));
    CHECK(r.x[0] == doctest::Approx(3.0));
}

TEST_CASE("negative right-hand sides handled by row normalization") {
    // min x s.t. x >= -5  ->  -5
    auto r = solve_lp<double>({1.0}, {{1.0}}, {-5.0}, kEps);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(-5.0));
}

TEST_CASE("unboundedness detected") {
    auto r = solve_lp<double>({-1.0}, {{1.0}}, {0.0}, kEps);
    CHECK(r.status == LpStatus::Unbounded);
}

TEST_CASE("infeasibility detected") {
    // x >= 2 and -x >= -1  (x <= 1)
    auto r = solve_lp<double>({1.0}, {{1.0}, {-1.0}}, {2.0, -1.0}, kEps);
    CHECK(r.status == LpStatus::Infeasible);
}

TEST_CASE("no constraints: optimal zero for zero objective, else unbounded") {
    auto r0 = solve_lp<double>({0.0, 0.0}, {}, {}, kEps);
    REQUIRE(r0.status == LpStatus::Optimal);
    CHECK(r0.objective == doctest::Approx(0.0));
    auto r1 = solve_lp<double>({1.0, 0.0}, {}, {}, kEps);
    CHECK(r1.status == LpStatus::Unbounded);
}

TEST_CASE("2-d polytope corner") {
    // min -x - y  s.t.  x >= 0, y >= 0, -x - 2y >= -4, -3x - y >= -6
    std::vector<Vec<double>> A = {{1, 0}, {0, 1}, {-1, -2}, {-3, -1}};
    Vec<double> b = {0, 0, -4, -6};
    auto r = solve_lp<double>({-1, -1}, A, b, kEps);
    REQUIRE(r.status == LpStatus::Optimal);
    // corner of the two sloped facets: x = 8/5, y = 6/5
    CHECK(r.objective == doctest::Approx(-14.0 / 5.0));
    CHECK(r.x[0] == doctest::Approx(8.0 / 5.0));
    CHECK(r.x[1] == doctest::Approx(6.0 / 5.0));
}

TEST_CASE("redundant equality-like rows do not break phase transition") {
    // x >= 1, x >= 1 (duplicate), -x >= -1  pins x = 1
    std::vector<Vec<double>> A = {{1}, {1}, {-1}};
    Vec<double> b = {1, 1, -1};
    auto r = solve_lp<double>({1.0}, A, b, kEps);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(1.0));
}

TEST_CASE("exact rational mode") {
    using R = Rational;
    std::vector<Vec<R>> A = {{R(1), R(0)}, {R(0), R(1)}, {R(-1), R(-2)}};
    Vec<R> b = {R(0), R(0), R(-1)};
    // min -x - y over triangle with hypotenuse x + 2y <= 1
    auto r = solve_lp<R>({R(-1), R(-1)}, A, b, R(0));
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == R(-1));  // at (1, 0)
    CHECK(r.x[0] == R(1));
    CHECK(r.x[1] == R(0));
}

TEST_CASE("random LPs: double agrees with rational to 1e-7") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> coef(-4, 4);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2, m = 5;
        std::vector<Vec<double>> A(m, Vec<double>(n));
        Vec<double> b(m);
        std::vector<Vec<Rational>> Ar(m, Vec<Rational>(n));
        Vec<Rational> br(m);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) {
                int c = coef(rng);
                A[i][j] = c;
                Ar[i][j] = c;
            }
            int c = coef(rng);
            b[i] = c;
            br[i] = c;
        }
        Vec<double> obj(n);
        Vec<Rational> objr(n);
        for (int j = 0; j < n; ++j) {
            int c = coef(rng);
            obj[j] = c;
            objr[j] = c;
        }
        auto rd = solve_lp<double>(obj, A, b, kEps);
        auto rr = solve_lp<Rational>(objr, Ar, br, Rational(0));
        REQUIRE(rd.status == rr.status);
        if (rd.status == LpStatus::Optimal)
            CHECK(rd.objective ==
                  doctest::Approx(Num<Rational>::to_double(rr.objective)).epsilon(1e-7));
    }
}
