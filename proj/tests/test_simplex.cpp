#include <doctest.h>

#include "aromip/simplex.hpp"
#include "test_util.hpp"

using namespace aromip;

TEST_CASE("one-variable minimum hits the constraint") {
    LpModel lp;
    lp.add_col("x", 0.0, 10.0, 1.0);
    lp.add_row("c", RowSense::GreaterEqual, 3.0, {{0, 1.0}});
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(3.0));
    CHECK(sol.primal[0] == doctest::Approx(3.0));
    CHECK(sol.dual_rows[0] == doctest::Approx(1.0));
    CHECK(testutil::check_kkt(lp, sol).empty());
}

TEST_CASE("unbounded maximization") {
    LpModel lp;
    lp.sense = ObjSense::Maximize;
    lp.add_col("x", 0.0, kInf, 1.0);
    lp.add_row("c", RowSense::GreaterEqual, 3.0, {{0, 1.0}});
    CHECK(solve_lp(lp).status == SolveStatus::Unbounded);
    SimplexParams no_pre;
    no_pre.presolve = false;
    CHECK(solve_lp(lp, no_pre).status == SolveStatus::Unbounded);
}

TEST_CASE("contradictory rows are infeasible") {
    LpModel lp;
    lp.add_col("x", -kInf, kInf, 0.0);
    lp.add_row("ge", RowSense::GreaterEqual, 1.0, {{0, 1.0}});
    lp.add_row("le", RowSense::GreaterEqual, 0.0, {{0, -1.0}});
    CHECK(solve_lp(lp).status == SolveStatus::Infeasible);
    SimplexParams no_pre;
    no_pre.presolve = false;
    CHECK(solve_lp(lp, no_pre).status == SolveStatus::Infeasible);
}

TEST_CASE("two-variable maximization with one binding row") {
    LpModel lp;
    lp.sense = ObjSense::Maximize;
    lp.add_col("x", 0.0, kInf, 3.0);
    lp.add_col("y", 0.0, kInf, 2.0);
    lp.add_row("r1", RowSense::LessEqual, 4.0, {{0, 1.0}, {1, 1.0}});
    lp.add_row("r2", RowSense::LessEqual, 6.0, {{0, 1.0}, {1, 3.0}});
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(12.0));
    CHECK(sol.primal[0] == doctest::Approx(4.0));
    CHECK(sol.primal[1] == doctest::Approx(0.0));
    CHECK(sol.dual_rows[0] == doctest::Approx(3.0));
    CHECK(sol.dual_rows[1] == doctest::Approx(0.0));
    CHECK(testutil::check_kkt(lp, sol).empty());
}

TEST_CASE("bound flips with a capacity row") {
    LpModel lp;
    lp.add_col("x", 0.0, 1.0, -1.0);
    lp.add_col("y", 0.0, 2.0, -1.0);
    lp.add_row("cap", RowSense::LessEqual, 2.5, {{0, 1.0}, {1, 1.0}});
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-2.5));
    CHECK(testutil::check_kkt(lp, sol).empty());
}

TEST_CASE("equality system") {
    LpModel lp;
    lp.add_col("x", -kInf, kInf, 1.0);
    lp.add_col("y", -kInf, kInf, 1.0);
    lp.add_row("sum", RowSense::Equal, 2.0, {{0, 1.0}, {1, 1.0}});
    lp.add_row("diff", RowSense::Equal, 0.0, {{0, 1.0}, {1, -1.0}});
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.primal[0] == doctest::Approx(1.0));
    CHECK(sol.primal[1] == doctest::Approx(1.0));
    CHECK(testutil::check_kkt(lp, sol).empty());
}

TEST_CASE("presolve recovers singleton-row duals") {
    LpModel lp;
    lp.add_col("x", 0.0, kInf, 2.0);
    lp.add_col("y", 0.0, kInf, 1.0);
    lp.add_row("xmin", RowSense::GreaterEqual, 1.0, {{0, 1.0}});
    lp.add_row("mix", RowSense::GreaterEqual, 3.0, {{0, 1.0}, {1, 1.0}});
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(4.0));
    CHECK(sol.dual_rows[0] == doctest::Approx(1.0));
    CHECK(sol.dual_rows[1] == doctest::Approx(1.0));
    CHECK(testutil::check_kkt(lp, sol).empty());
}

TEST_CASE("model fully removed by presolve") {
    LpModel lp;
    lp.add_col("x", 0.0, 10.0, 1.0);
    lp.add_row("c", RowSense::GreaterEqual, 2.0, {{0, 1.0}});
    PresolvedLp pre = PresolvedLp::build(lp);
    REQUIRE(!pre.infeasible());
    const LpSolution red = solve_lp_core(pre.reduced(), {}, nullptr);
    const LpSolution sol = pre.postsolve(red, lp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(2.0));
    CHECK(sol.primal[0] == doctest::Approx(2.0));
    CHECK(sol.dual_rows[0] == doctest::Approx(1.0));
}

TEST_CASE("warm start from an optimal basis converges in few iterations") {
    std::mt19937 rng(7);
    LpModel lp = testutil::random_box_lp(rng, 12, 8);
    SimplexParams p;
    p.presolve = false;
    const LpSolution cold = solve_lp_core(lp, p, nullptr);
    if (cold.status == SolveStatus::Optimal) {
        const LpSolution warm = solve_lp_core(lp, p, &cold.basis);
        REQUIRE(warm.status == SolveStatus::Optimal);
        CHECK(warm.objective == doctest::Approx(cold.objective));
        CHECK(warm.iterations <= 2);
    }
}

TEST_CASE("random box LPs satisfy optimality conditions") {
    std::mt19937 rng(12345);
    int solved = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 10);
        const int m = 1 + static_cast<int>(rng() % 10);
        LpModel lp = testutil::random_box_lp(rng, n, m);
        const LpSolution sol = solve_lp(lp);
        // feasible by construction; bounded by the box
        REQUIRE(sol.status == SolveStatus::Optimal);
        const std::string err = testutil::check_kkt(lp, sol);
        INFO("trial ", trial, ": ", err);
        CHECK(err.empty());
        ++solved;
        // presolve and core paths must agree
        SimplexParams p;
        p.presolve = false;
        const LpSolution raw = solve_lp_core(lp, p, nullptr);
        REQUIRE(raw.status == SolveStatus::Optimal);
        CHECK(raw.objective == doctest::Approx(sol.objective).epsilon(1e-6));
    }
    CHECK(solved == 200);
}
