#include <doctest.h>

#include <cmath>
#include <random>

#include "aromip/branch_bound.hpp"
#include "aromip/oracle.hpp"
#include "aromip/reformulate.hpp"
#include "aromip/simplex.hpp"
#include "instance_gen.hpp"

using namespace aromip;

TEST_CASE("third-level recourse at fixed scenario") {
    const WcaroInstance t1 = make_t1();
    const LpSolution s = solve_lp(build_third_level_primal(t1, {0.0}, {1.0}));
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(1.0));

    const WcaroInstance t2 = make_t2();
    const std::vector<int> on{1}, off{0};
    const LpSolution son = solve_lp(build_third_level_primal(t2, {}, {0.9}, &on));
    REQUIRE(son.status == SolveStatus::Optimal);
    CHECK(son.objective == doctest::Approx(0.6));
    const LpSolution soff = solve_lp(build_third_level_primal(t2, {}, {0.9}, &off));
    REQUIRE(soff.status == SolveStatus::Optimal);
    CHECK(soff.objective == doctest::Approx(0.9));
}

TEST_CASE("bilinear relaxation values at fixed first stage") {
    const WcaroInstance t1 = make_t1();
    McCormickLayout lay;
    const std::vector<double> x0{0.0};
    const LpModel at0 = build_mccormick_relaxation(t1, &x0, &lay);
    CHECK(lay.alpha_cols.size() == 1);
    CHECK(lay.beta_cols.size() == 1);
    CHECK(lay.terms.size() == 1);
    CHECK(lay.dualfeas_rows.size() == 1);
    const LpSolution s0 = solve_lp(at0);
    REQUIRE(s0.status == SolveStatus::Optimal);
    CHECK(s0.objective == doctest::Approx(1.0));

    const std::vector<double> x2{2.0};
    const LpSolution s2 = solve_lp(build_mccormick_relaxation(t1, &x2));
    REQUIRE(s2.status == SolveStatus::Optimal);
    CHECK(s2.objective == doctest::Approx(0.0));
}

TEST_CASE("relaxation requires normalized uncertainty and beta bounds") {
    WcaroInstance inst = make_t1();
    inst.omega.h_lower = {0.5};
    CHECK_THROWS_AS(build_mccormick_relaxation(inst), Error);

    WcaroInstance nobeta = make_t1();
    nobeta.third.beta_upper = {kInf};
    CHECK_THROWS_AS(build_mccormick_relaxation(nobeta), MissingBetaBounds);
    CHECK_THROWS_AS(build_single_level(nobeta), MissingBetaBounds);
}

TEST_CASE("single-level model solves the canonical toys") {
    SUBCASE("continuous toy") {
        const SingleLevelModel slm = build_single_level(make_t1());
        CHECK(slm.mip.binary_cols.empty());
        const MipSolution sol = solve_mip(slm.mip);
        REQUIRE(sol.status == MipStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(1.0));
        const double xstar = sol.primal[slm.x_cols[0]];
        CHECK(xstar >= -1e-6);
        CHECK(xstar <= 1.0 + 1e-6);
    }
    SUBCASE("binary toy") {
        const SingleLevelModel slm = build_single_level(make_t2());
        REQUIRE(slm.mip.binary_cols.size() == 1);
        const MipSolution sol = solve_mip(slm.mip);
        REQUIRE(sol.status == MipStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(0.6));
        CHECK(sol.primal[slm.y_cols[1]] == doctest::Approx(1.0));
    }
    SUBCASE("binary toy with the switch forced off") {
        const std::vector<int> off{0};
        const SingleLevelModel slm = build_single_level(make_t2(), &off);
        CHECK(slm.mip.binary_cols.empty());
        const MipSolution sol = solve_mip(slm.mip);
        REQUIRE(sol.status == MipStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(1.0));
    }
}

TEST_CASE("single-level MIP equals the explicit minimum over binary fixings") {
    std::mt19937 rng(9001);
    int nontrivial = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const WcaroInstance inst = testutil::random_weak_instance(rng, 4);
        const SingleLevelModel full = build_single_level(inst);
        const MipSolution sol = solve_mip(full.mip);
        REQUIRE(sol.status == MipStatus::Optimal);
        double best = kInf;
        const int nb = inst.third.n_bin;
        for (long mask = 0; mask < (1L << nb); ++mask) {
            std::vector<int> yfix(nb);
            for (int k = 0; k < nb; ++k) yfix[k] = static_cast<int>((mask >> k) & 1);
            const SingleLevelModel fixed = build_single_level(inst, &yfix);
            const MipSolution fsol = solve_mip(fixed.mip);
            if (fsol.status == MipStatus::Optimal) best = std::min(best, fsol.objective);
        }
        INFO("trial ", trial, " bins ", nb);
        CHECK(sol.objective == doctest::Approx(best).epsilon(1e-6));
        if (nb > 0) ++nontrivial;
    }
    CHECK(nontrivial >= 6);
}

TEST_CASE("degenerate beta box makes the relaxation exact at fixed x") {
    std::mt19937 rng(515);
    for (int trial = 0; trial < 10; ++trial) {
        WcaroInstance inst = testutil::random_exact_instance(rng, 0, 3);
        testutil::force_equal_beta_bounds(inst);
        const std::vector<double> x(inst.first.n_x, 0.0);
        const LpSolution rel = solve_lp(build_mccormick_relaxation(inst, &x));
        REQUIRE(rel.status == SolveStatus::Optimal);
        const AdversarialResult adv = adversarial_value(inst, x);
        INFO("trial ", trial);
        CHECK(rel.objective == doctest::Approx(adv.value).epsilon(1e-6));
    }
}

TEST_CASE("shrinking the uncertainty set never increases the value") {
    std::mt19937 rng(606);
    for (int trial = 0; trial < 10; ++trial) {
        const WcaroInstance inst = testutil::random_weak_instance(rng, 3);
        const MipSolution before = solve_mip(build_single_level(inst).mip);
        REQUIRE(before.status == MipStatus::Optimal);
        // halve the box through an extra aggregate row
        WcaroInstance small = inst;
        double cap = 0.0;
        for (double u : inst.omega.h_upper) cap += u;
        const int r = small.omega.num_rows();
        small.omega.b_omega.push_back(0.5 * cap);
        small.omega.row_has_slack.push_back(1);
        small.omega.a_omega.resize(r + 1, small.omega.dim());
        for (int i = 0; i < small.omega.dim(); ++i) small.omega.a_omega.add(r, i, 1.0);
        const MipSolution after = solve_mip(build_single_level(small).mip);
        REQUIRE(after.status == MipStatus::Optimal);
        INFO("trial ", trial);
        CHECK(after.objective <= before.objective + 1e-7);
    }
}

TEST_CASE("non-normalized instances are shifted transparently") {
    // T1 with uncertainty moved to [1,2]: value min_x x + max(0, 2-x) = 2
    WcaroInstance inst = make_t1();
    Polytope box;
    box.set_dim(1);
    box.lower = {1.0};
    box.upper = {2.0};
    inst.omega = standardize_omega(box);
    const MipSolution direct = solve_mip(build_single_level(inst).mip);
    REQUIRE(direct.status == MipStatus::Optimal);
    CHECK(direct.objective == doctest::Approx(2.0));
    const MipSolution manual = solve_mip(build_single_level(shift_h_lower_bound(inst).first).mip);
    REQUIRE(manual.status == MipStatus::Optimal);
    CHECK(manual.objective == doctest::Approx(direct.objective).epsilon(1e-9));
}

TEST_CASE("quadratic first-level cost goes through the linearizer") {
    // T1 with G(x) = x^2: value min_x x^2 + max(0, 1-x); optimum near x=0.5
    WcaroInstance inst = make_t1();
    inst.first.obj_linear = {0.0};
    inst.first.obj_quadratic_diag = {1.0};
    const SingleLevelModel slm = build_single_level(inst, nullptr, 64);
    const MipSolution sol = solve_mip(slm.mip);
    REQUIRE(sol.status == MipStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(0.75).epsilon(1e-3));
    CHECK(sol.objective >= 0.75 - 1e-9);  // overestimation direction
}

TEST_CASE("model text export") {
    const SingleLevelModel slm = build_single_level(make_t2());
    const std::string text = export_lp_format(slm.mip.base, slm.mip.binary_cols);
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("Binary") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
    const std::string cont = export_lp_format(build_single_level(make_t1()).mip.base);
    CHECK(cont.find("Binary") == std::string::npos);
}
