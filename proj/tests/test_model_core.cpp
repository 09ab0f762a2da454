#include <doctest.h>

#include <cmath>
#include <random>

#include "aromip/instance.hpp"
#include "aromip/oracle.hpp"
#include "aromip/reformulate.hpp"
#include "aromip/simplex.hpp"

using namespace aromip;

namespace {

// dense row lookup helper
std::vector<double> row_of(const SparseMatrix& m, int r, int dim) {
    std::vector<double> out(dim, 0.0);
    m.for_row(r, [&](int c, double v) { out[c] = v; });
    return out;
}

bool in_polytope(const Polytope& p, const std::vector<double>& h, double tol) {
    for (int i = 0; i < p.dim; ++i)
        if (h[i] < p.lower[i] - tol || h[i] > p.upper[i] + tol) return false;
    for (int r = 0; r < p.num_rows(); ++r) {
        double act = 0.0;
        p.a_mat.for_row(r, [&](int c, double v) { act += v * h[c]; });
        switch (p.senses[r]) {
            case RowSense::LessEqual:
                if (act > p.rhs[r] + tol) return false;
                break;
            case RowSense::GreaterEqual:
                if (act < p.rhs[r] - tol) return false;
                break;
            case RowSense::Equal:
                if (std::abs(act - p.rhs[r]) > tol) return false;
                break;
        }
    }
    return true;
}

// distance of the point from the nearest constraint boundary (to skip
// tolerance-ambiguous samples)
double boundary_margin(const Polytope& p, const std::vector<double>& h) {
    double m = kInf;
    for (int i = 0; i < p.dim; ++i) {
        if (std::isfinite(p.lower[i])) m = std::min(m, std::abs(h[i] - p.lower[i]));
        if (std::isfinite(p.upper[i])) m = std::min(m, std::abs(h[i] - p.upper[i]));
    }
    for (int r = 0; r < p.num_rows(); ++r) {
        double act = 0.0;
        p.a_mat.for_row(r, [&](int c, double v) { act += v * h[c]; });
        m = std::min(m, std::abs(act - p.rhs[r]));
    }
    return m;
}

bool in_standard_form(const OmegaStandard& om, const std::vector<double>& h) {
    for (int i = 0; i < om.dim(); ++i)
        if (h[i] < om.h_lower[i] - 1e-7 || h[i] > om.h_upper[i] + 1e-7) return false;
    LpModel lp;
    for (int i = 0; i < om.dim(); ++i) lp.add_col("h", h[i], h[i], 0.0);
    std::vector<int> eta(om.num_rows(), -1);
    for (int r = 0; r < om.num_rows(); ++r)
        if (om.row_has_slack[r]) eta[r] = lp.add_col("eta", 0.0, kInf, 0.0);
    for (int r = 0; r < om.num_rows(); ++r) {
        lp.add_row("r", RowSense::Equal, om.b_omega[r]);
        if (eta[r] >= 0) lp.set_entry(r, eta[r], 1.0);
    }
    om.a_omega.for_each([&](int r, int c, double v) { lp.set_entry(r, c, v); });
    return solve_lp(lp).status == SolveStatus::Optimal;
}

}  // namespace

TEST_CASE("canonical toy instance validates cleanly") {
    const ValidationReport rep = validate_instance(make_t1());
    CHECK(rep.ok);
    CHECK(rep.nnz_bh == 1);
    CHECK(rep.issues.empty());
    CHECK(!rep.dims.empty());
}

TEST_CASE("validation flags broken instances") {
    SUBCASE("unbounded uncertainty coordinate") {
        WcaroInstance t1 = make_t1();
        t1.omega.h_upper[0] = kInf;
        const ValidationReport rep = validate_instance(t1);
        CHECK(!rep.ok);
        bool found = false;
        for (const auto& [sev, msg] : rep.issues) found |= msg.find("not compact") != std::string::npos;
        CHECK(found);
    }
    SUBCASE("crossed beta bounds") {
        WcaroInstance t1 = make_t1();
        t1.third.beta_lower = {2.0};
        t1.third.beta_upper = {1.0};
        CHECK(!validate_instance(t1).ok);
    }
    SUBCASE("missing beta bound on a coupled row with uncertainty") {
        WcaroInstance t1 = make_t1();
        t1.third.beta_upper = {kInf};
        CHECK(!validate_instance(t1).ok);
    }
    SUBCASE("dimension mismatch") {
        WcaroInstance t1 = make_t1();
        t1.third.c.push_back(0.0);
        CHECK(!validate_instance(t1).ok);
    }
}

TEST_CASE("standardize a unit box") {
    Polytope p;
    p.set_dim(1);
    p.lower = {0.0};
    p.upper = {1.0};
    const OmegaStandard om = standardize_omega(p);
    CHECK(om.h_lower[0] == doctest::Approx(0.0));
    CHECK(om.h_upper[0] == doctest::Approx(1.0));
    bool has_upper_row = false;
    for (int r = 0; r < om.num_rows(); ++r)
        if (om.row_has_slack[r] && om.b_omega[r] == 1.0 && row_of(om.a_omega, r, 1)[0] == 1.0)
            has_upper_row = true;
    CHECK(has_upper_row);
}

TEST_CASE("standardize the simplex") {
    Polytope p;
    p.set_dim(2);
    p.lower = {0.0, 0.0};
    p.add_row(RowSense::LessEqual, 1.0, {{0, 1.0}, {1, 1.0}});
    const OmegaStandard om = standardize_omega(p);
    CHECK(om.h_lower == std::vector<double>{0.0, 0.0});
    CHECK(om.h_upper[0] == doctest::Approx(1.0));
    CHECK(om.h_upper[1] == doctest::Approx(1.0));
    // first row is the simplex face, with a slack
    CHECK(om.row_has_slack[0] == 1);
    CHECK(om.b_omega[0] == 1.0);
    CHECK(row_of(om.a_omega, 0, 2) == std::vector<double>{1.0, 1.0});
}

TEST_CASE("standardize the power-style uncertainty set") {
    // two renewables with limit 5, required aggregate output 2.5
    Polytope p;
    p.set_dim(2);
    p.lower = {0.0, 0.0};
    p.upper = {5.0, 5.0};
    p.add_row(RowSense::GreaterEqual, 2.5, {{0, 1.0}, {1, 1.0}});
    const OmegaStandard om = standardize_omega(p);
    CHECK(om.h_lower == std::vector<double>{0.0, 0.0});
    CHECK(om.h_upper[0] == doctest::Approx(5.0));
    CHECK(om.h_upper[1] == doctest::Approx(5.0));
    // the >= row is negated into <= and slacked
    CHECK(om.row_has_slack[0] == 1);
    CHECK(om.b_omega[0] == -2.5);
    CHECK(row_of(om.a_omega, 0, 2) == std::vector<double>{-1.0, -1.0});
    bool has_cap = false;
    for (int r = 0; r < om.num_rows(); ++r)
        if (om.b_omega[r] == 5.0 && row_of(om.a_omega, r, 2) == std::vector<double>{1.0, 0.0})
            has_cap = true;
    CHECK(has_cap);
}

TEST_CASE("standard form keeps the same projection onto h") {
    std::mt19937 rng(4242);
    int checked = 0;
    for (int pi = 0; pi < 10; ++pi) {
        Polytope p;
        const int d = 2 + static_cast<int>(rng() % 2);
        p.set_dim(d);
        for (int i = 0; i < d; ++i) {
            p.lower[i] = std::uniform_real_distribution<double>(-1.0, 0.0)(rng);
            p.upper[i] = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
        }
        for (int r = 0; r < 2; ++r) {
            std::vector<std::pair<int, double>> ents;
            for (int i = 0; i < d; ++i)
                ents.emplace_back(i, std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
            p.add_row(rng() % 2 ? RowSense::LessEqual : RowSense::GreaterEqual,
                      std::uniform_real_distribution<double>(-0.5, 1.5)(rng), ents);
        }
        OmegaStandard om;
        try {
            om = standardize_omega(p);
        } catch (const EmptyOmega&) {
            continue;
        }
        for (int s = 0; s < 100; ++s) {
            std::vector<double> h(d);
            for (int i = 0; i < d; ++i)
                h[i] = std::uniform_real_distribution<double>(p.lower[i] - 0.3, p.upper[i] + 0.3)(rng);
            if (boundary_margin(p, h) < 1e-6) continue;
            INFO("polytope ", pi, " sample ", s);
            CHECK(in_polytope(p, h, 1e-9) == in_standard_form(om, h));
            ++checked;
        }
    }
    CHECK(checked > 500);
}

TEST_CASE("empty and unbounded uncertainty sets are rejected") {
    Polytope empty;
    empty.set_dim(1);
    empty.lower = {1.0};
    empty.upper = {2.0};
    empty.add_row(RowSense::LessEqual, 0.0, {{0, 1.0}});
    CHECK_THROWS_AS(standardize_omega(empty), EmptyOmega);

    Polytope unbounded;
    unbounded.set_dim(1);
    unbounded.lower = {0.0};
    CHECK_THROWS_AS(standardize_omega(unbounded), UnboundedOmega);
}

TEST_CASE("shifting the uncertainty lower bound") {
    WcaroInstance inst = make_t1();
    // move the uncertainty interval to [1, 2]
    Polytope box;
    box.set_dim(1);
    box.lower = {1.0};
    box.upper = {2.0};
    inst.omega = standardize_omega(box);

    const auto [shifted, shift] = shift_h_lower_bound(inst);
    CHECK(shift == std::vector<double>{1.0});
    CHECK(shifted.omega.h_lower[0] == 0.0);
    CHECK(shifted.omega.h_upper[0] == doctest::Approx(1.0));
    CHECK(shifted.third.b0[0] == doctest::Approx(1.0));

    SUBCASE("identity when already normalized") {
        const auto [same, zero] = shift_h_lower_bound(make_t1());
        CHECK(zero == std::vector<double>{0.0});
        CHECK(same.third.b0[0] == 0.0);
    }

    SUBCASE("recourse values are preserved pointwise") {
        for (double x : {0.0, 0.7, 2.0})
            for (double h : {1.0, 1.4, 2.0}) {
                const LpSolution before = solve_lp(build_third_level_primal(inst, {x}, {h}));
                const LpSolution after =
                    solve_lp(build_third_level_primal(shifted, {x}, {h - shift[0]}));
                REQUIRE(before.status == SolveStatus::Optimal);
                REQUIRE(after.status == SolveStatus::Optimal);
                CHECK(before.objective == doctest::Approx(after.objective).epsilon(1e-9));
            }
    }
}

TEST_CASE("piecewise linearization of a quadratic cost") {
    FirstLevel fl;
    fl.n_x = 1;
    fl.feasible_set.set_dim(1);
    fl.feasible_set.lower = {0.0};
    fl.feasible_set.upper = {2.0};
    fl.obj_linear = {0.0};
    fl.obj_quadratic_diag = {1.0};

    SUBCASE("two segments give the forced secants") {
        const FirstLevel out = piecewise_linearize_objective(fl, 2);
        CHECK(out.obj_quadratic_diag == std::vector<double>{0.0, 0.0});
        REQUIRE(out.feasible_set.dim == 2);
        REQUIRE(out.feasible_set.num_rows() == 2);
        CHECK(out.obj_linear[1] == 1.0);  // quadratic coefficient moves to the auxiliary
        // secants of x^2 on [0,1] and [1,2]: w >= x and w >= 3x - 2
        CHECK(row_of(out.feasible_set.a_mat, 0, 2) == std::vector<double>{-1.0, 1.0});
        CHECK(out.feasible_set.rhs[0] == 0.0);
        CHECK(row_of(out.feasible_set.a_mat, 1, 2) == std::vector<double>{-3.0, 1.0});
        CHECK(out.feasible_set.rhs[1] == -2.0);
    }

    SUBCASE("zero coefficient is the identity") {
        fl.obj_quadratic_diag = {0.0};
        const FirstLevel out = piecewise_linearize_objective(fl, 8);
        CHECK(out.feasible_set.dim == 1);
        CHECK(out.feasible_set.num_rows() == 0);
    }

    SUBCASE("secants overestimate and match at breakpoints") {
        const int segs = 8;
        const FirstLevel out = piecewise_linearize_objective(fl, segs);
        auto pwl = [&](double x) {
            double w = -kInf;
            for (int r = 0; r < out.feasible_set.num_rows(); ++r) {
                const auto a = row_of(out.feasible_set.a_mat, r, 2);
                w = std::max(w, out.feasible_set.rhs[r] - a[0] * x);  // w >= rhs - a_x x
            }
            return w;
        };
        for (int s = 0; s <= 40; ++s) {
            const double x = 2.0 * s / 40.0;
            CHECK(pwl(x) >= x * x - 1e-9);
        }
        for (int s = 0; s <= segs; ++s) {
            const double bp = 2.0 * s / segs;
            CHECK(pwl(bp) == doctest::Approx(bp * bp).epsilon(1e-12));
        }
    }

    SUBCASE("64 segments recover a constrained quadratic minimum") {
        fl.feasible_set.add_row(RowSense::GreaterEqual, 0.7, {{0, 1.0}});
        const FirstLevel out = piecewise_linearize_objective(fl, 64);
        LpModel lp;
        for (int j = 0; j < out.feasible_set.dim; ++j)
            lp.add_col("v", out.feasible_set.lower[j], out.feasible_set.upper[j], out.obj_linear[j]);
        for (int r = 0; r < out.feasible_set.num_rows(); ++r)
            lp.add_row("r", out.feasible_set.senses[r], out.feasible_set.rhs[r]);
        out.feasible_set.a_mat.for_each([&](int r, int c, double v) { lp.set_entry(r, c, v); });
        const LpSolution sol = solve_lp(lp);
        REQUIRE(sol.status == SolveStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(0.49).epsilon(1e-3));
        CHECK(sol.objective >= 0.49 - 1e-9);  // overestimation direction
    }

    SUBCASE("unbounded quadratic coordinate is rejected") {
        fl.feasible_set.upper = {kInf};
        CHECK_THROWS_AS(piecewise_linearize_objective(fl, 4), UnboundedVariable);
    }
}
