#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "aromip/branch_bound.hpp"
#include "aromip/dualize.hpp"
#include "aromip/oracle.hpp"
#include "aromip/powergrid.hpp"
#include "aromip/reformulate.hpp"
#include "aromip/simplex.hpp"

using namespace aromip;

namespace {

const std::string kData = AROMIP_DATA_DIR;

TimeSeries flat_series(int periods, double p_sl) {
    TimeSeries ts;
    ts.periods = periods;
    ts.dt_hours = 24.0 / periods;
    ts.p_fl.assign(periods, 10.0);
    ts.p_sl.assign(periods, p_sl);
    ts.delta_d.assign(periods, 1.0);
    ts.delta_dg.assign(periods, 1.0);
    return ts;
}

GridCase mini_case(double reg_price, double f_up, double f_down) {
    GridCase gc;
    gc.name = "mini";
    gc.num_buses = 2;
    gc.root = 1;
    gc.demand = {0.0, 1.0};
    gc.lines.push_back({1, 2, 0.1, 10.0});
    gc.generators.push_back({1, 0.0, 2.0, 0.0, 10.0, 0.0, 1.0, -1.0, reg_price, reg_price});
    gc.renewables.push_back({2, 0.0, 1.0, f_up, f_down});
    return gc;
}

}  // namespace

TEST_CASE("case5 json fixture parses with the documented device sets") {
    const GridCase gc = parse_case(kData + "/case5.json");
    CHECK(gc.num_buses == 5);
    CHECK(gc.root == 1);
    CHECK(gc.lines.size() == 6);
    REQUIRE(gc.generators.size() == 2);
    CHECK(gc.generators[0].bus == 1);
    CHECK(gc.generators[1].bus == 4);
    REQUIRE(gc.renewables.size() == 2);
    CHECK(gc.renewables[0].bus == 1);
    CHECK(gc.renewables[1].bus == 5);
    REQUIRE(gc.storages.size() == 1);
    CHECK(gc.storages[0].bus == 3);
    CHECK(gc.demand[1] == doctest::Approx(2.37));
    CHECK(gc.demand[3] == doctest::Approx(3.16));
}

TEST_CASE("matpower-style twin matches the native case5 where the sidecar agrees") {
    const GridCase m = parse_case(kData + "/case5.m");
    const GridCase j = parse_case(kData + "/case5.json");
    CHECK(m.num_buses == j.num_buses);
    CHECK(m.root == j.root);
    REQUIRE(m.lines.size() == j.lines.size());
    for (std::size_t l = 0; l < m.lines.size(); ++l) {
        CHECK(m.lines[l].from == j.lines[l].from);
        CHECK(m.lines[l].reactance == doctest::Approx(j.lines[l].reactance));
    }
    for (int b = 0; b < 5; ++b) CHECK(m.demand[b] == doctest::Approx(j.demand[b]));
    REQUIRE(m.generators.size() == 2);
    CHECK(m.generators[0].p_max == doctest::Approx(4.0));
    CHECK(m.generators[0].cost2 == doctest::Approx(0.1));
    CHECK(m.generators[0].cost1 == doctest::Approx(14.0));
    REQUIRE(m.renewables.size() == 2);
    CHECK(m.renewables[1].bus == 5);
    CHECK(m.renewables[1].p_plus == doctest::Approx(1.5));
    REQUIRE(m.storages.size() == 1);
    CHECK(m.storages[0].ch_max == doctest::Approx(0.5));
}

TEST_CASE("case30 fixture has four storages") {
    const GridCase gc = parse_case(kData + "/case30.json");
    CHECK(gc.num_buses == 30);
    CHECK(gc.lines.size() == 41);
    CHECK(gc.generators.size() == 4);
    CHECK(gc.storages.size() == 4);
}

TEST_CASE("parse failures carry diagnostics") {
    CHECK_THROWS_AS(parse_case(kData + "/missing.json"), ParseError);
    const std::string tmp = "pg_bad_case";
    {
        std::ofstream out(tmp);
        out << "{\"buses\": 2}";
    }
    CHECK_THROWS_AS(parse_case(tmp), ParseError);
    {
        std::ofstream out(tmp);
        out << "mpc.bus = [1 3 0; 2 1 not_a_number;];\n";
    }
    CHECK_THROWS_WITH_AS(parse_case(tmp), doctest::Contains(":1:"), ParseError);
    {
        std::ofstream out(tmp);
        out << "mpc.bus = [1 3 0 0;2 1 0 0;];\nmpc.branch = [1 2 0 0.1 0 100;];\n"
            << "mpc.gen = [1 0 0 0 0 1 100 1 100 0;];\n";
        std::ofstream roles(tmp + ".roles.json");
        roles << "{\"roles\": [\"windmill\"]}";
    }
    CHECK_THROWS_AS(parse_case(tmp), UnknownRole);
    std::remove(tmp.c_str());
    std::remove((tmp + ".roles.json").c_str());
}

TEST_CASE("time series loading and its failure modes") {
    const TimeSeries ts = load_timeseries(kData + "/day24.csv", 24);
    CHECK(ts.p_fl.size() == 24);
    CHECK(ts.dt_hours == doctest::Approx(1.0));
    const TimeSeries fine = load_timeseries(kData + "/day96.csv", 96);
    CHECK(fine.p_sl.size() == 96);
    CHECK(fine.dt_hours == doctest::Approx(0.25));
    CHECK_THROWS_AS(load_timeseries(kData + "/day24.csv", 96), LengthMismatch);

    const std::string tmp = "pg_bad_series.csv";
    {
        std::ofstream out(tmp);
        out << "t,price\n0,1\n";
    }
    CHECK_THROWS_AS(load_timeseries(tmp, 1), ParseError);
    {
        std::ofstream out(tmp);
        out << "t,p_fl,p_sl,delta_d,delta_dg\n0,1,2,-0.5,1\n";
    }
    CHECK_THROWS_AS(load_timeseries(tmp, 1), NegativeMultiplier);
    std::remove(tmp.c_str());
}

TEST_CASE("forecast is the capped scaled midpoint") {
    GridCase gc = mini_case(5.0, 2.0, 3.0);
    TimeSeries ts = flat_series(2, 10.0);
    ts.delta_dg = {0.8, 3.0};
    const std::vector<double> fc = forecast_power(gc, ts);
    REQUIRE(fc.size() == 2);
    CHECK(fc[0] == doctest::Approx(0.5 * 1.0 * 0.8));  // midpoint (0+1)/2 scaled
    CHECK(fc[1] == doctest::Approx(1.0));              // capped at the technical limit
}

TEST_CASE("dual bound formulas reproduce the worked substitutions") {
    {
        const GridCase gc = mini_case(14.0, 2.0, 3.0);
        const BetaBoundsPower bb = beta_bounds_power(gc, flat_series(1, 16.0));
        CHECK(bb.lower[0] == doctest::Approx(14.0));
        CHECK(bb.upper[0] == doctest::Approx(14.0));
        CHECK(bb.exact);
    }
    {
        const GridCase gc = mini_case(14.0, 2.0, 3.0);
        const BetaBoundsPower bb = beta_bounds_power(gc, flat_series(1, 10.0));
        CHECK(bb.lower[0] == doctest::Approx(8.0));
        CHECK(bb.upper[0] == doctest::Approx(12.0));
        CHECK_FALSE(bb.exact);
    }
    {
        // lower bound clipped at zero by dual nonnegativity
        const GridCase gc = mini_case(0.5, 5.0, 6.0);
        const BetaBoundsPower bb = beta_bounds_power(gc, flat_series(1, 1.0));
        CHECK(bb.lower[0] == 0.0);
        CHECK(bb.upper[0] >= bb.lower[0]);
    }
}

TEST_CASE("uncertainty set has per-unit boxes and one aggregate row per period") {
    const GridCase gc = parse_case(kData + "/case5.json");
    const TimeSeries ts = load_timeseries(kData + "/day24.csv", 24);
    const OmegaStandard om = build_omega_power(gc, ts, 1.0);
    CHECK(om.dim() == 48);
    // one aggregate row per period plus the materialized box rows
    CHECK(om.num_rows() == 24 + 2 * 48);
    for (int i = 0; i < om.dim(); ++i) {
        CHECK(om.h_lower[i] >= -1e-9);
        CHECK(om.h_upper[i] <= 1.5 + 1e-9);
    }
    // R = 0 leaves only the boxes: every coordinate can reach zero
    const OmegaStandard loose = build_omega_power(gc, ts, 0.0);
    for (int i = 0; i < loose.dim(); ++i) CHECK(loose.h_lower[i] == doctest::Approx(0.0));
    CHECK_THROWS_AS(build_omega_power(gc, ts, 1.5), Error);
}

TEST_CASE("assembled case5 instance has the documented dimensions") {
    const GridCase gc = parse_case(kData + "/case5.json");
    const TimeSeries ts = load_timeseries(kData + "/day24.csv", 24);
    const PowerInstance pi = build_power_instance(gc, ts);
    const ValidationReport rep = validate_instance(pi.instance);
    INFO(rep.dims);
    CHECK(rep.ok);
    CHECK(pi.instance.third.n_bin == 48);
    CHECK(rep.nnz_bh == 48);
    CHECK(pi.instance.first.n_x == 2 * 24 + 24);
    // the uncertainty-carrying block comes first: one -1 entry per row
    const ThirdLevel& t3 = pi.instance.third;
    for (int j = 0; j < 48; ++j) {
        int cnt = 0;
        t3.b_h.for_row(j, [&](int c, double v) {
            ++cnt;
            CHECK(c == j);
            CHECK(v == doctest::Approx(-1.0));
        });
        CHECK(cnt == 1);
        CHECK(t3.b0[j] == 0.0);
    }
    for (int j = 48; j < t3.num_coupled(); ++j) {
        int cnt = 0;
        t3.b_h.for_row(j, [&](int, double) { ++cnt; });
        CHECK(cnt == 0);
    }
}

TEST_CASE("infeasible day-ahead set is rejected") {
    GridCase gc = mini_case(5.0, 2.0, 3.0);
    gc.generators[0].p_min = 3.0;
    gc.generators[0].p_max = 2.0;  // crossed on purpose
    CHECK_THROWS_AS(build_power_instance(gc, flat_series(2, 10.0)), ParseError);
    GridCase gc2 = mini_case(5.0, 2.0, 3.0);
    gc2.generators[0].p_min = gc2.generators[0].p_max = 2.0;
    // demand 1.0 with forced output 2.0 still clears through the day-ahead trade
    CHECK_NOTHROW(build_power_instance(gc2, flat_series(2, 10.0)));
}

TEST_CASE("clamping capacity-row duals into the derived band leaves the recourse value unchanged") {
    const GridCase gc = parse_case(kData + "/case5.json");
    const TimeSeries ts = load_timeseries(kData + "/day24.csv", 24);
    // premises: regulation prices below every p_sl, f+ <= f-
    for (double p : ts.p_sl) REQUIRE(p >= 20.0);
    const PowerInstance pi = build_power_instance(gc, ts);
    const WcaroInstance& inst = pi.instance;
    const BetaBoundsPower bb = beta_bounds_power(gc, ts);
    std::mt19937 rng(97);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<double> fc = forecast_power(gc, ts);
    for (int draw = 0; draw < 10; ++draw) {
        // random day-ahead point satisfying the market-clearing equality
        std::vector<double> x(inst.first.n_x);
        const PowerLayout& L = pi.layout;
        for (int t = 0; t < L.T; ++t) {
            double cleared = 0.0;
            for (int g = 0; g < L.n_gen; ++g) {
                const Generator& gen = gc.generators[g];
                const double v = gen.p_min + u(rng) * (gen.p_max - gen.p_min);
                x[L.at(L.x_pg, g, t)] = v;
                cleared += v;
            }
            double need = 0.0;
            for (double d : gc.demand) need += d * ts.delta_d[t];
            for (int i = 0; i < L.n_dg; ++i) need -= fc[i * L.T + t];
            x[L.at(L.x_pfl, 0, t)] = need - cleared;
        }
        // capacities at or above forecast: the band brackets the capacity-row
        // dual only on the upward-deviation side under magnitude penalties
        std::vector<double> h(inst.omega.dim());
        for (int i = 0; i < inst.omega.dim(); ++i)
            h[i] = fc[i] + u(rng) * (inst.omega.h_upper[i] - fc[i]);
        const LpModel primal = build_third_level_primal(inst, x, h);
        const LpSolution ps = solve_lp(primal);
        REQUIRE(ps.status == SolveStatus::Optimal);

        DualMap map;
        LpModel dual = dualize_lp(primal, &map);
        const int coupled0 = inst.third.num_free();
        for (int j = 0; j < static_cast<int>(bb.lower.size()); ++j) {
            const int col = map.row_to_dual_col[coupled0 + j];
            dual.col_lower[col] = std::max(dual.col_lower[col], bb.lower[j]);
            dual.col_upper[col] = std::min(dual.col_upper[col], bb.upper[j]);
        }
        const LpSolution ds = solve_lp(dual);
        REQUIRE(ds.status == SolveStatus::Optimal);
        INFO("draw ", draw);
        CHECK(ds.objective ==
              doctest::Approx(ps.objective).epsilon(1e-6).scale(std::abs(ps.objective) + 1.0));
    }
}

TEST_CASE("solved case5 respects charge exclusivity and nodal balance") {
    const GridCase gc = parse_case(kData + "/case5.json");
    const TimeSeries ts = load_timeseries(kData + "/day24.csv", 24);
    const PowerInstance pi = build_power_instance(gc, ts);
    const SingleLevelModel slm = build_single_level(pi.instance);
    MipParams mp;
    mp.gap_tol = 1e-6;
    const MipSolution sol = solve_mip(slm.mip, mp);
    REQUIRE(sol.status == MipStatus::Optimal);

    const PowerLayout& L = pi.layout;
    std::vector<double> y(pi.instance.third.n_y());
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = sol.primal[slm.y_cols[k]];
    std::vector<double> x(pi.instance.first.n_x);
    for (int k = 0; k < pi.instance.first.n_x; ++k) x[k] = sol.primal[slm.x_cols[k]];

    for (int s = 0; s < L.n_store; ++s)
        for (int t = 0; t < L.T; ++t) {
            const double mc = y[L.at(L.mu_ch, s, t)], md = y[L.at(L.mu_dch, s, t)];
            CHECK(mc + md <= 1.0 + 1e-6);
            CHECK(y[L.at(L.pch, s, t)] <= gc.storages[s].ch_max * mc + 1e-6);
            CHECK(y[L.at(L.pdch, s, t)] <= gc.storages[s].dch_max * md + 1e-6);
        }

    for (int t = 0; t < L.T; ++t)
        for (int b = 1; b <= L.n_bus; ++b) {
            double net = -gc.demand[b - 1] * ts.delta_d[t];
            for (int g = 0; g < L.n_gen; ++g)
                if (gc.generators[g].bus == b) net += y[L.at(L.pg_reg, g, t)];
            for (int i = 0; i < L.n_dg; ++i)
                if (gc.renewables[i].bus == b) net += y[L.at(L.pdg, i, t)];
            for (int s = 0; s < L.n_store; ++s)
                if (gc.storages[s].bus == b)
                    net += y[L.at(L.pdch, s, t)] - y[L.at(L.pch, s, t)];
            if (b == gc.root) net += y[L.at(L.psl, 0, t)];
            for (int l = 0; l < L.n_line; ++l) {
                if (gc.lines[l].from == b) net -= y[L.at(L.pline, l, t)];
                if (gc.lines[l].to == b) net += y[L.at(L.pline, l, t)];
            }
            INFO("bus ", b, " period ", t);
            CHECK(std::abs(net) <= 1e-6);
        }

    // the linking rows tie regulated output to the day-ahead commitment
    for (int g = 0; g < L.n_gen; ++g)
        for (int t = 0; t < L.T; ++t) {
            const double reg = y[L.at(L.pg_reg, g, t)];
            const double expect = x[L.at(L.x_pg, g, t)] + y[L.at(L.pg_up, g, t)] +
                                  y[L.at(L.pg_dn, g, t)];
            CHECK(reg == doctest::Approx(expect).epsilon(1e-6));
        }
}

TEST_CASE("large replicas assemble with the documented binary counts") {
    const TimeSeries ts = load_timeseries(kData + "/day24.csv", 24);
    const PowerInstance p118 =
        build_power_instance(parse_case(kData + "/case118.json"), ts);
    CHECK(p118.instance.third.n_bin == 288);
    const PowerInstance p200 =
        build_power_instance(parse_case(kData + "/case200.json"), ts);
    CHECK(p200.instance.third.n_bin == 480);
    const PowerInstance p300 =
        build_power_instance(parse_case(kData + "/case300.json"), ts);
    CHECK(p300.instance.third.n_bin == 720);
    CHECK(validate_instance(p300.instance).ok);
}
