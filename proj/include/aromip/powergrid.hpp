#pragma once

#include <string>
#include <vector>

#include "aromip/instance.hpp"
#include "aromip/lp_model.hpp"

namespace aromip {

struct UnknownRole : Error {
    using Error::Error;
};
struct LengthMismatch : Error {
    using Error::Error;
};
struct NegativeMultiplier : Error {
    using Error::Error;
};

struct Generator {
    int bus = 0;  // 1-based bus id
    double p_min = 0.0, p_max = 0.0;
    double cost2 = 0.0, cost1 = 0.0, cost0 = 0.0;
    double reg_up_max = 0.0;    // max upward regulation, >= 0
    double reg_down_min = 0.0;  // min downward regulation, <= 0
    double price_up = 0.0, price_down = 0.0;
};

struct Renewable {
    int bus = 0;
    double p_min = 0.0;   // output floor
    double p_plus = 0.0;  // technical limit
    double dev_price_up = 0.0, dev_price_down = 0.0;
};

struct Storage {
    int bus = 0;
    double soc_min = 0.0, soc_max = 1.0;
    double energy = 1.0;  // capacity normalizing the state of charge
    double ch_min = 0.0, ch_max = 0.0;
    double dch_min = 0.0, dch_max = 0.0;
};

struct Line {
    int from = 0, to = 0;
    double reactance = 0.0, thermal_limit = 0.0;
};

struct GridCase {
    std::string name, currency = "USD";
    int num_buses = 0;
    int root = 1;  // 1-based root bus id
    std::vector<double> demand;  // per bus, index = id - 1
    std::vector<Line> lines;
    std::vector<Generator> generators;
    std::vector<Renewable> renewables;
    std::vector<Storage> storages;
};

struct TimeSeries {
    int periods = 0;
    double dt_hours = 1.0;
    std::vector<double> p_fl, p_sl;       // day-ahead / intra-day prices
    std::vector<double> delta_d, delta_dg;  // demand / renewable multipliers
};

enum class PenaltyConvention { Absolute, Signed };

struct PowerBuildParams {
    double R = 1.0;
    std::vector<double> soc_initial;  // per storage; empty = midpoint
    PenaltyConvention penalty_convention = PenaltyConvention::Absolute;
};

struct BetaBoundsPower {
    std::vector<double> lower, upper;  // per (renewable, period), renewable-major
    bool exact = false;                // lower == upper everywhere
};

// Column offsets of the assembled instance; index = offset + unit * T + t.
struct PowerLayout {
    int T = 0;
    int n_gen = 0, n_dg = 0, n_store = 0, n_line = 0, n_bus = 0;
    // first-level blocks
    int x_pg = 0, x_pfl = 0;
    // third-level blocks, in stacking order
    int pg_reg = 0, pg_up = 0, pg_dn = 0;
    int pdg = 0, pdg_up = 0, pdg_dn = 0;
    int psl = 0, pch = 0, pdch = 0;
    int pline = 0, theta = 0, soc = 0;
    int mu_ch = 0, mu_dch = 0;

    int at(int offset, int unit, int t) const { return offset + unit * T + t; }
};

struct PowerInstance {
    WcaroInstance instance;
    PowerLayout layout;
};

// Parses a native JSON case or a restricted matpower-style table file with a
// sidecar role map (path + ".roles.json"). Throws ParseError / UnknownRole.
GridCase parse_case(const std::string& path);

// CSV with header t,p_fl,p_sl,delta_d,delta_dg; dt = 24h / periods.
// Throws LengthMismatch / NegativeMultiplier / ParseError.
TimeSeries load_timeseries(const std::string& path, int periods);

// Forecast renewable output per (renewable, period), renewable-major:
// min((p_min + p_plus)/2 * delta_dg, p_plus).
std::vector<double> forecast_power(const GridCase& gc, const TimeSeries& ts);

// Coupled-row dual bounds per (renewable, period):
//   max(0, p_sl - f+)  <=  beta  <=  max(r+, r-, p_sl) - min(f+, f-)
// with r maximized over the conventional generators.
BetaBoundsPower beta_bounds_power(const GridCase& gc, const TimeSeries& ts);

// Renewable-capacity uncertainty set: per-(i,t) box [0, p_plus] with one
// aggregate forecast-coverage row per period.
OmegaStandard build_omega_power(const GridCase& gc, const TimeSeries& ts, double R);

// Full day-ahead / intra-day operation instance. Throws EmptyOmega /
// InfeasibleFirstLevel.
PowerInstance build_power_instance(const GridCase& gc, const TimeSeries& ts,
                                   const PowerBuildParams& params = {});

}  // namespace aromip
