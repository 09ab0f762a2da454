#include "aromip/powergrid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "aromip/simplex.hpp"

namespace aromip {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double num_or(const json& obj, const char* key, double fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return obj.at(key).get<double>();
}

GridCase parse_case_json(const json& j, const std::string& path) {
    GridCase gc;
    try {
        gc.name = j.value("name", path);
        gc.currency = j.value("currency", "USD");
        gc.num_buses = j.at("buses").get<int>();
        gc.root = j.value("root", 1);
        gc.demand = j.at("demand").get<std::vector<double>>();
        for (const json& e : j.at("lines")) {
            Line l;
            l.from = e.at("from").get<int>();
            l.to = e.at("to").get<int>();
            l.reactance = e.at("reactance").get<double>();
            l.thermal_limit = e.at("thermal_limit").get<double>();
            gc.lines.push_back(l);
        }
        for (const json& e : j.value("generators", json::array())) {
            Generator g;
            g.bus = e.at("bus").get<int>();
            g.p_min = num_or(e, "p_min", 0.0);
            g.p_max = e.at("p_max").get<double>();
            g.cost2 = num_or(e, "cost2", 0.0);
            g.cost1 = num_or(e, "cost1", 0.0);
            g.cost0 = num_or(e, "cost0", 0.0);
            g.reg_up_max = num_or(e, "reg_up_max", 0.0);
            g.reg_down_min = num_or(e, "reg_down_min", 0.0);
            g.price_up = num_or(e, "price_up", 0.0);
            g.price_down = num_or(e, "price_down", 0.0);
            gc.generators.push_back(g);
        }
        for (const json& e : j.value("renewables", json::array())) {
            Renewable r;
            r.bus = e.at("bus").get<int>();
            r.p_min = num_or(e, "p_min", 0.0);
            r.p_plus = e.at("p_plus").get<double>();
            r.dev_price_up = num_or(e, "dev_price_up", 0.0);
            r.dev_price_down = num_or(e, "dev_price_down", 0.0);
            gc.renewables.push_back(r);
        }
        for (const json& e : j.value("storages", json::array())) {
            Storage s;
            s.bus = e.at("bus").get<int>();
            s.soc_min = num_or(e, "soc_min", 0.0);
            s.soc_max = num_or(e, "soc_max", 1.0);
            s.energy = num_or(e, "energy", 1.0);
            s.ch_min = num_or(e, "ch_min", 0.0);
            s.ch_max = num_or(e, "ch_max", 0.0);
            s.dch_min = num_or(e, "dch_min", 0.0);
            s.dch_max = num_or(e, "dch_max", 0.0);
            gc.storages.push_back(s);
        }
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return gc;
}

// minimal matpower-style table reader: collects numeric matrices assigned as
// mpc.<name> = [ ... ]; plus scalar mpc.baseMVA
struct MatpowerFile {
    std::map<std::string, std::vector<std::vector<double>>> tables;
    double base_mva = 100.0;
};

MatpowerFile parse_matpower_tables(const std::string& text, const std::string& path) {
    MatpowerFile mf;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::string current;
    while (std::getline(in, line)) {
        ++lineno;
        const auto cut = line.find('%');
        if (cut != std::string::npos) line.resize(cut);
        std::istringstream ls(line);
        if (current.empty()) {
            std::string tok;
            ls >> tok;
            if (tok.rfind("mpc.", 0) != 0) continue;
            const std::string name = tok.substr(4);
            std::string eq;
            ls >> eq;
            if (eq != "=") continue;
            std::string rest;
            std::getline(ls, rest);
            if (name == "baseMVA") {
                std::istringstream vs(rest);
                if (!(vs >> mf.base_mva))
                    throw ParseError(path + ":" + std::to_string(lineno) + ": bad baseMVA");
                continue;
            }
            if (rest.find('[') == std::string::npos) continue;
            current = name;
            mf.tables[current];
            line = rest.substr(rest.find('[') + 1);
        }
        // inside a matrix: accumulate rows until ]
        const auto close = line.find(']');
        const std::string body = close == std::string::npos ? line : line.substr(0, close);
        std::istringstream rs(body);
        std::string cell;
        std::vector<double> row;
        auto flush_row = [&] {
            if (!row.empty()) mf.tables[current].push_back(row);
            row.clear();
        };
        while (rs >> cell) {
            // a ';' may be glued to the numbers around it
            std::string val;
            auto take_val = [&] {
                if (val.empty()) return;
                std::size_t used = 0;
                double v = 0.0;
                try {
                    v = std::stod(val, &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != val.size())
                    throw ParseError(path + ":" + std::to_string(lineno) + ": bad number '" + val + "'");
                row.push_back(v);
                val.clear();
            };
            for (char ch : cell) {
                if (ch == ';') {
                    take_val();
                    flush_row();
                } else {
                    val.push_back(ch);
                }
            }
            take_val();
        }
        flush_row();
        if (close != std::string::npos) current.clear();
    }
    return mf;
}

GridCase parse_case_matpower(const std::string& text, const std::string& path) {
    const MatpowerFile mf = parse_matpower_tables(text, path);
    for (const char* req : {"bus", "branch", "gen"})
        if (!mf.tables.count(req)) throw ParseError(path + ": missing mpc." + std::string(req));
    json roles;
    try {
        roles = json::parse(read_file(path + ".roles.json"));
    } catch (const json::exception& e) {
        throw ParseError(path + ".roles.json: " + e.what());
    }

    GridCase gc;
    gc.name = path;
    const double base = mf.base_mva;
    const auto& bus = mf.tables.at("bus");
    gc.num_buses = static_cast<int>(bus.size());
    gc.demand.assign(gc.num_buses, 0.0);
    int slack = 1;
    for (const auto& row : bus) {
        if (row.size() < 3) throw ParseError(path + ": short bus row");
        const int id = static_cast<int>(row[0]);
        if (id < 1 || id > gc.num_buses) throw ParseError(path + ": bus ids must be 1..n contiguous");
        gc.demand[id - 1] = row[2] / base;
        if (row.size() > 1 && static_cast<int>(row[1]) == 3) slack = id;
    }
    gc.root = roles.value("root", slack);
    for (const auto& row : mf.tables.at("branch")) {
        if (row.size() < 6) throw ParseError(path + ": short branch row");
        Line l;
        l.from = static_cast<int>(row[0]);
        l.to = static_cast<int>(row[1]);
        l.reactance = row[3];
        l.thermal_limit = row[5] / base;
        gc.lines.push_back(l);
    }
    const auto& gen = mf.tables.at("gen");
    const auto gencost = mf.tables.count("gencost") ? mf.tables.at("gencost")
                                                    : std::vector<std::vector<double>>{};
    const json role_list = roles.value("roles", json::array());
    if (role_list.size() != gen.size())
        throw ParseError(path + ".roles.json: roles length != generator count");
    const json conv = roles.value("conventional", json::object());
    const json renew = roles.value("renewable", json::object());
    const json stor = roles.value("storage", json::object());
    for (std::size_t gi = 0; gi < gen.size(); ++gi) {
        const auto& row = gen[gi];
        if (row.size() < 10) throw ParseError(path + ": short gen row");
        const int b = static_cast<int>(row[0]);
        const std::string role = role_list[gi].get<std::string>();
        if (role == "conventional") {
            Generator g;
            g.bus = b;
            g.p_max = row[8] / base;
            g.p_min = row[9] / base;
            if (gi < gencost.size() && gencost[gi].size() >= 7) {
                g.cost2 = gencost[gi][4] * base * base;
                g.cost1 = gencost[gi][5] * base;
                g.cost0 = gencost[gi][6];
            }
            g.reg_up_max = num_or(conv, "reg_up_max", 0.0);
            g.reg_down_min = num_or(conv, "reg_down_min", 0.0);
            g.price_up = num_or(conv, "price_up", 0.0);
            g.price_down = num_or(conv, "price_down", 0.0);
            gc.generators.push_back(g);
        } else if (role == "renewable") {
            Renewable r;
            r.bus = b;
            r.p_plus = row[8] / base;
            r.p_min = std::max(0.0, row[9] / base);
            r.dev_price_up = num_or(renew, "dev_price_up", 0.0);
            r.dev_price_down = num_or(renew, "dev_price_down", 0.0);
            gc.renewables.push_back(r);
        } else if (role == "storage") {
            Storage s;
            s.bus = b;
            s.soc_min = num_or(stor, "soc_min", 0.0);
            s.soc_max = num_or(stor, "soc_max", 1.0);
            s.energy = num_or(stor, "energy", 1.0);
            s.ch_min = num_or(stor, "ch_min", 0.0);
            s.ch_max = num_or(stor, "ch_max", row[8] / base);
            s.dch_min = num_or(stor, "dch_min", 0.0);
            s.dch_max = num_or(stor, "dch_max", row[8] / base);
            gc.storages.push_back(s);
        } else {
            throw UnknownRole(path + ".roles.json: unknown role '" + role + "'");
        }
    }
    return gc;
}

void check_case(const GridCase& gc) {
    if (gc.num_buses <= 0 || static_cast<int>(gc.demand.size()) != gc.num_buses)
        throw ParseError(gc.name + ": demand length != bus count");
    if (gc.root < 1 || gc.root > gc.num_buses) throw ParseError(gc.name + ": root bus out of range");
    auto bus_ok = [&](int b) { return b >= 1 && b <= gc.num_buses; };
    for (const Line& l : gc.lines) {
        if (!bus_ok(l.from) || !bus_ok(l.to)) throw ParseError(gc.name + ": line endpoint out of range");
        if (!(l.reactance > 0.0)) throw ParseError(gc.name + ": nonpositive line reactance");
    }
    for (const Generator& g : gc.generators) {
        if (!bus_ok(g.bus)) throw ParseError(gc.name + ": generator bus out of range");
        if (g.p_min > g.p_max) throw ParseError(gc.name + ": generator bounds crossed");
        if (g.reg_up_max < 0.0 || g.reg_down_min > 0.0)
            throw ParseError(gc.name + ": regulation limits have wrong signs");
    }
    for (const Renewable& r : gc.renewables)
        if (!bus_ok(r.bus)) throw ParseError(gc.name + ": renewable bus out of range");
    for (const Storage& s : gc.storages) {
        if (!bus_ok(s.bus)) throw ParseError(gc.name + ": storage bus out of range");
        if (s.soc_min > s.soc_max) throw ParseError(gc.name + ": storage soc bounds crossed");
        if (!(s.energy > 0.0)) throw ParseError(gc.name + ": nonpositive storage capacity");
    }
}

}  // namespace

GridCase parse_case(const std::string& path) {
    const std::string text = read_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    GridCase gc;
    if (first != std::string::npos && text[first] == '{') {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw ParseError(path + ": " + e.what());
        }
        gc = parse_case_json(j, path);
    } else {
        gc = parse_case_matpower(text, path);
    }
    check_case(gc);
    return gc;
}

TimeSeries load_timeseries(const std::string& path, int periods) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    TimeSeries ts;
    ts.periods = periods;
    ts.dt_hours = 24.0 / periods;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ":1: empty file");
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
            out.push_back(cell);
        }
        return out;
    };
    const std::vector<std::string> header = split(line);
    const std::vector<std::string> expected{"t", "p_fl", "p_sl", "delta_d", "delta_dg"};
    if (header != expected) throw ParseError(path + ":1: header must be t,p_fl,p_sl,delta_d,delta_dg");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> cells = split(line);
        if (cells.size() != 5)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 5 columns");
        double v[5];
        for (int c = 0; c < 5; ++c) {
            try {
                std::size_t used = 0;
                v[c] = std::stod(cells[c], &used);
                if (used != cells[c].size()) throw std::invalid_argument(cells[c]);
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(lineno) + ":" + std::to_string(c + 1) +
                                 ": bad number '" + cells[c] + "'");
            }
        }
        ts.p_fl.push_back(v[1]);
        ts.p_sl.push_back(v[2]);
        if (v[3] < 0.0 || v[4] < 0.0)
            throw NegativeMultiplier(path + ":" + std::to_string(lineno) + ": negative multiplier");
        ts.delta_d.push_back(v[3]);
        ts.delta_dg.push_back(v[4]);
    }
    if (static_cast<int>(ts.p_fl.size()) != periods)
        throw LengthMismatch(path + ": " + std::to_string(ts.p_fl.size()) + " rows, expected " +
                             std::to_string(periods));
    return ts;
}

std::vector<double> forecast_power(const GridCase& gc, const TimeSeries& ts) {
    std::vector<double> out;
    out.reserve(gc.renewables.size() * ts.periods);
    for (const Renewable& r : gc.renewables)
        for (int t = 0; t < ts.periods; ++t)
            out.push_back(std::min(0.5 * (r.p_min + r.p_plus) * ts.delta_dg[t], r.p_plus));
    return out;
}

BetaBoundsPower beta_bounds_power(const GridCase& gc, const TimeSeries& ts) {
    BetaBoundsPower bb;
    double rmax = -kInf;
    for (const Generator& g : gc.generators) rmax = std::max({rmax, g.price_up, g.price_down});
    bb.exact = true;
    for (const Renewable& r : gc.renewables)
        for (int t = 0; t < ts.periods; ++t) {
            const double lo = std::max(0.0, ts.p_sl[t] - r.dev_price_up);
            double up = std::max(rmax, ts.p_sl[t]) - std::min(r.dev_price_up, r.dev_price_down);
            up = std::max(up, lo);
            bb.lower.push_back(lo);
            bb.upper.push_back(up);
            if (up - lo > 1e-12) bb.exact = false;
        }
    return bb;
}

OmegaStandard build_omega_power(const GridCase& gc, const TimeSeries& ts, double R) {
    if (R < 0.0 || R > 1.0) throw Error("forecast-error fraction R must lie in [0,1]");
    const int nd = static_cast<int>(gc.renewables.size());
    const int T = ts.periods;
    Polytope p;
    p.set_dim(nd * T);
    for (int i = 0; i < nd; ++i)
        for (int t = 0; t < T; ++t) {
            p.lower[i * T + t] = 0.0;
            p.upper[i * T + t] = gc.renewables[i].p_plus;
        }
    const std::vector<double> fc = forecast_power(gc, ts);
    for (int t = 0; t < T; ++t) {
        std::vector<std::pair<int, double>> ents;
        double target = 0.0;
        for (int i = 0; i < nd; ++i) {
            ents.emplace_back(i * T + t, 1.0);
            target += fc[i * T + t];
        }
        p.add_row(RowSense::GreaterEqual, R * target, ents);
    }
    return standardize_omega(p);
}

PowerInstance build_power_instance(const GridCase& gc, const TimeSeries& ts,
                                   const PowerBuildParams& params) {
    check_case(gc);
    const int T = ts.periods;
    PowerLayout L;
    L.T = T;
    L.n_gen = static_cast<int>(gc.generators.size());
    L.n_dg = static_cast<int>(gc.renewables.size());
    L.n_store = static_cast<int>(gc.storages.size());
    L.n_line = static_cast<int>(gc.lines.size());
    L.n_bus = gc.num_buses;
    if (!params.soc_initial.empty() && static_cast<int>(params.soc_initial.size()) != L.n_store)
        throw DimensionMismatch("soc_initial length != storage count");

    PowerInstance out;
    WcaroInstance& inst = out.instance;
    inst.name = gc.name;

    // ---- first level: x = (P_G, P_fl) ----
    L.x_pg = 0;
    L.x_pfl = L.n_gen * T;
    const int nx = L.n_gen * T + T;
    FirstLevel& fl = inst.first;
    fl.n_x = nx;
    fl.feasible_set.set_dim(nx);
    fl.obj_linear.assign(nx, 0.0);
    fl.obj_quadratic_diag.assign(nx, 0.0);
    const std::vector<double> fc = forecast_power(gc, ts);
    for (int g = 0; g < L.n_gen; ++g)
        for (int t = 0; t < T; ++t) {
            const int c = L.at(L.x_pg, g, t);
            fl.feasible_set.lower[c] = gc.generators[g].p_min;
            fl.feasible_set.upper[c] = gc.generators[g].p_max;
            fl.obj_linear[c] = gc.generators[g].cost1;
            fl.obj_quadratic_diag[c] = gc.generators[g].cost2;
            fl.obj_constant += gc.generators[g].cost0;
        }
    for (int t = 0; t < T; ++t) {
        // the intra-day cross term -p_sl P_fl folds into the first level
        fl.obj_linear[L.at(L.x_pfl, 0, t)] = ts.p_fl[t] - ts.p_sl[t];
    }
    for (int t = 0; t < T; ++t) {
        double total_d = 0.0;
        for (double d : gc.demand) total_d += d * ts.delta_d[t];
        double total_fc = 0.0;
        for (int i = 0; i < L.n_dg; ++i) total_fc += fc[i * T + t];
        std::vector<std::pair<int, double>> ents{{L.at(L.x_pfl, 0, t), 1.0}};
        for (int g = 0; g < L.n_gen; ++g) ents.emplace_back(L.at(L.x_pg, g, t), 1.0);
        fl.feasible_set.add_row(RowSense::Equal, total_d - total_fc, ents);
    }
    {
        LpModel probe;
        for (int c = 0; c < nx; ++c)
            probe.add_col("x", fl.feasible_set.lower[c], fl.feasible_set.upper[c], 0.0);
        for (int r = 0; r < fl.feasible_set.num_rows(); ++r)
            probe.add_row("r", fl.feasible_set.senses[r], fl.feasible_set.rhs[r]);
        fl.feasible_set.a_mat.for_each([&](int r, int c, double v) { probe.set_entry(r, c, v); });
        if (solve_lp(probe).status == SolveStatus::Infeasible)
            throw InfeasibleFirstLevel(gc.name + ": day-ahead feasible set is empty");
    }

    // ---- uncertainty set ----
    inst.omega = build_omega_power(gc, ts, params.R);

    // ---- third level ----
    ThirdLevel& t3 = inst.third;
    int off = 0;
    auto block = [&](int& slot, int units) {
        slot = off;
        off += units * T;
    };
    block(L.pg_reg, L.n_gen);
    block(L.pg_up, L.n_gen);
    block(L.pg_dn, L.n_gen);
    block(L.pdg, L.n_dg);
    block(L.pdg_up, L.n_dg);
    block(L.pdg_dn, L.n_dg);
    block(L.psl, 1);
    block(L.pch, L.n_store);
    block(L.pdch, L.n_store);
    block(L.pline, L.n_line);
    block(L.theta, L.n_bus);
    block(L.soc, L.n_store);
    t3.n_cont = off;
    block(L.mu_ch, L.n_store);
    block(L.mu_dch, L.n_store);
    t3.n_bin = 2 * L.n_store * T;
    const int ny = t3.n_y();

    const bool absolute = params.penalty_convention == PenaltyConvention::Absolute;
    t3.c.assign(ny, 0.0);
    for (int g = 0; g < L.n_gen; ++g)
        for (int t = 0; t < T; ++t) {
            t3.c[L.at(L.pg_up, g, t)] = gc.generators[g].price_up;
            t3.c[L.at(L.pg_dn, g, t)] = absolute ? -gc.generators[g].price_down : gc.generators[g].price_down;
        }
    for (int i = 0; i < L.n_dg; ++i)
        for (int t = 0; t < T; ++t) {
            t3.c[L.at(L.pdg_up, i, t)] = gc.renewables[i].dev_price_up;
            t3.c[L.at(L.pdg_dn, i, t)] =
                absolute ? -gc.renewables[i].dev_price_down : gc.renewables[i].dev_price_down;
        }
    for (int t = 0; t < T; ++t) t3.c[L.at(L.psl, 0, t)] = ts.p_sl[t];

    t3.a_free.resize(0, ny);
    using Ents = std::vector<std::pair<int, double>>;
    auto add_free = [&](const Ents& ents, double rhs) {
        const int r = t3.num_free();
        t3.b_free.push_back(rhs);
        t3.a_free.resize(r + 1, ny);
        for (const auto& [c, v] : ents) t3.a_free.add(r, c, v);
    };
    auto add_free_eq = [&](const Ents& ents, double rhs) {
        add_free(ents, rhs);
        Ents neg = ents;
        for (auto& [c, v] : neg) v = -v;
        add_free(neg, -rhs);
    };

    // regulated-output range and deviation limits
    for (int g = 0; g < L.n_gen; ++g)
        for (int t = 0; t < T; ++t) {
            const Generator& gen = gc.generators[g];
            add_free({{L.at(L.pg_reg, g, t), 1.0}}, gen.p_min);
            add_free({{L.at(L.pg_reg, g, t), -1.0}}, -gen.p_max);
            add_free({{L.at(L.pg_up, g, t), 1.0}}, 0.0);
            add_free({{L.at(L.pg_up, g, t), -1.0}}, -gen.reg_up_max);
            add_free({{L.at(L.pg_dn, g, t), -1.0}}, 0.0);
            add_free({{L.at(L.pg_dn, g, t), 1.0}}, gen.reg_down_min);
        }
    // renewable adjustment around the forecast
    for (int i = 0; i < L.n_dg; ++i)
        for (int t = 0; t < T; ++t) {
            add_free_eq({{L.at(L.pdg, i, t), 1.0},
                         {L.at(L.pdg_up, i, t), -1.0},
                         {L.at(L.pdg_dn, i, t), -1.0}},
                        fc[i * T + t]);
            add_free({{L.at(L.pdg, i, t), 1.0}}, gc.renewables[i].p_min);
            add_free({{L.at(L.pdg_up, i, t), 1.0}}, 0.0);
            add_free({{L.at(L.pdg_dn, i, t), -1.0}}, 0.0);
        }
    // nodal balance (root carries the intra-day exchange) and flow physics
    for (int t = 0; t < T; ++t) {
        for (int b = 1; b <= L.n_bus; ++b) {
            Ents ents;
            for (int g = 0; g < L.n_gen; ++g)
                if (gc.generators[g].bus == b) ents.emplace_back(L.at(L.pg_reg, g, t), 1.0);
            for (int i = 0; i < L.n_dg; ++i)
                if (gc.renewables[i].bus == b) ents.emplace_back(L.at(L.pdg, i, t), 1.0);
            for (int s = 0; s < L.n_store; ++s)
                if (gc.storages[s].bus == b) {
                    ents.emplace_back(L.at(L.pdch, s, t), 1.0);
                    ents.emplace_back(L.at(L.pch, s, t), -1.0);
                }
            if (b == gc.root) ents.emplace_back(L.at(L.psl, 0, t), 1.0);
            for (int l = 0; l < L.n_line; ++l) {
                if (gc.lines[l].from == b) ents.emplace_back(L.at(L.pline, l, t), -1.0);
                if (gc.lines[l].to == b) ents.emplace_back(L.at(L.pline, l, t), 1.0);
            }
            add_free_eq(ents, gc.demand[b - 1] * ts.delta_d[t]);
        }
        for (int l = 0; l < L.n_line; ++l) {
            const Line& ln = gc.lines[l];
            const double s = 1.0 / ln.reactance;
            add_free_eq({{L.at(L.pline, l, t), 1.0},
                         {L.at(L.theta, ln.from - 1, t), -s},
                         {L.at(L.theta, ln.to - 1, t), s}},
                        0.0);
            add_free({{L.at(L.pline, l, t), 1.0}}, -ln.thermal_limit);
            add_free({{L.at(L.pline, l, t), -1.0}}, -ln.thermal_limit);
        }
        add_free_eq({{L.at(L.theta, gc.root - 1, t), 1.0}}, 0.0);
    }
    // storages
    for (int s = 0; s < L.n_store; ++s) {
        const Storage& st = gc.storages[s];
        const double flow = ts.dt_hours / st.energy;
        const double soc0 =
            params.soc_initial.empty() ? 0.5 * (st.soc_min + st.soc_max) : params.soc_initial[s];
        for (int t = 0; t < T; ++t) {
            add_free({{L.at(L.soc, s, t), 1.0}}, st.soc_min);
            add_free({{L.at(L.soc, s, t), -1.0}}, -st.soc_max);
            Ents rec{{L.at(L.soc, s, t), 1.0},
                     {L.at(L.pch, s, t), -flow},
                     {L.at(L.pdch, s, t), flow}};
            double rhs = 0.0;
            if (t == 0)
                rhs = soc0;
            else
                rec.emplace_back(L.at(L.soc, s, t - 1), -1.0);
            add_free_eq(rec, rhs);
            add_free({{L.at(L.pch, s, t), 1.0}}, 0.0);
            add_free({{L.at(L.pdch, s, t), 1.0}}, 0.0);
            // binary-gated charge/discharge windows
            add_free({{L.at(L.pch, s, t), 1.0}, {L.at(L.mu_ch, s, t), -st.ch_min}}, 0.0);
            add_free({{L.at(L.pch, s, t), -1.0}, {L.at(L.mu_ch, s, t), st.ch_max}}, 0.0);
            add_free({{L.at(L.pdch, s, t), 1.0}, {L.at(L.mu_dch, s, t), -st.dch_min}}, 0.0);
            add_free({{L.at(L.pdch, s, t), -1.0}, {L.at(L.mu_dch, s, t), st.dch_max}}, 0.0);
            add_free({{L.at(L.mu_ch, s, t), -1.0}, {L.at(L.mu_dch, s, t), -1.0}}, -1.0);
            add_free({{L.at(L.mu_ch, s, t), 1.0}}, 0.0);
            add_free({{L.at(L.mu_ch, s, t), -1.0}}, -1.0);
            add_free({{L.at(L.mu_dch, s, t), 1.0}}, 0.0);
            add_free({{L.at(L.mu_dch, s, t), -1.0}}, -1.0);
        }
    }

    // coupled rows: the renewable-capacity block carries the uncertainty,
    // the linking and intra-day clearing rows carry the first-level terms
    const BetaBoundsPower bb = beta_bounds_power(gc, ts);
    int cj = 0;
    t3.b_coupled.resize(0, ny);
    t3.b_x.resize(0, nx);
    t3.b_h.resize(0, L.n_dg * T);
    auto add_coupled = [&](const Ents& y_ents, const Ents& x_ents, const Ents& h_ents, double b0,
                           double blo, double bup) {
        t3.b_coupled.resize(cj + 1, ny);
        t3.b_x.resize(cj + 1, nx);
        t3.b_h.resize(cj + 1, L.n_dg * T);
        for (const auto& [c, v] : y_ents) t3.b_coupled.add(cj, c, v);
        for (const auto& [c, v] : x_ents) t3.b_x.add(cj, c, v);
        for (const auto& [c, v] : h_ents) t3.b_h.add(cj, c, v);
        t3.b0.push_back(b0);
        t3.beta_lower.push_back(blo);
        t3.beta_upper.push_back(bup);
        ++cj;
    };
    for (int i = 0; i < L.n_dg; ++i)
        for (int t = 0; t < T; ++t)
            add_coupled({{L.at(L.pdg, i, t), -1.0}}, {}, {{i * T + t, -1.0}}, 0.0, bb.lower[i * T + t],
                        bb.upper[i * T + t]);
    for (int g = 0; g < L.n_gen; ++g)
        for (int t = 0; t < T; ++t) {
            const Ents lhs{{L.at(L.pg_reg, g, t), 1.0},
                           {L.at(L.pg_up, g, t), -1.0},
                           {L.at(L.pg_dn, g, t), -1.0}};
            add_coupled(lhs, {{L.at(L.x_pg, g, t), 1.0}}, {}, 0.0, 0.0, kInf);
            Ents neg = lhs;
            for (auto& [c, v] : neg) v = -v;
            add_coupled(neg, {{L.at(L.x_pg, g, t), -1.0}}, {}, 0.0, 0.0, kInf);
        }
    for (int t = 0; t < T; ++t) {
        Ents lhs{{L.at(L.psl, 0, t), 1.0}};
        for (int g = 0; g < L.n_gen; ++g) {
            lhs.emplace_back(L.at(L.pg_up, g, t), 1.0);
            lhs.emplace_back(L.at(L.pg_dn, g, t), 1.0);
        }
        for (int i = 0; i < L.n_dg; ++i) {
            lhs.emplace_back(L.at(L.pdg_up, i, t), 1.0);
            lhs.emplace_back(L.at(L.pdg_dn, i, t), 1.0);
        }
        for (int s = 0; s < L.n_store; ++s) {
            lhs.emplace_back(L.at(L.pdch, s, t), 1.0);
            lhs.emplace_back(L.at(L.pch, s, t), -1.0);
        }
        add_coupled(lhs, {{L.at(L.x_pfl, 0, t), 1.0}}, {}, 0.0, 0.0, kInf);
        Ents neg = lhs;
        for (auto& [c, v] : neg) v = -v;
        add_coupled(neg, {{L.at(L.x_pfl, 0, t), -1.0}}, {}, 0.0, 0.0, kInf);
    }

    out.layout = L;
    return out;
}

}  // namespace aromip
