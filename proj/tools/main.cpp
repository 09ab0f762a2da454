#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include "aromip/branch_bound.hpp"
#include "aromip/json_io.hpp"
#include "aromip/oracle.hpp"
#include "aromip/powergrid.hpp"
#include "aromip/reformulate.hpp"

using namespace aromip;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;     // parse / validation failure
constexpr int kExitInfeasible = 2;
constexpr int kExitLimit = 3;     // node / gap limit hit
constexpr int kExitOracleCap = 4;

struct CommonOpts {
    std::string instance_path, case_path, series_path, out_path;
    int periods = 24;
    double r_frac = 1.0;
    double gap = 1e-6;
    std::string penalty = "absolute";
    std::string storage_subset;  // comma-separated indices; empty string when unset
    bool storage_subset_given = false;
    long seed = -1;  // >= 0 pins wall times to zero for byte-stable artifacts
};

std::vector<int> parse_subset(const std::string& text) {
    std::vector<int> out;
    std::istringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        out.push_back(std::stoi(cell));
    }
    return out;
}

GridCase apply_storage_subset(GridCase gc, const std::vector<int>& keep) {
    std::vector<Storage> kept;
    for (int i : keep) {
        if (i < 0 || i >= static_cast<int>(gc.storages.size()))
            throw ParseError("storage subset index " + std::to_string(i) + " out of range");
        kept.push_back(gc.storages[i]);
    }
    gc.storages = std::move(kept);
    return gc;
}

WcaroInstance load_any_instance(const CommonOpts& opt, double r_override, std::string* name) {
    if (!opt.instance_path.empty()) {
        WcaroInstance inst = load_instance(opt.instance_path);
        if (name) *name = inst.name.empty() ? opt.instance_path : inst.name;
        return inst;
    }
    GridCase gc = parse_case(opt.case_path);
    if (opt.storage_subset_given) gc = apply_storage_subset(gc, parse_subset(opt.storage_subset));
    const TimeSeries ts = load_timeseries(opt.series_path, opt.periods);
    PowerBuildParams pp;
    pp.R = r_override;
    pp.penalty_convention =
        opt.penalty == "signed" ? PenaltyConvention::Signed : PenaltyConvention::Absolute;
    if (name) *name = gc.name;
    return build_power_instance(gc, ts, pp).instance;
}

struct SolveOutcome {
    MipSolution sol;
    SingleLevelModel model;
    double wall_time = 0.0;
};

SolveOutcome run_solve(const WcaroInstance& inst, double gap) {
    const ValidationReport rep = validate_instance(inst);
    if (!rep.ok) {
        std::string msg = "instance validation failed:";
        for (const auto& [sev, text] : rep.issues)
            if (sev == Severity::Error) msg += "\n  " + text;
        throw Error(msg);
    }
    SolveOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    out.model = build_single_level(inst);
    MipParams mp;
    mp.gap_tol = gap;
    out.sol = solve_mip(out.model.mip, mp);
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

json run_record(const std::string& name, const json& params, const SolveOutcome& oc,
                bool zero_time) {
    return json{{"instance", name},
                {"params", params},
                {"objective", oc.sol.objective},
                {"best_bound", oc.sol.best_bound},
                {"gap", oc.sol.gap},
                {"wall_time", zero_time ? 0.0 : oc.wall_time},
                {"nodes", oc.sol.nodes}};
}

void emit(const json& doc, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << doc.dump(1) << '\n';
    } else {
        std::ofstream out(out_path);
        if (!out) throw ParseError("cannot open '" + out_path + "' for writing");
        out << doc.dump(1) << '\n';
    }
}

int status_exit(MipStatus s) {
    switch (s) {
        case MipStatus::Optimal: return kExitOk;
        case MipStatus::Infeasible: return kExitInfeasible;
        default: return kExitLimit;
    }
}

int thread_budget(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("AROMIP_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

int cmd_solve(const CommonOpts& opt) {
    std::string name;
    const WcaroInstance inst = load_any_instance(opt, opt.r_frac, &name);
    const SolveOutcome oc = run_solve(inst, opt.gap);
    json doc = run_record(name, json{{"R", opt.r_frac}, {"gap", opt.gap}}, oc, opt.seed >= 0);
    doc["solution"] = solution_to_json(oc.sol);
    emit(doc, opt.out_path);
    return status_exit(oc.sol.status);
}

int cmd_check(const CommonOpts& opt, double tol) {
    std::string name;
    const WcaroInstance inst = load_any_instance(opt, opt.r_frac, &name);
    const SolveOutcome oc = run_solve(inst, opt.gap);
    if (oc.sol.status != MipStatus::Optimal) return status_exit(oc.sol.status);
    const CertReport rep = certify(inst, oc.model, oc.sol, tol);
    json doc = run_record(name, json{{"tol", tol}}, oc, opt.seed >= 0);
    doc["cert"] = cert_to_json(rep);
    emit(doc, opt.out_path);
    return rep.margin >= -tol ? kExitOk : kExitInfeasible;
}

int cmd_sweep(const CommonOpts& opt, const std::string& grid_text, int threads) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    {
        std::istringstream ss(grid_text);
        char c1 = 0, c2 = 0;
        if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':')
            throw ParseError("--r-grid expects a:b:step");
        if (step <= 0.0 || hi < lo) throw ParseError("--r-grid needs step > 0 and b >= a");
    }
    std::vector<double> points;
    for (double r = lo; r <= hi + 1e-9; r += step) points.push_back(std::min(r, 1.0));

    const int budget = thread_budget(threads);
    std::vector<SolveOutcome> results(points.size());
    std::vector<std::future<void>> running;
    std::size_t next = 0;
    auto launch = [&](std::size_t i) {
        running.push_back(std::async(std::launch::async, [&, i] {
            const WcaroInstance inst = load_any_instance(opt, points[i], nullptr);
            results[i] = run_solve(inst, opt.gap);
        }));
    };
    while (next < points.size() || !running.empty()) {
        while (next < points.size() && static_cast<int>(running.size()) < budget) launch(next++);
        running.front().get();
        running.erase(running.begin());
    }

    std::ostringstream csv;
    csv << "R,objective,gap,wall_time\n";
    char line[160];
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double wt = opt.seed >= 0 ? 0.0 : results[i].wall_time;
        std::snprintf(line, sizeof line, "%.6f,%.6f,%.3e,%.3f\n", points[i],
                      results[i].sol.objective, results[i].sol.gap, wt);
        csv << line;
    }
    if (opt.out_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(opt.out_path);
        if (!out) throw ParseError("cannot open '" + opt.out_path + "' for writing");
        out << csv.str();
    }
    for (const SolveOutcome& oc : results)
        if (oc.sol.status != MipStatus::Optimal) return status_exit(oc.sol.status);
    return kExitOk;
}

int cmd_bench(const CommonOpts& opt, const std::string& suite_path) {
    std::ifstream in(suite_path);
    if (!in) throw ParseError("cannot open '" + suite_path + "'");
    json suite;
    try {
        suite = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(suite_path + ": " + e.what());
    }
    const auto slash = suite_path.find_last_of('/');
    const std::string base_dir = slash == std::string::npos ? "" : suite_path.substr(0, slash + 1);
    std::ostringstream csv;
    csv << "buses,n_bin,wall_time,objective\n";
    for (const json& entry : suite.at("entries")) {
        CommonOpts eo = opt;
        eo.case_path = base_dir + entry.at("case").get<std::string>();
        eo.series_path = base_dir + entry.at("timeseries").get<std::string>();
        eo.periods = entry.value("periods", 24);
        if (entry.contains("storage_subset")) {
            eo.storage_subset_given = true;
            eo.storage_subset.clear();
            for (const json& i : entry.at("storage_subset"))
                eo.storage_subset += (eo.storage_subset.empty() ? "" : ",") +
                                     std::to_string(i.get<int>());
        }
        GridCase gc = parse_case(eo.case_path);
        const WcaroInstance inst = load_any_instance(eo, entry.value("R", 1.0), nullptr);
        const SolveOutcome oc = run_solve(inst, entry.value("gap", opt.gap));
        char line[160];
        std::snprintf(line, sizeof line, "%d,%d,%.3f,%.6f\n", gc.num_buses, inst.third.n_bin,
                      opt.seed >= 0 ? 0.0 : oc.wall_time, oc.sol.objective);
        csv << line;
    }
    if (opt.out_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(opt.out_path);
        if (!out) throw ParseError("cannot open '" + opt.out_path + "' for writing");
        out << csv.str();
    }
    return kExitOk;
}

void add_input_flags(CLI::App* cmd, CommonOpts& opt, bool allow_instance) {
    if (allow_instance) cmd->add_option("--instance", opt.instance_path, "instance JSON path");
    cmd->add_option("--case", opt.case_path, "grid case path (JSON or matpower-style)");
    cmd->add_option("--timeseries", opt.series_path, "time-series CSV path");
    cmd->add_option("--periods", opt.periods, "number of periods in the series");
    cmd->add_option("--penalty", opt.penalty, "penalty convention: absolute|signed")
        ->check(CLI::IsMember({"absolute", "signed"}));
    cmd->add_option("--storage-subset", opt.storage_subset,
                    "comma-separated storage indices to keep (\"\" = none)")
        ->expected(0, 1)
        ->trigger_on_parse()
        ->each([&opt](const std::string&) { opt.storage_subset_given = true; });
    cmd->add_option("--out", opt.out_path, "output file (default stdout)");
    cmd->add_option("--gap", opt.gap, "relative MIP gap tolerance");
    cmd->add_option("--seed", opt.seed, "pins wall times to zero for byte-stable outputs");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weakly-connected trilevel robust optimization toolkit"};
    app.require_subcommand(1);
    CommonOpts opt;
    double tol = 1e-6;
    std::string grid_text = "0:1:0.25";
    std::string suite_path;
    int threads = 0;

    CLI::App* solve = app.add_subcommand("solve", "solve an instance to optimality");
    add_input_flags(solve, opt, true);
    solve->add_option("--R", opt.r_frac, "forecast-coverage fraction in [0,1]");

    CLI::App* check = app.add_subcommand("check", "solve and certify against brute force");
    add_input_flags(check, opt, true);
    check->add_option("--tol", tol, "certification tolerance");

    CLI::App* sweep = app.add_subcommand("sweep", "solve over a grid of R values");
    add_input_flags(sweep, opt, false);
    sweep->add_option("--r-grid", grid_text, "grid a:b:step");
    sweep->add_option("--threads", threads, "concurrent solves (default: AROMIP_THREADS or cores)");

    CLI::App* bench = app.add_subcommand("bench", "time a suite of case fixtures");
    bench->add_option("--suite", suite_path, "suite JSON path")->required();
    bench->add_option("--out", opt.out_path, "output CSV (default stdout)");
    bench->add_option("--gap", opt.gap, "relative MIP gap tolerance");
    bench->add_option("--seed", opt.seed, "pins wall times to zero for byte-stable outputs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(solve) || app.got_subcommand(check)) {
            const bool has_instance = !opt.instance_path.empty();
            const bool has_case = !opt.case_path.empty() && !opt.series_path.empty();
            if (has_instance == has_case)
                throw ParseError("provide exactly one of --instance or --case/--timeseries");
        }
        if (app.got_subcommand(solve)) return cmd_solve(opt);
        if (app.got_subcommand(check)) return cmd_check(opt, tol);
        if (app.got_subcommand(sweep)) {
            if (opt.case_path.empty() || opt.series_path.empty())
                throw ParseError("sweep needs --case and --timeseries");
            return cmd_sweep(opt, grid_text, threads);
        }
        return cmd_bench(opt, suite_path);
    } catch (const TooLarge& e) {
        std::cerr << "error: oracle cap exceeded: " << e.what() << '\n';
        return kExitOracleCap;
    } catch (const InfeasibleFirstLevel& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
