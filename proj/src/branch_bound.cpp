#include "aromip/branch_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <queue>

namespace aromip {

namespace {

struct Node {
    std::vector<std::pair<int, double>> fixes;  // reduced col -> value
    double bound_score;                         // parent LP value, minimize orientation
    long id;
    std::vector<signed char> basis;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound_score != b.bound_score) return a.bound_score > b.bound_score;
        return a.id > b.id;  // FIFO on ties for determinism
    }
};

}  // namespace

MipSolution solve_mip(const MipModel& model, const MipParams& params) {
    model.base.check_consistent();
    for (int b : model.binary_cols) {
        if (b < 0 || b >= model.base.num_cols()) throw DimensionMismatch("binary column out of range");
        if (model.base.col_lower[b] < -params.int_tol || model.base.col_upper[b] > 1.0 + params.int_tol)
            throw Error("binary column '" + model.base.col_names[b] + "' lacks [0,1] bounds");
    }
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count(); };
    const double sgn = model.base.sense == ObjSense::Maximize ? -1.0 : 1.0;

    MipSolution out;
    const PresolvedLp pre = PresolvedLp::build(model.base, 1e-9, &model.binary_cols);
    if (pre.infeasible()) {
        out.status = MipStatus::Infeasible;
        out.objective = sgn * kInf;
        out.best_bound = sgn * kInf;
        return out;
    }
    // binaries surviving presolve, in index order
    std::vector<int> bins;
    for (int b : model.binary_cols) {
        const int rb = pre.reduced_col(b);
        if (rb >= 0) {
            bins.push_back(rb);
        } else if (std::abs(pre.eliminated_value(b) - std::round(pre.eliminated_value(b))) > params.int_tol) {
            out.status = MipStatus::Infeasible;
            out.objective = sgn * kInf;
            out.best_bound = sgn * kInf;
            return out;
        }
    }
    std::sort(bins.begin(), bins.end());
    bins.erase(std::unique(bins.begin(), bins.end()), bins.end());

    LpModel work = pre.reduced();
    const std::vector<double> root_lower = work.col_lower, root_upper = work.col_upper;
    SimplexParams lp_params = params.lp;
    lp_params.presolve = false;

    double inc_score = kInf;
    LpSolution inc_sol;
    bool have_inc = false;

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long next_id = 0;
    open.push(Node{{}, -kInf, next_id++, {}});
    long nodes = 0;
    bool hit_node_limit = false, hit_time_limit = false;

    auto prune_score = [&] { return inc_score - params.gap_tol * std::max(1.0, std::abs(inc_score)); };

    bool have_dive = false;
    Node dive;
    while (have_dive || !open.empty()) {
        Node cur;
        if (have_dive) {
            cur = std::move(dive);
            have_dive = false;
        } else {
            cur = open.top();
            open.pop();
        }
        if (cur.bound_score >= prune_score()) continue;
        if (params.node_limit > 0 && nodes >= params.node_limit) {
            hit_node_limit = true;
            break;
        }
        if (params.time_limit > 0.0 && elapsed() > params.time_limit) {
            hit_time_limit = true;
            break;
        }
        ++nodes;

        work.col_lower = root_lower;
        work.col_upper = root_upper;
        for (const auto& [c, v] : cur.fixes) {
            work.col_lower[c] = v;
            work.col_upper[c] = v;
        }
        LpSolution rel = solve_lp_core(work, lp_params, cur.basis.empty() ? nullptr : &cur.basis);
        if (rel.status == SolveStatus::Infeasible) continue;
        if (rel.status == SolveStatus::Unbounded)
            throw Error("relaxation unbounded; binary model has no finite optimum");
        const double score = sgn * rel.objective;
        if (params.node_log)
            (*params.node_log) << "node " << nodes << " depth " << cur.fixes.size() << " bound " << rel.objective
                               << '\n';
        if (score >= prune_score()) continue;

        // most fractional binary, smallest index on ties
        auto frac_of = [&](int c) {
            const double v = rel.primal[c];
            return std::min(v - std::floor(v), std::ceil(v) - v);
        };
        double max_frac = 0.0;
        for (int c : bins) max_frac = std::max(max_frac, frac_of(c));
        int branch_col = -1;
        if (max_frac > params.int_tol) {
            for (int c : bins) {
                if (frac_of(c) >= max_frac - 1e-12) {
                    branch_col = c;
                    break;
                }
            }
        }

        if (branch_col < 0) {
            // integral: new incumbent
            if (score < inc_score) {
                inc_score = score;
                inc_sol = rel;
                have_inc = true;
            }
            continue;
        }
        const double v = rel.primal[branch_col];
        const double near = std::round(std::clamp(v, 0.0, 1.0));
        Node a{cur.fixes, score, next_id++, rel.basis};
        a.fixes.emplace_back(branch_col, near);
        Node b{cur.fixes, score, next_id++, rel.basis};
        b.fixes.emplace_back(branch_col, 1.0 - near);
        open.push(std::move(b));
        dive = std::move(a);
        have_dive = true;
    }

    // remaining global bound
    double open_bound = kInf;
    if (have_dive) open_bound = std::min(open_bound, dive.bound_score);
    while (!open.empty()) {
        open_bound = std::min(open_bound, open.top().bound_score);
        open.pop();
    }
    out.nodes = nodes;
    if (!have_inc) {
        if (hit_node_limit || hit_time_limit) {
            out.status = hit_node_limit ? MipStatus::NodeLimit : MipStatus::GapLimit;
            out.objective = sgn * kInf;
            out.best_bound = sgn * (open_bound == kInf ? kInf : open_bound);
            out.gap = kInf;
        } else {
            out.status = MipStatus::Infeasible;
            out.objective = sgn * kInf;
            out.best_bound = sgn * kInf;
        }
        return out;
    }
    const double bound_score = std::min(inc_score, open_bound == kInf ? inc_score : open_bound);
    out.objective = sgn * inc_score;
    out.best_bound = sgn * bound_score;
    out.gap = (inc_score - bound_score) / std::max(1.0, std::abs(inc_score));
    if (hit_node_limit)
        out.status = MipStatus::NodeLimit;
    else if (hit_time_limit && out.gap > params.gap_tol)
        out.status = MipStatus::GapLimit;
    else
        out.status = MipStatus::Optimal;
    const LpSolution full = pre.postsolve(inc_sol, model.base);
    out.primal = full.primal;
    // snap binaries
    for (int b : model.binary_cols) out.primal[b] = std::round(out.primal[b]);
    return out;
}

}  // namespace aromip
