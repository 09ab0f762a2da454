#include <algorithm>
#include <cmath>

#include "aromip/simplex.hpp"

namespace aromip {

namespace {

constexpr double kDualTol = 1e-7;

bool sense_allows(RowSense s, double y, bool minimize) {
    const double v = minimize ? y : -y;
    switch (s) {
        case RowSense::GreaterEqual:
            return v >= -kDualTol;
        case RowSense::LessEqual:
            return v <= kDualTol;
        case RowSense::Equal:
            return true;
    }
    return false;
}

}  // namespace

class PresolveBuilder {
public:
    static PresolvedLp run(const LpModel& model, double feas_tol, const std::vector<int>* integer_cols) {
        model.check_consistent();
        PresolvedLp out;
        const int n = model.num_cols();
        const int m = model.num_rows();
        out.col_map_.assign(n, -2);  // -2: undecided, -1: eliminated
        out.col_value_.assign(n, 0.0);
        out.row_map_.assign(m, -2);

        std::vector<char> is_int(n, 0);
        if (integer_cols)
            for (int c : *integer_cols)
                if (c >= 0 && c < n) is_int[c] = 1;
        std::vector<double> lo = model.col_lower, up = model.col_upper;
        std::vector<double> rhs = model.rhs;
        std::vector<char> col_alive(n, 1), row_alive(m, 1);
        std::vector<int> row_nnz(m, 0);
        const SparseMatrix cols = model.mat.transposed();  // column-wise access
        model.mat.for_each([&](int r, int, double) { ++row_nnz[r]; });
        double extra_const = 0.0;

        auto fix_col = [&](int j, double v) {
            col_alive[j] = 0;
            out.col_map_[j] = -1;
            out.col_value_[j] = v;
            extra_const += model.obj[j] * v;
            cols.for_row(j, [&](int r, double a) {
                if (!row_alive[r]) return;
                rhs[r] -= a * v;
                --row_nnz[r];
            });
        };

        bool changed = true;
        while (changed && !out.infeasible_) {
            changed = false;
            // fixed and empty columns
            for (int j = 0; j < n && !out.infeasible_; ++j) {
                if (!col_alive[j]) continue;
                if (up[j] - lo[j] < 1e-12) {
                    fix_col(j, 0.5 * (lo[j] + up[j]));
                    changed = true;
                    continue;
                }
                bool empty = true;
                cols.for_row(j, [&](int r, double) {
                    if (row_alive[r]) empty = false;
                });
                if (empty) {
                    const double c = model.sense == ObjSense::Maximize ? -model.obj[j] : model.obj[j];
                    double v;
                    if (c > 0.0)
                        v = lo[j];
                    else if (c < 0.0)
                        v = up[j];
                    else
                        v = std::isfinite(lo[j]) ? lo[j] : (std::isfinite(up[j]) ? up[j] : 0.0);
                    if (std::isfinite(v)) {
                        fix_col(j, v);
                        changed = true;
                    }
                    // otherwise keep the column: the solver reports the ray
                }
            }
            // empty and singleton rows
            for (int r = 0; r < m && !out.infeasible_; ++r) {
                if (!row_alive[r]) continue;
                if (row_nnz[r] == 0) {
                    const double g = rhs[r];
                    const bool ok = (model.row_sense[r] == RowSense::LessEqual && g >= -feas_tol) ||
                                    (model.row_sense[r] == RowSense::GreaterEqual && g <= feas_tol) ||
                                    (model.row_sense[r] == RowSense::Equal && std::abs(g) <= feas_tol);
                    if (!ok) {
                        out.infeasible_ = true;
                        break;
                    }
                    row_alive[r] = 0;
                    out.row_map_[r] = -1;
                    changed = true;
                    continue;
                }
                if (row_nnz[r] != 1) continue;
                int j = -1;
                double a = 0.0;
                model.mat.for_row(r, [&](int c, double v) {
                    if (col_alive[c]) {
                        j = c;
                        a = v;
                    }
                });
                if (j < 0) continue;  // stale count; repaired next pass
                const double t = rhs[r] / a;
                RowSense s = model.row_sense[r];
                if (a < 0.0 && s != RowSense::Equal)
                    s = (s == RowSense::LessEqual) ? RowSense::GreaterEqual : RowSense::LessEqual;
                if (s == RowSense::GreaterEqual || s == RowSense::Equal) lo[j] = std::max(lo[j], t);
                if (s == RowSense::LessEqual || s == RowSense::Equal) up[j] = std::min(up[j], t);
                if (is_int[j]) {
                    lo[j] = std::ceil(lo[j] - 1e-6);
                    up[j] = std::floor(up[j] + 1e-6);
                }
                if (lo[j] > up[j]) {
                    if (!is_int[j] && lo[j] - up[j] <= feas_tol) {
                        lo[j] = up[j] = 0.5 * (lo[j] + up[j]);
                    } else {
                        out.infeasible_ = true;
                        break;
                    }
                }
                row_alive[r] = 0;
                out.row_map_[r] = -1;
                out.singleton_rows_.push_back({r, j, a, model.row_sense[r]});
                changed = true;
            }
        }
        if (out.infeasible_) return out;

        // assemble the reduced model
        LpModel& red = out.reduced_;
        red.sense = model.sense;
        red.obj_constant = model.obj_constant + extra_const;
        for (int j = 0; j < n; ++j) {
            if (!col_alive[j]) continue;
            out.col_map_[j] = red.add_col(model.col_names[j], lo[j], up[j], model.obj[j]);
        }
        for (int r = 0; r < m; ++r) {
            if (!row_alive[r]) continue;
            out.row_map_[r] = red.add_row(model.row_names[r], model.row_sense[r], rhs[r]);
        }
        model.mat.for_each([&](int r, int c, double v) {
            const int rr = out.row_map_[r], cc = out.col_map_[c];
            if (rr >= 0 && cc >= 0) red.set_entry(rr, cc, v);
        });
        return out;
    }
};

PresolvedLp PresolvedLp::build(const LpModel& model, double feas_tol,
                               const std::vector<int>* integer_cols) {
    return PresolveBuilder::run(model, feas_tol, integer_cols);
}

LpSolution PresolvedLp::postsolve(const LpSolution& sol, const LpModel& original) const {
    LpSolution out;
    out.status = sol.status;
    out.iterations = sol.iterations;
    out.objective = sol.objective;
    if (sol.status != SolveStatus::Optimal) return out;

    const int n = original.num_cols();
    const int m = original.num_rows();
    out.primal.resize(n);
    for (int j = 0; j < n; ++j)
        out.primal[j] = col_map_[j] >= 0 ? sol.primal[col_map_[j]] : col_value_[j];

    out.dual_rows.assign(m, 0.0);
    for (int r = 0; r < m; ++r)
        if (row_map_[r] >= 0) out.dual_rows[r] = sol.dual_rows[row_map_[r]];

    // Recover duals for removed singleton rows: undo removals in reverse
    // order, pushing the residual reduced cost of the row's column onto the
    // row when it is binding and the implied dual sign is admissible. Reverse
    // order matters: a row removed later can involve a column fixed earlier,
    // so its dual must be settled before that column's own singleton row.
    if (!singleton_rows_.empty()) {
        const SparseMatrix cols = original.mat.transposed();
        const bool minimize = original.sense == ObjSense::Minimize;
        for (auto it = singleton_rows_.rbegin(); it != singleton_rows_.rend(); ++it) {
            const SingletonRow& s = *it;
            double d = original.obj[s.col];
            cols.for_row(s.col, [&](int r, double a) { d -= a * out.dual_rows[r]; });
            if (std::abs(d) <= kDualTol) continue;
            double act = 0.0;
            original.mat.for_row(s.row, [&](int c, double v) { act += v * out.primal[c]; });
            if (s.sense != RowSense::Equal && std::abs(act - original.rhs[s.row]) > 1e-6) continue;
            if (!sense_allows(s.sense, d / s.coef, minimize)) continue;
            out.dual_rows[s.row] = d / s.coef;
        }
    }

    out.reduced_costs.resize(n);
    {
        const SparseMatrix cols = original.mat.transposed();
        for (int j = 0; j < n; ++j) {
            double d = original.obj[j];
            cols.for_row(j, [&](int r, double a) { d -= a * out.dual_rows[r]; });
            out.reduced_costs[j] = d;
        }
    }

    // warm-startable basis for the original shape: eliminated columns sit at a
    // bound, removed rows get a basic logical
    out.basis.assign(n + m, kAtLower);
    for (int j = 0; j < n; ++j) {
        if (col_map_[j] >= 0)
            out.basis[j] = sol.basis.empty() ? kAtLower : sol.basis[col_map_[j]];
        else
            out.basis[j] = std::isfinite(original.col_lower[j]) ? kAtLower : kAtUpper;
    }
    const int red_n = reduced_.num_cols();
    for (int r = 0; r < m; ++r) {
        if (row_map_[r] >= 0)
            out.basis[n + r] =
                sol.basis.empty() ? kBasic : sol.basis[red_n + row_map_[r]];
        else
            out.basis[n + r] = kBasic;
    }
    return out;
}

}  // namespace aromip
