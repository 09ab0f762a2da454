#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "aromip/lp_model.hpp"

namespace aromip {

struct SimplexParams {
    double feas_tol = 1e-7;
    double opt_tol = 1e-7;
    double pivot_tol = 1e-9;
    long max_iterations = 0;      // 0: derived from model size
    long degenerate_limit = 1000; // switch to Bland's rule after this many stalls
    int refactor_interval = 64;
    bool presolve = true;
    std::ostream* iteration_log = nullptr;
};

// Basis status codes used in LpSolution::basis (structural columns first,
// then one logical column per row).
enum BasisStatus : signed char {
    kAtLower = 0,
    kAtUpper = 1,
    kBasic = 2,
    kNonbasicFree = 3,
};

// Solves the LP with presolve. Deterministic for identical inputs.
LpSolution solve_lp(const LpModel& model, const SimplexParams& params = {});

// Core solve without presolve; accepts an optional warm-start basis
// (n + m status codes). An unusable basis is repaired silently.
LpSolution solve_lp_core(const LpModel& model, const SimplexParams& params,
                         const std::vector<signed char>* warm_basis);

// Presolve that survives repeated bound changes on the reduced model; used by
// the branch-and-bound driver so node LPs stay small and warm-startable.
class PresolvedLp {
public:
    // integer_cols: columns whose derived bounds may be rounded inward
    static PresolvedLp build(const LpModel& model, double feas_tol = 1e-9,
                             const std::vector<int>* integer_cols = nullptr);

    const LpModel& reduced() const { return reduced_; }
    bool infeasible() const { return infeasible_; }
    // -1 when the column was eliminated.
    int reduced_col(int orig_col) const { return col_map_[static_cast<std::size_t>(orig_col)]; }
    double eliminated_value(int orig_col) const { return col_value_[static_cast<std::size_t>(orig_col)]; }

    // Maps a solution of reduced() back to the original model.
    LpSolution postsolve(const LpSolution& sol, const LpModel& original) const;

private:
    LpModel reduced_;
    bool infeasible_ = false;
    bool unbounded_ = false;
    std::vector<int> col_map_;      // orig col -> reduced col or -1
    std::vector<double> col_value_; // value of eliminated columns
    std::vector<int> row_map_;      // orig row -> reduced row or -1
    struct SingletonRow {
        int row;
        int col; // original column index
        double coef;
        RowSense sense;
    };
    std::vector<SingletonRow> singleton_rows_; // in removal order
    friend class PresolveBuilder;
};

}  // namespace aromip
