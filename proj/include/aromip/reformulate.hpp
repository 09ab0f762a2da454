#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aromip/dualize.hpp"
#include "aromip/instance.hpp"
#include "aromip/lp_model.hpp"

namespace aromip {

// Column/row layout of the adversarial relaxation LP, for traceability and
// structural checks after dualization.
struct McCormickLayout {
    std::vector<int> alpha_cols;              // per free third-level row
    std::vector<int> beta_cols;               // per coupled row
    std::vector<int> gamma_rows, delta_rows;  // beta upper/lower bound rows (-1 if absent)
    std::vector<int> h_cols, eta_cols;        // eta_cols[r] = -1 for slackless rows
    std::vector<int> omega_rows;              // uncertainty rows
    std::vector<int> dualfeas_rows;           // per y coordinate
    struct EnvelopeTerm {
        int i, j;          // uncertainty coordinate, coupled row
        double bh;         // (B_h)_{ij}
        int kappa_col;
        int rho_cols[4];
        int env_rows[4];
    };
    std::vector<EnvelopeTerm> terms;
};

// Third-level LP at fixed (x, h), optionally with the binary coordinates
// pinned through explicit fixing rows.
LpModel build_third_level_primal(const WcaroInstance& inst, const std::vector<double>& x,
                                 const std::vector<double>& h,
                                 const std::vector<int>* y_fix = nullptr);

// Adversarial relaxation LP: dual of the continuous third level, merged with
// the uncertainty maximization, bilinear terms h*beta replaced by kappa with
// four-row McCormick envelopes. With x given the objective is fully numeric;
// without it the B_x terms are left for build_single_level to merge.
LpModel build_mccormick_relaxation(const WcaroInstance& inst,
                                   const std::vector<double>* x = nullptr,
                                   McCormickLayout* layout = nullptr);

struct SingleLevelModel {
    MipModel mip;
    std::vector<int> x_cols;  // structural first-level vars -> model columns
    std::vector<int> y_cols;  // third-level coordinates -> model columns
};

// Full single-level reformulation: dualize the McCormick relaxation, merge
// first-level variables, rows and objective (quadratic terms piecewise-
// linearized first), and re-impose binaries -- or fix them to y_fix, in which
// case the result carries no binary columns.
SingleLevelModel build_single_level(const WcaroInstance& inst,
                                    const std::vector<int>* y_fix = nullptr,
                                    int pwl_segments = 16);

// Writes the model in LP interchange text format.
std::string export_lp_format(const LpModel& model, const std::vector<int>& binary_cols = {});

}  // namespace aromip
