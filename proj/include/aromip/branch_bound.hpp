#pragma once

#include <iosfwd>

#include "aromip/lp_model.hpp"
#include "aromip/simplex.hpp"

namespace aromip {

struct MipParams {
    double gap_tol = 1e-6;
    double int_tol = 1e-6;
    long node_limit = 0;       // 0: unlimited
    double time_limit = 0.0;   // seconds, 0: unlimited
    SimplexParams lp;
    std::ostream* node_log = nullptr;
};

// Exact solver for LP models with binary columns. Best-bound search with
// depth-first dives, most-fractional branching (smallest index on ties) and
// warm starts from the parent basis. Deterministic for identical inputs.
MipSolution solve_mip(const MipModel& model, const MipParams& params = {});

}  // namespace aromip
