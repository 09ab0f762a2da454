#pragma once

#include <vector>

#include "aromip/lp_model.hpp"

namespace aromip {

// Index correspondence between a primal LP and its dual.
struct DualMap {
    std::vector<int> row_to_dual_col;  // primal row -> dual column
    std::vector<int> col_to_dual_row;  // primal column -> dual row
};

// Exact LP dual. Finite column bounds other than sign restrictions
// (x >= 0, x <= 0, free) are first expanded into explicit rows, so every
// primal column maps to a dual row and every primal row (plus each expanded
// bound row) maps to a dual column. Strong duality: if either problem has a
// finite optimum, both do and the values coincide.
LpModel dualize_lp(const LpModel& primal, DualMap* map = nullptr);

}  // namespace aromip
