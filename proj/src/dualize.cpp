#include "aromip/dualize.hpp"

#include <cmath>

namespace aromip {

namespace {
enum class ColClass { NonNeg, NonPos, Free };
}

LpModel dualize_lp(const LpModel& primal, DualMap* map) {
    primal.check_consistent();
    const int n = primal.num_cols();
    const int m = primal.num_rows();
    const bool primal_min = primal.sense == ObjSense::Minimize;

    std::vector<ColClass> cls(n);
    struct BoundRow {
        int col;
        double rhs;
        bool is_lower;  // x >= rhs vs x <= rhs
    };
    std::vector<BoundRow> bound_rows;
    for (int j = 0; j < n; ++j) {
        const double lo = primal.col_lower[j], up = primal.col_upper[j];
        if (lo >= 0.0)
            cls[j] = ColClass::NonNeg;
        else if (up <= 0.0)
            cls[j] = ColClass::NonPos;
        else
            cls[j] = ColClass::Free;
        if (std::isfinite(lo) && !(cls[j] == ColClass::NonNeg && lo == 0.0))
            bound_rows.push_back({j, lo, true});
        if (std::isfinite(up) && !(cls[j] == ColClass::NonPos && up == 0.0))
            bound_rows.push_back({j, up, false});
    }

    LpModel dual;
    dual.sense = primal_min ? ObjSense::Maximize : ObjSense::Minimize;
    dual.obj_constant = primal.obj_constant;

    if (map) {
        map->row_to_dual_col.assign(m, -1);
        map->col_to_dual_row.assign(n, -1);
    }

    // one dual column per primal row
    for (int r = 0; r < m; ++r) {
        double lo = -kInf, up = kInf;
        switch (primal.row_sense[r]) {
            case RowSense::GreaterEqual:
                if (primal_min)
                    lo = 0.0;
                else
                    up = 0.0;
                break;
            case RowSense::LessEqual:
                if (primal_min)
                    up = 0.0;
                else
                    lo = 0.0;
                break;
            case RowSense::Equal:
                break;
        }
        const int dc = dual.add_col("y_" + primal.row_names[r], lo, up, primal.rhs[r]);
        if (map) map->row_to_dual_col[r] = dc;
    }
    // and one per expanded bound row
    for (const BoundRow& b : bound_rows) {
        double lo = -kInf, up = kInf;
        const bool ge = b.is_lower;  // expanded row sense
        if (ge == primal_min)
            lo = 0.0;
        else
            up = 0.0;
        dual.add_col((b.is_lower ? "yb_lo_" : "yb_up_") + primal.col_names[b.col], lo, up, b.rhs);
    }

    // one dual row per primal column
    for (int j = 0; j < n; ++j) {
        RowSense s;
        switch (cls[j]) {
            case ColClass::NonNeg:
                s = primal_min ? RowSense::LessEqual : RowSense::GreaterEqual;
                break;
            case ColClass::NonPos:
                s = primal_min ? RowSense::GreaterEqual : RowSense::LessEqual;
                break;
            default:
                s = RowSense::Equal;
                break;
        }
        const int dr = dual.add_row("d_" + primal.col_names[j], s, primal.obj[j]);
        if (map) map->col_to_dual_row[j] = dr;
    }

    primal.mat.for_each([&](int r, int c, double v) { dual.set_entry(c, r, v); });
    for (std::size_t k = 0; k < bound_rows.size(); ++k)
        dual.set_entry(bound_rows[k].col, m + static_cast<int>(k), 1.0);

    return dual;
}

}  // namespace aromip
