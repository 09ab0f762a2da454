#include "aromip/reformulate.hpp"

#include <cmath>
#include <sstream>

namespace aromip {

namespace {

std::string idx(const std::string& base, int i) { return base + "_" + std::to_string(i); }

void require(bool cond, const std::string& what) {
    if (!cond) throw Error("single-level structure check failed: " + what);
}

}  // namespace

LpModel build_third_level_primal(const WcaroInstance& inst, const std::vector<double>& x,
                                 const std::vector<double>& h, const std::vector<int>* y_fix) {
    const ThirdLevel& t = inst.third;
    if (static_cast<int>(x.size()) != inst.first.n_x)
        throw DimensionMismatch("x length != n_x");
    if (static_cast<int>(h.size()) != inst.omega.dim())
        throw DimensionMismatch("h length != |I|");
    if (y_fix && static_cast<int>(y_fix->size()) != t.n_bin)
        throw DimensionMismatch("binary fixing length != n_bin");

    LpModel lp;
    lp.sense = ObjSense::Minimize;
    for (int k = 0; k < t.n_y(); ++k) lp.add_col(idx("y", k), -kInf, kInf, t.c[k]);
    for (int r = 0; r < t.num_free(); ++r)
        lp.add_row(idx("free", r), RowSense::GreaterEqual, t.b_free[r]);
    t.a_free.for_each([&](int r, int c, double v) { lp.set_entry(r, c, v); });

    std::vector<double> rhs = t.b0, tmp;
    t.b_x.multiply(x, tmp);
    for (int j = 0; j < t.num_coupled(); ++j) rhs[j] += tmp[j];
    t.b_h.multiply(h, tmp);
    for (int j = 0; j < t.num_coupled(); ++j) rhs[j] += tmp[j];
    const int coupled0 = lp.num_rows();
    for (int j = 0; j < t.num_coupled(); ++j)
        lp.add_row(idx("coupled", j), RowSense::GreaterEqual, rhs[j]);
    t.b_coupled.for_each([&](int r, int c, double v) { lp.set_entry(coupled0 + r, c, v); });

    if (y_fix) {
        for (int k = 0; k < t.n_bin; ++k) {
            const int col = t.n_cont + k;
            const double v = (*y_fix)[k];
            lp.add_row(idx("fix_ge", k), RowSense::GreaterEqual, v, {{col, 1.0}});
            lp.add_row(idx("fix_le", k), RowSense::GreaterEqual, -v, {{col, -1.0}});
        }
    }
    return lp;
}

LpModel build_mccormick_relaxation(const WcaroInstance& inst, const std::vector<double>* x,
                                   McCormickLayout* layout) {
    const ThirdLevel& t = inst.third;
    const OmegaStandard& om = inst.omega;
    const int ni = om.dim(), nj = t.num_coupled();
    for (int i = 0; i < ni; ++i)
        if (std::abs(om.h_lower[i]) > 1e-12)
            throw Error("uncertainty set not normalized: h lower bound nonzero");
    std::vector<char> carries_h(nj, 0);
    t.b_h.for_each([&](int r, int, double) { carries_h[r] = 1; });
    for (int j = 0; j < nj; ++j) {
        if (t.beta_lower[j] < 0.0) throw MissingBetaBounds("negative beta lower bound on row " + std::to_string(j));
        if (carries_h[j] && (!std::isfinite(t.beta_lower[j]) || !std::isfinite(t.beta_upper[j])))
            throw MissingBetaBounds("beta bounds required on uncertainty-coupled row " + std::to_string(j));
    }
    if (x && static_cast<int>(x->size()) != inst.first.n_x) throw DimensionMismatch("x length != n_x");

    McCormickLayout lay;
    LpModel lp;
    lp.sense = ObjSense::Maximize;

    // columns
    std::vector<double> beta_obj = t.b0;
    if (x) {
        std::vector<double> tmp;
        t.b_x.multiply(*x, tmp);
        for (int j = 0; j < nj; ++j) beta_obj[j] += tmp[j];
    }
    for (int r = 0; r < t.num_free(); ++r)
        lay.alpha_cols.push_back(lp.add_col(idx("alpha", r), 0.0, kInf, t.b_free[r]));
    for (int j = 0; j < nj; ++j)
        lay.beta_cols.push_back(lp.add_col(idx("beta", j), 0.0, kInf, beta_obj[j]));
    for (int i = 0; i < ni; ++i) lay.h_cols.push_back(lp.add_col(idx("h", i), 0.0, kInf, 0.0));
    lay.eta_cols.assign(om.num_rows(), -1);
    for (int r = 0; r < om.num_rows(); ++r)
        if (om.row_has_slack[r]) lay.eta_cols[r] = lp.add_col(idx("eta", r), 0.0, kInf, 0.0);

    // dual-feasibility rows of the inner minimization: A'^T alpha + B^T beta = c
    for (int k = 0; k < t.n_y(); ++k)
        lay.dualfeas_rows.push_back(lp.add_row(idx("yfeas", k), RowSense::Equal, t.c[k]));
    t.a_free.for_each([&](int r, int c, double v) { lp.set_entry(lay.dualfeas_rows[c], lay.alpha_cols[r], v); });
    t.b_coupled.for_each([&](int r, int c, double v) { lp.set_entry(lay.dualfeas_rows[c], lay.beta_cols[r], v); });

    // beta range rows (gamma for finite upper, delta for positive lower)
    lay.gamma_rows.assign(nj, -1);
    lay.delta_rows.assign(nj, -1);
    for (int j = 0; j < nj; ++j) {
        if (std::isfinite(t.beta_upper[j])) {
            const int g = lp.add_col(idx("gamma", j), 0.0, kInf, 0.0);
            lay.gamma_rows[j] =
                lp.add_row(idx("beta_up", j), RowSense::Equal, t.beta_upper[j], {{lay.beta_cols[j], 1.0}, {g, 1.0}});
        }
        if (t.beta_lower[j] > 0.0) {
            const int d = lp.add_col(idx("delta", j), 0.0, kInf, 0.0);
            lay.delta_rows[j] =
                lp.add_row(idx("beta_lo", j), RowSense::Equal, t.beta_lower[j], {{lay.beta_cols[j], 1.0}, {d, -1.0}});
        }
    }

    // uncertainty rows
    for (int r = 0; r < om.num_rows(); ++r) {
        const int row = lp.add_row(idx("omega", r), RowSense::Equal, om.b_omega[r]);
        lay.omega_rows.push_back(row);
        if (lay.eta_cols[r] >= 0) lp.set_entry(row, lay.eta_cols[r], 1.0);
    }
    om.a_omega.for_each([&](int r, int c, double v) { lp.set_entry(lay.omega_rows[r], lay.h_cols[c], v); });

    // kappa substitution with McCormick envelope rows per nonzero of B_h
    t.b_h.for_each([&](int j, int i, double bh) {
        McCormickLayout::EnvelopeTerm term;
        term.i = i;
        term.j = j;
        term.bh = bh;
        const std::string tag = std::to_string(i) + "_" + std::to_string(j);
        term.kappa_col = lp.add_col("kappa_" + tag, 0.0, kInf, bh);
        for (int e = 0; e < 4; ++e)
            term.rho_cols[e] = lp.add_col("rho" + std::to_string(e + 1) + "_" + tag, 0.0, kInf, 0.0);
        const double hl = om.h_lower[i], hu = om.h_upper[i];
        const double bl = t.beta_lower[j], bu = t.beta_upper[j];
        const int kc = term.kappa_col, hc = lay.h_cols[i], bc = lay.beta_cols[j];
        term.env_rows[0] = lp.add_row("env1_" + tag, RowSense::Equal, -hl * bl,
                                      {{kc, 1.0}, {hc, -bl}, {bc, -hl}, {term.rho_cols[0], -1.0}});
        term.env_rows[1] = lp.add_row("env2_" + tag, RowSense::Equal, -hu * bu,
                                      {{kc, 1.0}, {hc, -bu}, {bc, -hu}, {term.rho_cols[1], -1.0}});
        term.env_rows[2] = lp.add_row("env3_" + tag, RowSense::Equal, -hu * bl,
                                      {{kc, 1.0}, {hc, -bl}, {bc, -hu}, {term.rho_cols[2], 1.0}});
        term.env_rows[3] = lp.add_row("env4_" + tag, RowSense::Equal, -hl * bu,
                                      {{kc, 1.0}, {hc, -bu}, {bc, -hl}, {term.rho_cols[3], 1.0}});
        lay.terms.push_back(term);
    });

    if (layout) *layout = lay;
    return lp;
}

namespace {

// Asserts the dual model carries the structure promised by the reformulation:
// sign-restricted multiplier rows and the envelope-sum rows.
void check_single_level_structure(const LpModel& mc, const LpModel& dual, const DualMap& map,
                                  const McCormickLayout& lay) {
    auto single_entry = [&](int row, int expect_col, double expect_val) {
        int count = 0;
        bool ok = false;
        dual.mat.for_row(row, [&](int c, double v) {
            ++count;
            if (c == expect_col && std::abs(v - expect_val) < 1e-12) ok = true;
        });
        return ok && count == 1;
    };
    for (const auto& term : lay.terms) {
        int env_col[4];
        for (int e = 0; e < 4; ++e) env_col[e] = map.row_to_dual_col[term.env_rows[e]];
        // rho dual rows pin the multiplier signs: u_env1, u_env2 <= 0 and
        // u_env3, u_env4 >= 0 via single-entry >= 0 rows
        for (int e = 0; e < 4; ++e) {
            const int r = map.col_to_dual_row[term.rho_cols[e]];
            require(dual.row_sense[r] == RowSense::GreaterEqual && dual.rhs[r] == 0.0,
                    "rho multiplier row shape");
            require(single_entry(r, env_col[e], e < 2 ? -1.0 : 1.0), "rho multiplier row sign");
        }
        // envelope-sum row: sum of the four multipliers >= (B_h)_{ij}
        const int kr = map.col_to_dual_row[term.kappa_col];
        require(dual.row_sense[kr] == RowSense::GreaterEqual, "envelope-sum row sense");
        require(std::abs(dual.rhs[kr] - term.bh) < 1e-12, "envelope-sum row rhs");
        int hits = 0;
        dual.mat.for_row(kr, [&](int c, double v) {
            for (int e = 0; e < 4; ++e)
                if (c == env_col[e] && std::abs(v - 1.0) < 1e-12) ++hits;
        });
        require(hits == 4, "envelope-sum row entries");
    }
    // beta range multipliers: u_beta_up >= 0, u_beta_lo <= 0, through the
    // gamma/delta dual rows
    const int nj = static_cast<int>(lay.beta_cols.size());
    for (int j = 0; j < nj; ++j) {
        if (lay.gamma_rows[j] >= 0) {
            // gamma has a single +1 entry in its beta_up row; its dual row is
            // u_beta_up >= 0
            int gcol = -1;
            mc.mat.for_row(lay.gamma_rows[j], [&](int c, double v) {
                if (c != lay.beta_cols[j] && v == 1.0) gcol = c;
            });
            require(gcol >= 0, "gamma column present");
            const int r = map.col_to_dual_row[gcol];
            require(dual.row_sense[r] == RowSense::GreaterEqual &&
                        single_entry(r, map.row_to_dual_col[lay.gamma_rows[j]], 1.0),
                    "beta upper multiplier sign");
        }
        if (lay.delta_rows[j] >= 0) {
            int dcol = -1;
            mc.mat.for_row(lay.delta_rows[j], [&](int c, double v) {
                if (c != lay.beta_cols[j] && v == -1.0) dcol = c;
            });
            require(dcol >= 0, "delta column present");
            const int r = map.col_to_dual_row[dcol];
            require(dual.row_sense[r] == RowSense::GreaterEqual &&
                        single_entry(r, map.row_to_dual_col[lay.delta_rows[j]], -1.0),
                    "beta lower multiplier sign");
        }
    }
}

}  // namespace

SingleLevelModel build_single_level(const WcaroInstance& inst, const std::vector<int>* y_fix,
                                    int pwl_segments) {
    {
        const ValidationReport rep = validate_instance(inst);
        if (!rep.ok) {
            std::string msg = "invalid instance:";
            bool beta_missing = false;
            for (const auto& [sev, text] : rep.issues)
                if (sev == Severity::Error) {
                    msg += " " + text + ";";
                    beta_missing |= text.find("beta bounds missing") != std::string::npos;
                }
            if (beta_missing) throw MissingBetaBounds(msg);
            throw Error(msg);
        }
    }
    if (y_fix && static_cast<int>(y_fix->size()) != inst.third.n_bin)
        throw DimensionMismatch("binary fixing length != n_bin");

    // normalize h >= 0 (value-preserving) and linearize quadratic costs
    WcaroInstance work = inst;
    bool needs_shift = false;
    for (double v : inst.omega.h_lower)
        if (std::abs(v) > 1e-12) needs_shift = true;
    if (needs_shift) work = shift_h_lower_bound(inst).first;
    FirstLevel fl = work.first;
    bool has_quad = false;
    for (double q : fl.obj_quadratic_diag)
        if (q != 0.0) has_quad = true;
    if (has_quad) fl = piecewise_linearize_objective(fl, pwl_segments);

    McCormickLayout lay;
    const LpModel mc = build_mccormick_relaxation(work, nullptr, &lay);
    DualMap map;
    LpModel dual = dualize_lp(mc, &map);
    check_single_level_structure(mc, dual, map, lay);

    // readable names for the theorem's dual variables
    const ThirdLevel& t = work.third;
    for (int k = 0; k < t.n_y(); ++k) dual.col_names[map.row_to_dual_col[lay.dualfeas_rows[k]]] = idx("y", k);
    for (int j = 0; j < t.num_coupled(); ++j) {
        if (lay.gamma_rows[j] >= 0) dual.col_names[map.row_to_dual_col[lay.gamma_rows[j]]] = idx("u_beta_up", j);
        if (lay.delta_rows[j] >= 0) dual.col_names[map.row_to_dual_col[lay.delta_rows[j]]] = idx("u_beta_lo", j);
    }
    for (std::size_t r = 0; r < lay.omega_rows.size(); ++r)
        dual.col_names[map.row_to_dual_col[lay.omega_rows[r]]] = idx("u_omega", static_cast<int>(r));
    for (std::size_t tm = 0; tm < lay.terms.size(); ++tm)
        for (int e = 0; e < 4; ++e)
            dual.col_names[map.row_to_dual_col[lay.terms[tm].env_rows[e]]] =
                "u_env" + std::to_string(e + 1) + "_" + std::to_string(lay.terms[tm].i) + "_" +
                std::to_string(lay.terms[tm].j);

    SingleLevelModel out;
    // first-level variables and rows
    const Polytope& fs = fl.feasible_set;
    std::vector<int> xcols(fs.dim);
    for (int k = 0; k < fs.dim; ++k)
        xcols[k] = dual.add_col(k < fl.n_x ? idx("x", k) : idx("x_aux", k - fl.n_x), fs.lower[k],
                                fs.upper[k], fl.obj_linear[k]);
    const int xrow0 = dual.num_rows();
    for (int r = 0; r < fs.num_rows(); ++r)
        dual.add_row(idx("first", r), fs.senses[r], fs.rhs[r]);
    fs.a_mat.for_each([&](int r, int c, double v) { dual.set_entry(xrow0 + r, xcols[c], v); });
    dual.obj_constant += fl.obj_constant;

    // merge the symbolic B_x terms into the beta dual rows:  ... >= b0 + B_x x
    t.b_x.for_each([&](int j, int k, double v) {
        dual.set_entry(map.col_to_dual_row[lay.beta_cols[j]], xcols[k], -v);
    });

    out.x_cols.assign(xcols.begin(), xcols.begin() + fl.n_x);
    for (int k = 0; k < t.n_y(); ++k) out.y_cols.push_back(map.row_to_dual_col[lay.dualfeas_rows[k]]);
    for (int k = 0; k < t.n_bin; ++k) {
        const int col = out.y_cols[t.n_cont + k];
        if (y_fix) {
            const double v = (*y_fix)[k];
            dual.col_lower[col] = v;
            dual.col_upper[col] = v;
        } else {
            dual.col_lower[col] = 0.0;
            dual.col_upper[col] = 1.0;
            out.mip.binary_cols.push_back(col);
        }
    }
    out.mip.base = std::move(dual);
    return out;
}

std::string export_lp_format(const LpModel& model, const std::vector<int>& binary_cols) {
    std::ostringstream os;
    auto name = [&](const std::string& s, const char* fallback, int i) {
        if (s.empty()) return std::string(fallback) + std::to_string(i);
        std::string t = s;
        for (char& c : t)
            if (c == ' ' || c == '+' || c == '-' || c == '*') c = '_';
        return t;
    };
    os << (model.sense == ObjSense::Maximize ? "Maximize" : "Minimize") << "\n obj:";
    for (int j = 0; j < model.num_cols(); ++j) {
        if (model.obj[j] == 0.0) continue;
        os << (model.obj[j] >= 0 ? " + " : " - ") << std::abs(model.obj[j]) << " "
           << name(model.col_names[j], "c", j);
    }
    if (model.obj_constant != 0.0)
        os << (model.obj_constant >= 0 ? " + " : " - ") << std::abs(model.obj_constant);
    os << "\nSubject To\n";
    for (int r = 0; r < model.num_rows(); ++r) {
        os << " " << name(model.row_names[r], "r", r) << ":";
        model.mat.for_row(r, [&](int c, double v) {
            os << (v >= 0 ? " + " : " - ") << std::abs(v) << " " << name(model.col_names[c], "c", c);
        });
        switch (model.row_sense[r]) {
            case RowSense::LessEqual:
                os << " <= ";
                break;
            case RowSense::GreaterEqual:
                os << " >= ";
                break;
            case RowSense::Equal:
                os << " = ";
                break;
        }
        os << model.rhs[r] << "\n";
    }
    os << "Bounds\n";
    for (int j = 0; j < model.num_cols(); ++j) {
        const double lo = model.col_lower[j], up = model.col_upper[j];
        const std::string nm = name(model.col_names[j], "c", j);
        if (lo == 0.0 && up == kInf) continue;  // LP-format default
        if (!std::isfinite(lo) && !std::isfinite(up)) {
            os << " " << nm << " free\n";
            continue;
        }
        if (std::isfinite(lo))
            os << " " << lo << " <= " << nm;
        else
            os << " -inf <= " << nm;
        if (std::isfinite(up))
            os << " <= " << up;
        os << "\n";
    }
    if (!binary_cols.empty()) {
        os << "Binary\n";
        for (int b : binary_cols) os << " " << name(model.col_names[b], "c", b) << "\n";
    }
    os << "End\n";
    return os.str();
}

}  // namespace aromip
