#include "aromip/instance.hpp"

#include <cmath>
#include <sstream>

#include "aromip/simplex.hpp"

namespace aromip {

namespace {

LpModel polytope_feasibility_lp(const Polytope& p) {
    LpModel lp;
    for (int j = 0; j < p.dim; ++j)
        lp.add_col("h" + std::to_string(j), p.lower[j], p.upper[j], 0.0);
    for (int r = 0; r < p.num_rows(); ++r) lp.add_row("r" + std::to_string(r), p.senses[r], p.rhs[r]);
    p.a_mat.for_each([&](int r, int c, double v) { lp.set_entry(r, c, v); });
    return lp;
}

}  // namespace

ValidationReport validate_instance(const WcaroInstance& inst) {
    ValidationReport rep;
    const FirstLevel& f = inst.first;
    const OmegaStandard& om = inst.omega;
    const ThirdLevel& t = inst.third;
    const int ni = om.dim();
    const int nj = t.num_coupled();
    const int ny = t.n_y();

    if (f.n_x < 0 || f.n_x > f.feasible_set.dim) rep.error("first level: n_x exceeds variable count");
    if (static_cast<int>(f.obj_linear.size()) != f.feasible_set.dim)
        rep.error("first level: linear objective length != variable count");
    if (static_cast<int>(f.obj_quadratic_diag.size()) != f.feasible_set.dim)
        rep.error("first level: quadratic diagonal length != variable count");
    for (double q : f.obj_quadratic_diag)
        if (q < 0.0) {
            rep.error("first level: nonconvex quadratic coefficient");
            break;
        }
    if (f.feasible_set.a_mat.cols() != f.feasible_set.dim) rep.error("first level: matrix width != dim");
    if (static_cast<int>(f.feasible_set.senses.size()) != f.feasible_set.num_rows())
        rep.error("first level: row arrays inconsistent");

    if (om.a_omega.cols() != ni) rep.error("omega: matrix width != |I|");
    if (om.a_omega.rows() != om.num_rows()) rep.error("omega: matrix height != row count");
    if (static_cast<int>(om.row_has_slack.size()) != om.num_rows())
        rep.error("omega: slack flags length != row count");
    if (static_cast<int>(om.h_upper.size()) != ni) rep.error("omega: bound vectors inconsistent");
    for (int i = 0; i < ni; ++i) {
        if (!std::isfinite(om.h_lower[i]) || !std::isfinite(om.h_upper[i])) {
            rep.error("omega not compact: coordinate " + std::to_string(i) + " unbounded");
            continue;
        }
        if (om.h_lower[i] > om.h_upper[i])
            rep.error("omega: crossed bounds on coordinate " + std::to_string(i));
    }

    if (static_cast<int>(t.c.size()) != ny) rep.error("third level: cost length != n_cont + n_bin");
    if (t.n_cont < 0 || t.n_bin < 0) rep.error("third level: negative variable counts");
    if (t.a_free.cols() != ny) rep.error("third level: free matrix width != y count");
    if (t.a_free.rows() != t.num_free()) rep.error("third level: free matrix height != rhs length");
    if (t.b_coupled.rows() != nj || t.b_coupled.cols() != ny)
        rep.error("third level: coupled matrix shape mismatch");
    if (t.b_x.rows() != nj) rep.error("third level: B_x height != |J|");
    if (t.b_x.cols() != f.n_x) rep.error("third level: B_x width != n_x");
    if (t.b_h.rows() != nj) rep.error("third level: B_h height != |J|");
    if (t.b_h.cols() != ni) rep.error("third level: B_h width != |I|");
    if (static_cast<int>(t.beta_lower.size()) != nj || static_cast<int>(t.beta_upper.size()) != nj)
        rep.error("third level: beta bound lengths != |J|");

    rep.nnz_bh = t.b_h.nnz();
    std::vector<char> row_carries_h(nj, 0);
    t.b_h.for_each([&](int r, int, double) { row_carries_h[r] = 1; });
    for (int j = 0; j < nj && j < static_cast<int>(t.beta_lower.size()); ++j) {
        const double bl = t.beta_lower[j], bu = t.beta_upper[j];
        if (bl < 0.0) rep.error("beta lower bound negative on row " + std::to_string(j));
        if (bl > bu) rep.error("beta bounds crossed on row " + std::to_string(j));
        if (row_carries_h[j] && (!std::isfinite(bl) || !std::isfinite(bu)))
            rep.error("beta bounds missing on uncertainty-coupled row " + std::to_string(j));
    }
    if (rep.nnz_bh > 5000) rep.warn("large B_h nonzero count: " + std::to_string(rep.nnz_bh));

    std::ostringstream d;
    d << "n_x=" << f.n_x << " aux=" << (f.feasible_set.dim - f.n_x) << " |I|=" << ni << " |J|=" << nj
      << " n_cont=" << t.n_cont << " n_bin=" << t.n_bin << " nnz_bh=" << rep.nnz_bh;
    rep.dims = d.str();
    return rep;
}

OmegaStandard standardize_omega(const Polytope& p) {
    // exact coordinate extrema first (also proves compactness)
    LpModel lp = polytope_feasibility_lp(p);
    OmegaStandard om;
    om.h_lower.resize(p.dim);
    om.h_upper.resize(p.dim);
    for (int i = 0; i < p.dim; ++i) {
        lp.obj.assign(p.dim, 0.0);
        lp.obj[i] = 1.0;
        lp.sense = ObjSense::Minimize;
        LpSolution lo = solve_lp(lp);
        if (lo.status == SolveStatus::Infeasible) throw EmptyOmega("uncertainty polytope is empty");
        if (lo.status == SolveStatus::Unbounded)
            throw UnboundedOmega("uncertainty polytope unbounded below in coordinate " + std::to_string(i));
        lp.sense = ObjSense::Maximize;
        LpSolution hi = solve_lp(lp);
        if (hi.status == SolveStatus::Unbounded)
            throw UnboundedOmega("uncertainty polytope unbounded above in coordinate " + std::to_string(i));
        om.h_lower[i] = lo.objective;
        om.h_upper[i] = hi.objective;
    }

    // rows: inequalities normalized to <= and given a slack, equalities kept
    auto push_row = [&](const std::vector<std::pair<int, double>>& ents, double b, bool slack) {
        const int r = om.num_rows();
        om.b_omega.push_back(b);
        om.row_has_slack.push_back(slack ? 1 : 0);
        om.a_omega.resize(r + 1, p.dim);
        for (const auto& [c, v] : ents) om.a_omega.add(r, c, v);
    };
    for (int r = 0; r < p.num_rows(); ++r) {
        std::vector<std::pair<int, double>> ents;
        p.a_mat.for_row(r, [&](int c, double v) { ents.emplace_back(c, v); });
        switch (p.senses[r]) {
            case RowSense::LessEqual:
                push_row(ents, p.rhs[r], true);
                break;
            case RowSense::GreaterEqual:
                for (auto& [c, v] : ents) v = -v;
                push_row(ents, -p.rhs[r], true);
                break;
            case RowSense::Equal:
                push_row(ents, p.rhs[r], false);
                break;
        }
    }
    for (int i = 0; i < p.dim; ++i) {
        if (std::isfinite(p.upper[i])) push_row({{i, 1.0}}, p.upper[i], true);
        if (std::isfinite(p.lower[i])) push_row({{i, -1.0}}, -p.lower[i], true);
    }
    om.a_omega.resize(om.num_rows(), p.dim);
    return om;
}

std::pair<WcaroInstance, std::vector<double>> shift_h_lower_bound(const WcaroInstance& inst) {
    WcaroInstance out = inst;
    const std::vector<double> shift = inst.omega.h_lower;
    std::vector<double> bh_shift, ao_shift;
    inst.third.b_h.multiply(shift, bh_shift);
    for (int j = 0; j < inst.third.num_coupled(); ++j) out.third.b0[j] += bh_shift[j];
    inst.omega.a_omega.multiply(shift, ao_shift);
    for (int r = 0; r < inst.omega.num_rows(); ++r) out.omega.b_omega[r] -= ao_shift[r];
    for (int i = 0; i < inst.omega.dim(); ++i) {
        out.omega.h_upper[i] = inst.omega.h_upper[i] - shift[i];
        out.omega.h_lower[i] = 0.0;
    }
    return {std::move(out), shift};
}

FirstLevel piecewise_linearize_objective(const FirstLevel& fl, int segments) {
    if (segments < 1) throw Error("piecewise linearization needs at least one segment");
    FirstLevel out = fl;
    const int d0 = fl.feasible_set.dim;
    for (int j = 0; j < d0; ++j) {
        const double q = j < static_cast<int>(fl.obj_quadratic_diag.size()) ? fl.obj_quadratic_diag[j] : 0.0;
        if (q == 0.0) continue;
        if (q < 0.0) throw Error("nonconvex quadratic coefficient on variable " + std::to_string(j));
        const double lo = fl.feasible_set.lower[j], up = fl.feasible_set.upper[j];
        if (!std::isfinite(lo) || !std::isfinite(up))
            throw UnboundedVariable("quadratic variable " + std::to_string(j) + " lacks finite bounds");
        out.obj_quadratic_diag[j] = 0.0;
        if (up - lo < 1e-12) {
            out.obj_constant += q * lo * lo;
            continue;
        }
        // auxiliary w >= secant overestimator of x^2 on [lo, up]
        const int w = out.feasible_set.dim;
        out.feasible_set.dim = w + 1;
        out.feasible_set.lower.push_back(-kInf);
        out.feasible_set.upper.push_back(kInf);
        out.feasible_set.a_mat.resize(out.feasible_set.a_mat.rows(), w + 1);
        out.obj_linear.push_back(q);
        out.obj_quadratic_diag.push_back(0.0);
        for (int s = 0; s < segments; ++s) {
            const double t0 = lo + (up - lo) * s / segments;
            const double t1 = lo + (up - lo) * (s + 1) / segments;
            // w >= (t0+t1) x - t0*t1  (secant of x^2 through t0, t1)
            out.feasible_set.add_row(RowSense::GreaterEqual, -t0 * t1, {{w, 1.0}, {j, -(t0 + t1)}});
        }
    }
    return out;
}

}  // namespace aromip
