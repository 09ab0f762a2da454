#include "aromip/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "aromip/simplex.hpp"

namespace aromip {

namespace {

struct Constraint {
    std::vector<double> a;
    double b;
    bool eq;
};

// Dense d x d solve by Gaussian elimination with partial pivoting.
// Returns false on (near-)singularity.
bool solve_square(std::vector<std::vector<double>> m, std::vector<double> r, std::vector<double>& out) {
    const int d = static_cast<int>(r.size());
    for (int k = 0; k < d; ++k) {
        int piv = k;
        for (int i = k + 1; i < d; ++i)
            if (std::abs(m[i][k]) > std::abs(m[piv][k])) piv = i;
        if (std::abs(m[piv][k]) < 1e-10) return false;
        std::swap(m[piv], m[k]);
        std::swap(r[piv], r[k]);
        for (int i = k + 1; i < d; ++i) {
            const double f = m[i][k] / m[k][k];
            if (f == 0.0) continue;
            for (int j = k; j < d; ++j) m[i][j] -= f * m[k][j];
            r[i] -= f * r[k];
        }
    }
    out.assign(d, 0.0);
    for (int k = d - 1; k >= 0; --k) {
        double s = r[k];
        for (int j = k + 1; j < d; ++j) s -= m[k][j] * out[j];
        out[k] = s / m[k][k];
    }
    return true;
}

long binomial_capped(long n, long k, long cap) {
    double v = 1.0;
    for (long i = 0; i < k; ++i) {
        v *= static_cast<double>(n - i) / static_cast<double>(i + 1);
        if (v > static_cast<double>(cap)) return cap + 1;
    }
    return static_cast<long>(v + 0.5);
}

}  // namespace

std::vector<std::vector<double>> enumerate_vertices(const OmegaStandard& om, const OracleCaps& caps) {
    const int d = om.dim();
    if (d > caps.max_dim)
        throw TooLarge("uncertainty dimension " + std::to_string(d) + " exceeds oracle cap " +
                       std::to_string(caps.max_dim));
    if (d == 0) return {std::vector<double>{}};

    std::vector<Constraint> cons;
    for (int r = 0; r < om.num_rows(); ++r) {
        Constraint c{std::vector<double>(d, 0.0), om.b_omega[r], !om.row_has_slack[r]};
        om.a_omega.for_row(r, [&](int j, double v) { c.a[j] = v; });
        cons.push_back(std::move(c));
    }
    for (int i = 0; i < d; ++i) {
        if (std::isfinite(om.h_upper[i])) {
            Constraint c{std::vector<double>(d, 0.0), om.h_upper[i], false};
            c.a[i] = 1.0;
            cons.push_back(std::move(c));
        }
        if (std::isfinite(om.h_lower[i])) {
            Constraint c{std::vector<double>(d, 0.0), -om.h_lower[i], false};
            c.a[i] = -1.0;
            cons.push_back(std::move(c));
        }
    }
    const int m = static_cast<int>(cons.size());
    if (m < d) throw UnboundedOmega("uncertainty set has too few constraints to have vertices");
    if (binomial_capped(m, d, caps.max_subsets) > caps.max_subsets)
        throw TooLarge("vertex enumeration would try more than " + std::to_string(caps.max_subsets) +
                       " active sets");

    const double feas_tol = 1e-7, dedup_tol = 1e-9;
    auto feasible = [&](const std::vector<double>& h) {
        for (const Constraint& c : cons) {
            double act = 0.0;
            for (int j = 0; j < d; ++j) act += c.a[j] * h[j];
            if (act > c.b + feas_tol) return false;
            if (c.eq && act < c.b - feas_tol) return false;
        }
        return true;
    };

    std::vector<std::vector<double>> verts;
    std::vector<int> pick(d);
    for (int i = 0; i < d; ++i) pick[i] = i;
    while (true) {
        std::vector<std::vector<double>> a(d);
        std::vector<double> b(d);
        for (int i = 0; i < d; ++i) {
            a[i] = cons[pick[i]].a;
            b[i] = cons[pick[i]].b;
        }
        std::vector<double> h;
        if (solve_square(std::move(a), std::move(b), h) && feasible(h)) {
            bool dup = false;
            for (const auto& v : verts) {
                double diff = 0.0;
                for (int j = 0; j < d; ++j) diff = std::max(diff, std::abs(v[j] - h[j]));
                if (diff <= dedup_tol) {
                    dup = true;
                    break;
                }
            }
            if (!dup) verts.push_back(std::move(h));
        }
        // next d-combination of {0..m-1}
        int i = d - 1;
        while (i >= 0 && pick[i] == m - d + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < d; ++j) pick[j] = pick[j - 1] + 1;
    }
    return verts;
}

AdversarialResult adversarial_value(const WcaroInstance& inst, const std::vector<double>& x,
                                    const OracleCaps& caps) {
    const int nb = inst.third.n_bin;
    if (nb > caps.max_bin)
        throw TooLarge("binary count " + std::to_string(nb) + " exceeds oracle cap " +
                       std::to_string(caps.max_bin));
    const std::vector<std::vector<double>> verts = enumerate_vertices(inst.omega, caps);
    if (verts.empty()) throw EmptyOmega("uncertainty set has no vertices");

    AdversarialResult best;
    best.value = kInf;
    bool have_best = false;
    for (long mask = 0; mask < (1L << nb); ++mask) {
        std::vector<int> yfix(nb);
        for (int k = 0; k < nb; ++k) yfix[k] = static_cast<int>((mask >> k) & 1);
        double inner = -kInf;
        std::size_t inner_arg = 0;
        for (std::size_t vi = 0; vi < verts.size(); ++vi) {
            const LpModel lp =
                build_third_level_primal(inst, x, verts[vi], nb > 0 ? &yfix : nullptr);
            const LpSolution sol = solve_lp(lp);
            double val;
            if (sol.status == SolveStatus::Infeasible)
                val = kInf;
            else if (sol.status == SolveStatus::Unbounded)
                val = -kInf;
            else
                val = sol.objective;
            if (val > inner) {
                inner = val;
                inner_arg = vi;
            }
            if (inner == kInf) break;  // this fixing is dead
        }
        if (!have_best || inner < best.value) {
            best.value = inner;
            best.worst_h = verts[inner_arg];
            best.worst_yfix = yfix;
            have_best = true;
        }
    }
    return best;
}

CertReport certify(const WcaroInstance& inst, const SingleLevelModel& model, const MipSolution& sol,
                   double tol, const OracleCaps& caps) {
    const int nx = inst.first.n_x;
    std::vector<double> xstar(nx);
    for (int k = 0; k < nx; ++k) xstar[k] = sol.primal.at(model.x_cols.at(k));
    double g = inst.first.obj_constant;
    for (int k = 0; k < nx; ++k) {
        g += inst.first.obj_linear[k] * xstar[k];
        g += inst.first.obj_quadratic_diag[k] * xstar[k] * xstar[k];
    }
    const AdversarialResult adv = adversarial_value(inst, xstar, caps);
    CertReport rep;
    rep.mip_value = sol.objective;
    rep.oracle_value_at_xstar = g + adv.value;
    rep.margin = rep.mip_value - rep.oracle_value_at_xstar;
    rep.exact = std::abs(rep.margin) <= tol;
    rep.worst_h = adv.worst_h;
    rep.worst_yfix = adv.worst_yfix;
    return rep;
}

WcaroInstance make_t1() {
    WcaroInstance inst;
    inst.name = "t1";
    FirstLevel& f = inst.first;
    f.n_x = 1;
    f.feasible_set.set_dim(1);
    f.feasible_set.lower = {0.0};
    f.feasible_set.upper = {2.0};
    f.obj_linear = {1.0};
    f.obj_quadratic_diag = {0.0};

    Polytope box;
    box.set_dim(1);
    box.lower = {0.0};
    box.upper = {1.0};
    inst.omega = standardize_omega(box);

    ThirdLevel& t = inst.third;
    t.n_cont = 1;
    t.n_bin = 0;
    t.c = {1.0};
    t.a_free.resize(1, 1);
    t.a_free.add(0, 0, 1.0);
    t.b_free = {0.0};
    t.b_coupled.resize(1, 1);
    t.b_coupled.add(0, 0, 1.0);
    t.b_x.resize(1, 1);
    t.b_x.add(0, 0, -1.0);
    t.b_h.resize(1, 1);
    t.b_h.add(0, 0, 1.0);
    t.b0 = {0.0};
    t.beta_lower = {0.0};
    t.beta_upper = {1.0};
    return inst;
}

WcaroInstance make_t2() {
    WcaroInstance inst;
    inst.name = "t2";
    FirstLevel& f = inst.first;
    f.n_x = 0;
    f.feasible_set.set_dim(0);

    Polytope box;
    box.set_dim(1);
    box.lower = {0.0};
    box.upper = {1.0};
    inst.omega = standardize_omega(box);

    ThirdLevel& t = inst.third;
    t.n_cont = 1;
    t.n_bin = 1;
    t.c = {1.0, 0.6};
    t.a_free.resize(1, 2);
    t.a_free.add(0, 0, 1.0);
    t.b_free = {0.0};
    t.b_coupled.resize(1, 2);
    t.b_coupled.add(0, 0, 1.0);
    t.b_coupled.add(0, 1, 1.0);
    t.b_x.resize(1, 0);
    t.b_h.resize(1, 1);
    t.b_h.add(0, 0, 1.0);
    t.b0 = {0.0};
    t.beta_lower = {0.0};
    t.beta_upper = {1.0};
    return inst;
}

}  // namespace aromip
