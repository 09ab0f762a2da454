#pragma once

#include <string>
#include <utility>
#include <vector>

#include "aromip/lp_model.hpp"

namespace aromip {

// Convex polytope { v : a_mat v {<=,=,>=} rhs, lower <= v <= upper }.
struct Polytope {
    int dim = 0;
    SparseMatrix a_mat;
    std::vector<RowSense> senses;
    std::vector<double> rhs;
    std::vector<double> lower, upper;  // +-inf allowed

    int num_rows() const { return static_cast<int>(rhs.size()); }

    void set_dim(int d) {
        dim = d;
        lower.assign(d, -kInf);
        upper.assign(d, kInf);
        a_mat.resize(a_mat.rows(), d);
    }
    int add_row(RowSense s, double b, const std::vector<std::pair<int, double>>& entries) {
        senses.push_back(s);
        rhs.push_back(b);
        a_mat.resize(num_rows(), dim);
        for (const auto& [c, v] : entries) a_mat.add(num_rows() - 1, c, v);
        return num_rows() - 1;
    }
};

// Uncertainty polytope in slack-standard form: rows a_omega h (+ eta) = b_omega
// with one nonnegative slack on each row listed in slack_rows, plus exact
// coordinatewise bounds h_lower <= h <= h_upper.
struct OmegaStandard {
    SparseMatrix a_omega;  // k x |I|
    std::vector<double> b_omega;
    std::vector<char> row_has_slack;  // length k
    std::vector<double> h_lower, h_upper;

    int num_rows() const { return static_cast<int>(b_omega.size()); }
    int dim() const { return static_cast<int>(h_lower.size()); }
};

// Third-level recourse data: min c'y over
//   A' y >= b'            (free rows)
//   B  y >= B_x x + B_h h + b0   (coupled rows, dual variables beta)
// with the trailing n_bin coordinates of y binary.
struct ThirdLevel {
    int n_cont = 0, n_bin = 0;
    std::vector<double> c;
    SparseMatrix a_free;
    std::vector<double> b_free;
    SparseMatrix b_coupled;  // |J| x (n_cont + n_bin)
    SparseMatrix b_x;        // |J| x n_x
    SparseMatrix b_h;        // |J| x |I|
    std::vector<double> b0;
    std::vector<double> beta_lower, beta_upper;

    int n_y() const { return n_cont + n_bin; }
    int num_coupled() const { return static_cast<int>(b0.size()); }
    int num_free() const { return static_cast<int>(b_free.size()); }
};

// First-level data: min obj over x in feasible_set. The first n_x coordinates
// are the structural decision variables coupled through B_x; any further
// coordinates of feasible_set are auxiliaries introduced by the piecewise
// linearization and carry zero B_x columns downstream.
struct FirstLevel {
    int n_x = 0;
    Polytope feasible_set;
    std::vector<double> obj_linear;
    std::vector<double> obj_quadratic_diag;
    double obj_constant = 0.0;

    int num_vars() const { return feasible_set.dim; }
};

struct WcaroInstance {
    FirstLevel first;
    OmegaStandard omega;
    ThirdLevel third;
    std::string name;
};

enum class Severity { Warning, Error };

struct ValidationReport {
    bool ok = true;
    std::vector<std::pair<Severity, std::string>> issues;
    std::size_t nnz_bh = 0;
    std::string dims;

    void error(std::string msg) {
        ok = false;
        issues.emplace_back(Severity::Error, std::move(msg));
    }
    void warn(std::string msg) { issues.emplace_back(Severity::Warning, std::move(msg)); }
};

// Checks all cross dimensions, compactness of the uncertainty set, beta-bound
// ordering and presence on coupled rows carrying uncertainty, and convexity of
// the quadratic objective. Never throws; findings go into the report.
ValidationReport validate_instance(const WcaroInstance& inst);

// Converts an inequality-form polytope into slack-standard form with exact
// coordinate bounds obtained from 2*dim LPs.
// Throws UnboundedOmega / EmptyOmega.
OmegaStandard standardize_omega(const Polytope& p);

// Substitutes h := h - h_lower so that the shifted instance has h_lower = 0;
// adjusts b0 and b_omega accordingly. Value-preserving. Returns the shift.
std::pair<WcaroInstance, std::vector<double>> shift_h_lower_bound(const WcaroInstance& inst);

// Replaces separable convex quadratic cost terms by their secant piecewise-
// linear overestimators on the variable ranges, appending one auxiliary
// variable and `segments` rows per quadratic coordinate.
// Throws UnboundedVariable when a quadratic coordinate lacks finite bounds.
FirstLevel piecewise_linearize_objective(const FirstLevel& fl, int segments);

}  // namespace aromip
