#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aromip/sparse.hpp"

namespace aromip {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct NumericalFailure : Error {
    using Error::Error;
};
struct MissingBetaBounds : Error {
    using Error::Error;
};
struct UnboundedOmega : Error {
    using Error::Error;
};
struct UnboundedVariable : Error {
    using Error::Error;
};
struct TooLarge : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct EmptyOmega : Error {
    using Error::Error;
};
struct InfeasibleFirstLevel : Error {
    using Error::Error;
};

enum class RowSense : char { LessEqual = 'L', Equal = 'E', GreaterEqual = 'G' };
enum class ObjSense { Minimize, Maximize };

// Explicit constraint-matrix LP in the form
//   min/max  obj^T v + obj_constant
//   s.t.     rows:  mat v  {<=,=,>=}  rhs
//            cols:  col_lower <= v <= col_upper
struct LpModel {
    ObjSense sense = ObjSense::Minimize;
    double obj_constant = 0.0;
    std::vector<double> obj;
    std::vector<double> col_lower, col_upper;
    SparseMatrix mat;
    std::vector<RowSense> row_sense;
    std::vector<double> rhs;
    std::vector<std::string> col_names, row_names;

    int num_cols() const { return static_cast<int>(obj.size()); }
    int num_rows() const { return static_cast<int>(rhs.size()); }

    int add_col(std::string name, double lower, double upper, double cost) {
        if (lower > upper) throw Error("column '" + name + "' has crossed bounds");
        obj.push_back(cost);
        col_lower.push_back(lower);
        col_upper.push_back(upper);
        col_names.push_back(std::move(name));
        mat.resize(num_rows(), num_cols());
        return num_cols() - 1;
    }

    int add_row(std::string name, RowSense s, double b,
                const std::vector<std::pair<int, double>>& entries = {}) {
        row_sense.push_back(s);
        rhs.push_back(b);
        row_names.push_back(std::move(name));
        mat.resize(num_rows(), num_cols());
        const int r = num_rows() - 1;
        for (const auto& [c, v] : entries) mat.add(r, c, v);
        return r;
    }

    void set_entry(int row, int col, double value) { mat.add(row, col, value); }

    void check_consistent() const {
        const auto nc = static_cast<std::size_t>(num_cols());
        const auto nr = static_cast<std::size_t>(num_rows());
        if (col_lower.size() != nc || col_upper.size() != nc || col_names.size() != nc)
            throw DimensionMismatch("LpModel column arrays inconsistent");
        if (row_sense.size() != nr || row_names.size() != nr)
            throw DimensionMismatch("LpModel row arrays inconsistent");
        if (mat.rows() != num_rows() || mat.cols() != num_cols())
            throw DimensionMismatch("LpModel matrix shape inconsistent");
        for (std::size_t j = 0; j < nc; ++j)
            if (col_lower[j] > col_upper[j]) throw Error("crossed bounds on column " + col_names[j]);
    }
};

struct MipModel {
    LpModel base;
    std::vector<int> binary_cols;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    SolveStatus status = SolveStatus::Optimal;
    double objective = 0.0;
    std::vector<double> primal;
    std::vector<double> dual_rows;
    std::vector<double> reduced_costs;
    long iterations = 0;
    // Basis status per structural + logical column, reusable as a warm start.
    std::vector<signed char> basis;
};

enum class MipStatus { Optimal, Infeasible, GapLimit, NodeLimit };

struct MipSolution {
    MipStatus status = MipStatus::Optimal;
    double objective = 0.0;
    double best_bound = 0.0;
    std::vector<double> primal;
    long nodes = 0;
    double gap = 0.0;
};

}  // namespace aromip
