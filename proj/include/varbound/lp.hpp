#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace varbound {

enum class Sense { Minimize, Maximize };
enum class Relation { Equal, LessEqual, GreaterEqual };
enum class VarBound { NonNegative, Free };

struct LpVariable {
    double cost = 0.0;
    VarBound bound = VarBound::NonNegative;
    std::string name;
};

struct LpRow {
    std::vector<std::pair<int, double>> coeffs;  // (variable index, coefficient)
    Relation relation = Relation::Equal;
    double rhs = 0.0;
    std::string name;
};

/// A linear program with row relations and nonnegative or free variables.
/// Rows are stored sparsely; the solver works on a dense copy.
struct LinearProgram {
    Sense sense = Sense::Minimize;
    std::vector<LpVariable> variables;
    std::vector<LpRow> rows;

    int num_vars() const { return static_cast<int>(variables.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }

    int add_variable(double cost, VarBound bound = VarBound::NonNegative, std::string name = {});
    int add_row(std::vector<std::pair<int, double>> coeffs, Relation relation, double rhs, std::string name = {});

    /// Throws std::invalid_argument on out-of-range indices or non-finite data.
    void validate() const;

    /// Writes the program in CPLEX LP text format.
    void write_lp_format(std::ostream& os) const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure, IterationLimit };

const char* to_string(LpStatus s);

struct LpOptions {
    int max_iterations = 500000;
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-7;
    int refactor_every = 64;
    int degenerate_before_bland = 40;
    /// Solve the dual program instead when rows outnumber columns by this factor
    /// (0 disables).
    double dualize_ratio = 3.0;
};

struct LpSolution {
    LpStatus status = LpStatus::NumericalFailure;
    std::vector<double> primal;
    /// Row multipliers y with objective = sum_i rhs_i y_i at optimality, in the
    /// sense of the program (so c - A^T y >= 0 on nonnegative variables when
    /// minimizing, <= 0 when maximizing).
    std::vector<double> dual;
    double objective = 0.0;
    int iterations = 0;
    bool solved_dual = false;
    std::string message;

    // Pivot history (entering column, leaving column) of the standard-form solve.
    std::vector<std::pair<int, int>> pivots;
    // Phase-two objective values in the program's sense, one per pivot.
    std::vector<double> objective_trace;

    bool optimal() const { return status == LpStatus::Optimal; }
};

LpSolution solve(const LinearProgram& lp, const LpOptions& options = {});

/// Maximum violation of the rows and variable bounds by a primal point.
double primal_infeasibility(const LinearProgram& lp, const std::vector<double>& x);

/// Maximum violation of dual feasibility (reduced-cost signs, multiplier signs).
double dual_infeasibility(const LinearProgram& lp, const std::vector<double>& y);

/// Largest |x_j * reduced_cost_j| and |y_i * row_slack_i|.
double complementary_slackness(const LinearProgram& lp, const LpSolution& sol);

/// |c^T x - b^T y| for an optimal solution; throws std::logic_error otherwise.
double check_duality_gap(const LinearProgram& lp, const LpSolution& sol);

}  // namespace varbound
