#pragma once

#include "varbound/lp.hpp"
#include "varbound/measures.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace varbound {

/// Discretization of the relaxation: x is sampled at Gauss points of a
/// uniform cell grid, y and z on uniform grids over [-R, R] per component,
/// plus explicitly injected nodes.
struct GridSpec {
    std::vector<int> cells;             // per x axis
    int gauss_points = 0;               // per axis and cell; 0 picks one from the bases
    double radius = 2.0;                // truncation of y and z
    int y_nodes = 9;                    // per y component, on [-radius, radius]
    int z_nodes = 9;                    // per z component
    std::vector<std::vector<double>> special_y;  // full y vectors
    std::vector<std::vector<double>> special_z;  // full z vectors, row-major z_{ji}
    double support_tol = 1e-9;

    /// Throws std::invalid_argument when the spec is unusable for `layout`.
    void validate(VarLayout layout) const;
};

/// Default grid: two cells per axis and the radius rule 4 * (1 + amplitude).
GridSpec default_grid(VarLayout layout, double amplitude = 0.0);

/// Reads the optional [grid] section of a problem file. Keys: cells, gauss,
/// radius, y_nodes, z_nodes, special_y[], special_z[], tol. Missing keys keep
/// the values of `base`.
GridSpec parse_grid_section(const KeyValueDocument& doc, VarLayout layout, GridSpec base);

/// Applies comma-separated overrides "key=value,..." using the [grid] keys
/// (special nodes separated by ';' inside one value, coordinates by spaces).
GridSpec apply_grid_overrides(GridSpec spec, const std::string& overrides, VarLayout layout);

/// Uniform tensor nodes on [-radius, radius]^dims (per_axis per axis, none
/// if per_axis == 0) followed by the extra nodes not already present.
std::vector<std::vector<double>> tensor_grid(int per_axis, int dims, double radius,
                                             const std::vector<std::vector<double>>& extra);

/// Test functions of the relaxation.
struct OmrBases {
    std::vector<PolyVector> phi;     // divergence rows
    std::vector<Polynomial> h;       // polynomial x-marginals of mu
    std::vector<Polynomial> l;       // polynomial x-marginals of nu
};

/// Monomial bases: phi through `phi_degree`, h and l through `h_degree`.
OmrBases default_bases(VarLayout layout, int phi_degree, int h_degree);

struct GridNode {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> z;  // empty for boundary nodes
    int cell = 0;           // index into the cell list of its measure
    Facet facet;            // boundary nodes only
};

struct OmrGrid {
    std::vector<GridNode> gamma;        // support nodes of mu
    std::vector<GridNode> lambda;       // support nodes of nu
    std::vector<double> cell_volume;    // per bulk cell
    std::vector<double> facet_cell_area;  // per boundary cell
    int gauss_points = 0;
};

/// Builds and support-filters the nodes. Throws std::invalid_argument if a
/// node set ends up empty.
OmrGrid build_grid(const VariationalProblem& problem, const GridSpec& spec, int gauss_points);

/// Node counts per Gauss rule needed to integrate the bases exactly.
int auto_gauss_points(const OmrBases& bases);

struct OmrProgram {
    LinearProgram lp;
    OmrGrid grid;
    int marginal_rows = 0;
    int integral_rows = 0;
    int divergence_rows = 0;
};

/// Variables: weights of gamma nodes, then lambda nodes. Rows: cell
/// marginals, polynomial marginals, integral constraints, divergence rows.
OmrProgram build_omr_lp(const VariationalProblem& problem, const GridSpec& spec, const OmrBases& bases);

/// Nonnegative node weights forming a discrete measure pair.
struct GridMeasurePair {
    std::vector<GridNode> mu_nodes;
    std::vector<double> mu_weights;
    std::vector<GridNode> nu_nodes;
    std::vector<double> nu_weights;

    /// Total mu weight on nodes whose z is within `tol` of `z`.
    double mu_mass_at_z(const std::vector<double>& z, double tol = 1e-9) const;
    double mu_mass_at_y(const std::vector<double>& y, double tol = 1e-9) const;
};

struct OmrResult {
    LpSolution lp;
    double value = 0.0;
    GridMeasurePair measures;
    int gamma_nodes = 0;
    int lambda_nodes = 0;
    int rows = 0;
    std::string message;

    bool ok() const { return lp.optimal(); }
};

/// Solves the grid relaxation. The value is an estimate of the relaxed
/// minimum, not a certified bound: truncation and the finite bases push it
/// in opposite directions.
OmrResult solve_omr(const VariationalProblem& problem, const GridSpec& spec, const OmrBases& bases,
                    const LpOptions& options = {});

struct ExtractedMeasure {
    Measure mu;
    Measure nu;
    MembershipReport<double> report;
};

/// Drops weights below `threshold` and re-checks membership against `bases`.
ExtractedMeasure extract_measure(const GridMeasurePair& pair, const VariationalProblem& problem,
                                 const OmrBases& bases, double threshold = 1e-12);

/// One CSV line per node: kind,x...,y...,z...,weight (gamma nodes first).
void write_grid_measure_csv(std::ostream& os, const GridMeasurePair& pair, VarLayout layout);

}  // namespace varbound
