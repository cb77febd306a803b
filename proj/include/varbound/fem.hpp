#pragma once

#include "varbound/pdr.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace varbound {

/// Uniform P1 mesh of an interval (n = 1) or a rectangle split into
/// triangles (n = 2).
struct Mesh {
    int dim = 1;
    std::vector<std::array<double, 2>> nodes;
    std::vector<std::array<int, 3>> cells;  // 2 entries used in 1D
    std::vector<bool> boundary_node;

    struct BoundaryPiece {
        std::array<int, 2> nodes;  // second entry unused in 1D
        Facet facet;
    };
    std::vector<BoundaryPiece> boundary;
    double h = 0.0;  // largest element edge along an axis

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int nodes_per_cell() const { return dim + 1; }

    /// `elements` cells per axis (1D: intervals; 2D: squares, two triangles each).
    static Mesh uniform(const Box& box, int elements);
};

/// One quadrature point of a cell or boundary piece.
struct QuadPoint {
    int cell = 0;                   // or boundary piece index
    std::array<double, 2> x{};
    std::array<double, 3> basis{};  // values of the cell's nodal basis functions
    double weight = 0.0;
};

/// Rules exact for polynomials of the given degree on each cell (Gauss in
/// 1D, collapsed Gauss on triangles).
std::vector<QuadPoint> cell_quadrature(const Mesh& mesh, int degree);
std::vector<QuadPoint> boundary_quadrature(const Mesh& mesh, int degree);

struct StartRecord {
    int index = 0;
    std::uint64_t seed = 0;
    double energy = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct FeSolution {
    Mesh mesh;
    int components = 1;
    std::vector<double> values;  // node-major: values[node * m + j]
    double energy = 0.0;         // the upper bound U
    std::vector<double> constraint_residuals;  // int a_k - rhs_k
    std::vector<double> trace;   // energy per iteration of the reported start
    int iterations = 0;
    bool converged = false;
    std::vector<StartRecord> starts;
    std::string message;

    /// u and its gradient at a point of a cell, from the nodal values.
    void evaluate(int cell, const std::array<double, 3>& basis, std::vector<double>& y, std::vector<double>& z) const;
};

struct FeOptions {
    int multistart = 1;
    std::uint64_t seed = 20240917;
    int max_iterations = 20000;
    double tolerance = 1e-13;    // relative energy decrease per iteration
    double init_amplitude = 1.0;
    bool parallel = true;        // one thread per start
};

/// Direct minimization over P1 functions. Supported constraints: homogeneous
/// Dirichlet data (elimination), int u_j = r (projection) and
/// int |u|^2 = r or int u_j^2 = r (spherical retraction). Descent uses the
/// H1 Riesz map of the free nodes with Armijo backtracking. Starts are
/// seeded with seed + index; the lowest energy wins, ties to the lowest index.
FeSolution minimize_fe(const VariationalProblem& problem, const Mesh& mesh, const FeOptions& options = {});

/// Energy of given nodal values, by exact quadrature.
double fe_energy(const VariationalProblem& problem, const Mesh& mesh, const std::vector<double>& values);

/// int a_k(x, u, grad u) + int b_k - rhs_k for each integral constraint.
std::vector<double> fe_constraint_residuals(const VariationalProblem& problem, const Mesh& mesh,
                                            const std::vector<double>& values);

/// Nodal interpolant of u(x) (one function per component).
std::vector<double> interpolate(const Mesh& mesh, int components,
                                const std::function<double(const std::array<double, 2>&, int)>& u);

struct ChebyshevRow {
    double delta = 0.0;
    double lambda = 0.0;  // measure of {F >= delta} in the domain
    double sigma = 0.0;   // measure of {G >= delta} on the boundary
    double bound = 0.0;   // 2 eps / delta
    bool holds = false;
};

struct OptimalityResidual {
    double sup_bulk = 0.0;
    double sup_boundary = 0.0;
    double min_bulk = 0.0;       // negative only if the certificate fails at u
    double min_boundary = 0.0;
    double integral_bulk = 0.0;
    double integral_boundary = 0.0;
    double epsilon = 0.0;        // (U - certified) / 2 + slack
    std::vector<ChebyshevRow> chebyshev;
};

/// F(x, u, grad u) and G(x, u) at quadrature points exact for the composed
/// polynomials; level-set measures are quadrature-weight sums. Throws
/// std::invalid_argument if u violates its constraints by more than 1e-8.
OptimalityResidual optimality_residual(const VariationalProblem& problem, const FeSolution& u,
                                       const DualCertificate& cert,
                                       const std::vector<double>& deltas = {1e-2, 1e-1, 1.0}, double slack = 1e-9);

}  // namespace varbound
