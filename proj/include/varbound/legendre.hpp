#pragma once

#include "varbound/pdr.hpp"

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace varbound {

/// Function sampled on a strictly increasing grid, interpolated linearly
/// between nodes and +infinity outside [grid.front(), grid.back()].
struct SampledFunction {
    std::vector<double> grid;
    std::vector<double> values;

    /// Throws std::invalid_argument for empty, unsorted or non-finite data.
    void validate() const;
    double eval(double s) const;
    double lo() const { return grid.front(); }
    double hi() const { return grid.back(); }
    /// Largest node spacing (0 for a single node).
    double step() const;

    static SampledFunction sample(const std::function<double(double)>& f, double lo, double hi, int count);
};

/// Lower convex hull of the graph, as node indices in increasing order.
std::vector<std::size_t> lower_hull(const SampledFunction& f);

/// max_k (z_k s - f_k) at each s, the conjugate of the sampled data.
std::vector<double> conjugate_at(const SampledFunction& f, std::span<const double> s);

/// Discrete Legendre transform. The dual grid spans the hull slopes: a
/// uniform grid of `dual_count` nodes (0: as many as the input) merged with
/// the slopes themselves, so the piecewise-linear result is exact. A single
/// input node gives the dual range [-1, 1].
SampledFunction conjugate(const SampledFunction& f, int dual_count = 0);

/// Double conjugate evaluated on the original grid: the convex envelope.
SampledFunction convexify(const SampledFunction& f);

/// Tensor-grid samples, values row-major over (gx, gy).
struct SampledFunction2D {
    std::vector<double> gx;
    std::vector<double> gy;
    std::vector<double> values;

    double at(std::size_t i, std::size_t j) const { return values[i * gy.size() + j]; }
};

/// Conjugate on the dual tensor grid (sx, sy) by one sweep per axis.
SampledFunction2D conjugate_2d(const SampledFunction2D& f, const std::vector<double>& sx, const std::vector<double>& sy);

/// f = f0(x, z) + f1(x, y) for scalar problems on an interval.
struct ConvexAdditiveSplit {
    Polynomial f0;
    Polynomial f1;  // also holds terms in x alone
};

/// Throws std::invalid_argument unless n = m = 1, there are no integral or
/// pointwise constraints besides homogeneous Dirichlet data, g = 0, and no
/// term mixes y and z.
ConvexAdditiveSplit split_convex_additive(const VariationalProblem& problem);

struct DualSolveOptions {
    int x_nodes = 129;
    double z_radius = 4.0;
    int z_samples = 601;
    double y_radius = 4.0;
    int y_samples = 601;
    bool convexify = false;  // replace f0(x, .) by its convex envelope first
    std::vector<double> smoothing{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    int max_iterations = 100;  // per smoothing level
    double tolerance = 1e-11;
};

/// sigma and rho = sigma' on the x grid, with the dual objective
/// int -f0*(x, sigma) - f1*(x, rho) under sampled conjugates.
struct DualFieldPair {
    std::vector<double> x;
    std::vector<double> sigma;
    std::vector<double> rho;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    bool linear_f1 = false;     // f1 = F(x) y + K(x): rho pinned to F
    bool coercive = true;       // sampled growth check of f0 and f1
    double growth_constant = 0.0;
    std::vector<std::string> warnings;
};

/// Central differences inside, one-sided at the ends.
std::vector<double> discrete_derivative(const std::vector<double>& x, const std::vector<double>& v);

/// Maximizes the sampled dual by Newton-preconditioned ascent with
/// backtracking on log-sum-exp smoothings of the conjugates, tightening the
/// smoothing level by level. Natural boundaries pin sigma = 0 at both ends.
DualFieldPair solve_conjugate_dual_1d(const VariationalProblem& problem, const DualSolveOptions& options = {});

/// Sampled dual objective of given fields (no smoothing).
double dual_objective(const VariationalProblem& problem, const std::vector<double>& x, const std::vector<double>& sigma,
                      const DualSolveOptions& options = {});

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SharpOptions {
    int sigma_degree = 8;
    int h_degree = 16;  // twice sigma_degree keeps quadratic conjugates exact
    int h_fit_nodes = 257;
    double fit_tolerance = 1e-3;  // relative max residual of the fits
    DualSolveOptions dual;
    CertifyOptions certify;
};

/// phi = -sigma_fit(x) y, eta = 0, h = fit of -f0*(x, sigma_fit) - f1*(x, sigma_fit'),
/// l = 0, then certified. Throws FitError when a fit residual is too large.
DualCertificate certificate_from_dual_fields(const DualFieldPair& fields, const VariationalProblem& problem,
                                             const SharpOptions& options = {});

/// Least-squares polynomial in x1 through (x_k, v_k); the fit is done in a
/// centered and scaled variable and expanded into monomials.
Polynomial fit_polynomial_x(VarLayout layout, const std::vector<double>& x, const std::vector<double>& v, int degree,
                            double* max_residual = nullptr);

/// sup over |z| <= radius of z s - f(z), from `samples` nodes refined by a
/// golden-section search around the best node.
double pointwise_conjugate(const std::function<double(double)>& f, double s, double radius, int samples);

}  // namespace varbound
