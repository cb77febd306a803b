#pragma once

#include "varbound/problem.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace varbound {

/// The x-part of a measure piece: Lebesgue measure on a sub-box, surface
/// measure on a facet of a sub-box (a point mass per endpoint when n == 1),
/// or a Dirac mass at a point. Boundary point masses also record their facet.
template <class S>
struct XBase {
    enum class Kind { Box, Facet, Point };
    Kind kind = Kind::Box;
    std::vector<S> lo;  // for Facet: the facet's box, with lo == hi on the facet axis
    std::vector<S> hi;
    Facet facet;        // outward normal; for Facet bases and boundary points
    std::vector<S> point;

    /// Integral of a polynomial in x only against this base.
    S integrate(const BasicPolynomial<S>& p) const;
    S mass() const;

    /// A few points of the base (corners and center) for sampled checks.
    std::vector<std::vector<double>> sample_points() const;
};

/// Dirac atom whose position may depend polynomially on x.
template <class S>
struct Atom {
    std::vector<BasicPolynomial<S>> position;  // m entries for y, m*n entries (row-major z_{ji}) for z
    S mass;
};

template <class S>
struct MeasurePiece {
    S weight{1};
    XBase<S> base;
    std::vector<Atom<S>> y_atoms;
    std::vector<Atom<S>> z_atoms;  // empty for boundary measures
};

/// Finite sum of products (x base) (x) (y atoms) (x) (z atoms).
template <class S>
struct ProductMeasure {
    VarLayout layout;
    bool boundary = false;  // a measure on Lambda (no z) instead of Gamma
    std::vector<MeasurePiece<S>> pieces;

    /// <test, measure>. Exact in Surd mode.
    S moment(const BasicPolynomial<S>& test) const;
    S total_mass() const;

    /// Throws std::invalid_argument on negative weights or masses, or atoms
    /// with the wrong number of coordinates.
    void validate() const;

    ProductMeasure scaled(const S& factor) const;
};

using Measure = ProductMeasure<double>;
using ExactMeasure = ProductMeasure<Surd>;

/// Piecewise polynomial u: Omega -> R^m on a tensor grid of cells.
template <class S>
struct PiecewiseFunction {
    std::vector<std::vector<S>> breaks;  // per axis, increasing, covering Omega
    std::vector<BasicPolyVector<S>> cells;  // row-major over the cell grid, axis 0 slowest
    bool continuous = true;

    int cell_count() const;
    std::vector<int> cells_per_axis() const;

    /// A single polynomial map on the whole box.
    static PiecewiseFunction single(const BasicBox<S>& box, BasicPolyVector<S> u);
};

/// Largest jump of u across shared cell faces, sampled on each face.
template <class S>
double continuity_defect(const PiecewiseFunction<S>& u, VarLayout layout);

/// Occupation and boundary measures generated by u.
template <class S>
std::pair<ProductMeasure<S>, ProductMeasure<S>> pushforward(const PiecewiseFunction<S>& u,
                                                           const BasicProblem<S>& problem);

template <class S>
struct MembershipReport {
    std::vector<S> integral_residuals;    // <a_k,mu> + <b_k,nu> - rhs_k
    std::vector<S> marginal_residuals;    // h_basis then l_basis
    std::vector<S> divergence_residuals;  // <D phi_k, mu> - <phi_k . n, nu>
    double support_violation = 0.0;       // worst |c| or |d| at atoms
    S objective_value{0};
    std::size_t h_count = 0;

    double max_residual() const;
    void write_csv(std::ostream& os) const;
};

/// Default phi basis: x^alpha y^beta e_i with |alpha| + |beta| <= degree.
template <class S>
std::vector<BasicPolyVector<S>> monomial_phi_basis(VarLayout layout, int degree);

/// Monomials in x up to `degree`, used as marginal test functions.
template <class S>
std::vector<BasicPolynomial<S>> monomial_x_basis(VarLayout layout, int degree);

/// The degree of the default phi basis for a problem: max(deg f, 4).
int default_phi_degree(const ExactProblem& problem);

template <class S>
MembershipReport<S> check_membership(const ProductMeasure<S>& mu, const ProductMeasure<S>& nu,
                                     const BasicProblem<S>& problem,
                                     const std::vector<BasicPolyVector<S>>& phi_basis,
                                     const std::vector<BasicPolynomial<S>>& h_basis,
                                     const std::vector<BasicPolynomial<S>>& l_basis);

using Matrix2 = std::array<std::array<Surd, 2>, 2>;

struct DetJensenGap {
    Surd mean_det;  // integral of det z
    Surd det_mean;  // det of the integral of z
};

/// Compares the two sides of the determinant identity for a family of 2x2
/// atoms with masses.
DetJensenGap det_jensen_gap(const std::vector<std::pair<Matrix2, Surd>>& atoms);

/// z-atoms of a boundary-free measure piece, read as 2x2 matrices. Throws
/// unless n == m == 2.
std::vector<std::pair<Matrix2, Surd>> z_atoms_as_matrices(const ExactMeasure& mu, const std::vector<Surd>& at_x);

/// A measure-pair file: header keys `problem` (path relative to the file) and
/// `phi_degree`, then repeated [mu] and [nu] sections with keys `weight`,
/// `x` (box [lo hi ...] | facet AXIS lower|upper | boundary | point COORDS |
/// facet_point AXIS lower|upper COORDS) and
/// atom lines `y = MASS @ P1, P2, ...` and `z = MASS @ P11, P12, ...`.
struct MeasurePairFile {
    std::filesystem::path problem_path;
    std::optional<int> phi_degree;
    ExactMeasure mu;
    ExactMeasure nu;
};

/// Reads the header only (problem path and phi degree).
MeasurePairFile read_measure_header(const KeyValueDocument& doc);

/// Reads the measures of `doc` for the given problem.
MeasurePairFile parse_measure_pair(const KeyValueDocument& doc, const ExactProblem& problem);

template <class S>
void write_measure_pair(std::ostream& os, const ProductMeasure<S>& mu, const ProductMeasure<S>& nu,
                        const std::string& problem_ref);

}  // namespace varbound
