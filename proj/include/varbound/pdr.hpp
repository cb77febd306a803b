#pragma once

#include "varbound/lp.hpp"
#include "varbound/omr.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace varbound {

/// Where and how hard certification looked for negative values of F and G.
struct VerificationRecord {
    bool verified = false;
    double min_F = 0.0;
    double min_G = 0.0;
    std::vector<double> argmin_F;  // flat (x, y, z)
    std::vector<double> argmin_G;
    double shift_h = 0.0;  // added to h (nonpositive)
    double shift_l = 0.0;  // added to every l (nonpositive)
    double radius = 0.0;   // y and z were searched in [-radius, radius]
    int samples = 0;
    int polish_starts = 0;
    std::string note;
};

/// A tuple (phi, eta, h, l) with F = f + D phi - eta.a - h and
/// G = g - phi.n - eta.b - l; if F >= 0 on Gamma and G >= 0 on Lambda then
/// every admissible u has energy at least int h + int l + eta.rhs.
struct DualCertificate {
    VarLayout layout;
    PolyVector phi;              // n components, polynomials in (x, y)
    std::vector<double> eta;     // one per integral constraint
    Polynomial h;                // in x
    std::vector<Polynomial> l;   // one per facet, in box().facets() order
    double raw_value = 0.0;
    double certified_value = 0.0;
    VerificationRecord record;

    /// All-zero certificate for a problem.
    static DualCertificate zero(const VariationalProblem& problem);
};

Polynomial assemble_F(const VariationalProblem& problem, const PolyVector& phi, const std::vector<double>& eta,
                      const Polynomial& h);

Polynomial assemble_G(const VariationalProblem& problem, const PolyVector& phi, const std::vector<double>& eta,
                      const Polynomial& l, const Facet& facet);

/// int h + sum over facets of int l_f + eta.rhs.
double certificate_value(const VariationalProblem& problem, const DualCertificate& cert);

struct CertifyOptions {
    double radius = 2.0;
    int samples_per_variable = 4096;
    int polish_starts = 32;
    int polish_iterations = 300;
    std::uint64_t halton_skip = 1;
};

/// Estimates min F over the truncated Gamma and min G over Lambda by
/// quasi-random sampling, a corner-inclusive tensor grid and projected
/// gradient polish, then shifts h and l down by the negative parts. The
/// result is a valid certificate for the truncated problem; the truncation
/// radius is stored in the record.
DualCertificate certify(const VariationalProblem& problem, DualCertificate cert, const CertifyOptions& options = {});

struct PdrOptions {
    int phi_degree = 4;
    int h_degree = 4;
    bool sigma_y_mode = false;   // phi_i = sigma_i(x) * y_1 only
    bool free_l = false;         // also optimize l on Dirichlet problems
    int x_nodes = 17;            // collocation nodes per x axis, endpoints included
    GridSpec grid;               // y and z collocation nodes (cells and gauss unused)
    double coefficient_bound = 1e3;
    int cutting_rounds = 12;
    double cut_tolerance = 1e-9;
    CertifyOptions certify;
    LpOptions lp;
};

struct PdrProgram {
    LinearProgram lp;
    int phi_vars = 0;
    int eta_vars = 0;
    int h_vars = 0;
    int l_vars = 0;
    int bulk_rows = 0;
    int boundary_rows = 0;
};

/// Collocation nodes (flat points) for F and for G, the latter tagged with
/// their facet.
struct CollocationSet {
    std::vector<std::vector<double>> bulk;
    std::vector<std::vector<double>> boundary;
    std::vector<Facet> boundary_facets;
};

CollocationSet default_collocation(const VariationalProblem& problem, const PdrOptions& options);

/// Variables: phi coefficients, eta, h coefficients, l coefficients (all
/// free, bounded by options.coefficient_bound). Rows: F(node) >= 0, G(node) >= 0.
PdrProgram build_pdr_lp(const VariationalProblem& problem, const PdrOptions& options, const CollocationSet& nodes);

/// Certificate encoded by an LP solution of build_pdr_lp.
DualCertificate decode_certificate(const VariationalProblem& problem, const PdrOptions& options,
                                   const std::vector<double>& primal);

struct PdrResult {
    DualCertificate certificate;
    double lp_value = 0.0;
    int rounds = 0;
    int bulk_nodes = 0;
    int boundary_nodes = 0;
    LpStatus status = LpStatus::NumericalFailure;
    std::string message;

    bool ok() const { return status == LpStatus::Optimal; }
};

/// Collocation LP, certification, and cutting-plane rounds that add the
/// worst points found by certification as new nodes.
PdrResult solve_pdr(const VariationalProblem& problem, const PdrOptions& options);

struct SandwichReport {
    double certified = 0.0;
    double omr = 0.0;
    std::optional<double> upper;
    double tolerance = 0.0;
    bool consistent = true;
    std::string verdict;
};

/// Checks certified <= omr + tolerance (and <= upper + tolerance when known).
SandwichReport weak_duality_report(double omr_value, const DualCertificate& cert, std::optional<double> upper,
                                   double tolerance = 1e-4);

/// Keys: problem, phi[], eta[], h, l[] (facet order), raw_value,
/// certified_value, then a [verification] section.
void write_certificate(std::ostream& os, const DualCertificate& cert, const std::string& problem_ref);

struct CertificateFile {
    std::filesystem::path problem_path;
    DualCertificate certificate;
};

CertificateFile parse_certificate(const KeyValueDocument& doc, const VarLayout& layout);

/// Reads only the problem reference of a certificate file.
std::filesystem::path certificate_problem(const KeyValueDocument& doc);

}  // namespace varbound
