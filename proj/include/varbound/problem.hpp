#pragma once

#include "varbound/keyvalue.hpp"
#include "varbound/poly.hpp"

#include <optional>
#include <string>
#include <vector>

namespace varbound {

/// One face of an axis-aligned box: axis `axis` frozen at its lower
/// (upper == false) or upper bound. The outward normal is -e_axis or +e_axis.
struct Facet {
    int axis = 0;
    bool upper = false;

    int normal_sign() const { return upper ? 1 : -1; }
};

/// Axis-aligned box Omega in R^n with exact bounds.
template <class S>
struct BasicBox {
    std::vector<S> lo;
    std::vector<S> hi;

    int dim() const { return static_cast<int>(lo.size()); }

    S volume() const {
        S v(1);
        for (int i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
        return v;
    }

    /// (n-1)-dimensional measure of a facet; 1 when n == 1 (counting measure).
    S facet_area(const Facet& f) const {
        S v(1);
        for (int i = 0; i < dim(); ++i) {
            if (i != f.axis) v *= hi[i] - lo[i];
        }
        return v;
    }

    S boundary_area() const {
        S v(0);
        for (const auto& f : facets()) v += facet_area(f);
        return v;
    }

    S facet_coordinate(const Facet& f) const { return f.upper ? hi[f.axis] : lo[f.axis]; }

    std::vector<Facet> facets() const {
        std::vector<Facet> out;
        for (int i = 0; i < dim(); ++i) {
            out.push_back({i, false});
            out.push_back({i, true});
        }
        return out;
    }

    template <class T>
    BasicBox<T> cast() const {
        BasicBox<T> b;
        for (const auto& v : lo) b.lo.push_back(convert(v, T{}));
        for (const auto& v : hi) b.hi.push_back(convert(v, T{}));
        return b;
    }

private:
    static double convert(const S& v, double) { return to_double(v); }
    static Surd convert(const Surd& v, Surd) { return v; }
};

using Box = BasicBox<double>;

enum class BoundaryCondition { Natural, Dirichlet };

/// Integral variational problem over a box:
///   minimize  int_Omega f(x,u,grad u) dx + int_dOmega g(x,u) dS
///   subject to int a_k + int b_k = rhs_k, c = 0 in Omega, d = 0 on dOmega.
template <class S>
struct BasicProblem {
    std::string name;
    VarLayout layout;
    double p = 2.0;
    BasicBox<S> omega;
    BoundaryCondition bc = BoundaryCondition::Natural;
    BasicPolynomial<S> f;
    BasicPolynomial<S> g;
    std::vector<BasicPolynomial<S>> a;
    std::vector<BasicPolynomial<S>> b;
    std::vector<S> rhs;
    BasicPolynomial<S> c;
    BasicPolynomial<S> d;
    std::optional<double> oracle;  // known optimal value, when supplied

    int n() const { return layout.n; }
    int m() const { return layout.m; }
    std::size_t num_integral_constraints() const { return a.size(); }

    /// Checks the structural invariants; throws std::invalid_argument.
    void validate() const;

    /// Non-fatal findings from validate-like checks (e.g. skipped growth check).
    std::vector<std::string> warnings() const;

    template <class T>
    BasicProblem<T> cast() const {
        BasicProblem<T> out;
        out.name = name;
        out.layout = layout;
        out.p = p;
        out.omega = omega.template cast<T>();
        out.bc = bc;
        out.f = f.template cast<T>();
        out.g = g.template cast<T>();
        for (const auto& q : a) out.a.push_back(q.template cast<T>());
        for (const auto& q : b) out.b.push_back(q.template cast<T>());
        for (const auto& r : rhs) {
            if constexpr (std::is_same_v<T, double>) out.rhs.push_back(to_double(r));
            else out.rhs.push_back(T(r));
        }
        out.c = c.template cast<T>();
        out.d = d.template cast<T>();
        out.oracle = oracle;
        return out;
    }
};

using VariationalProblem = BasicProblem<double>;
using ExactProblem = BasicProblem<Surd>;

/// Parses the top-level section of a problem file. Keys: name, dim, p,
/// omega, bc, f, g, a[], b[], rhs[], c, d, oracle. Sections for other
/// modules are left to their own readers; unknown top-level keys are errors.
ExactProblem parse_problem(const KeyValueDocument& doc);
ExactProblem load_problem(const std::filesystem::path& path);

/// Sum_i d(phi_i)/dx_i + Sum_{i,j} d(phi_i)/dy_j * z_{ji}. phi must not depend on z.
template <class S>
BasicPolynomial<S> total_divergence(const BasicPolyVector<S>& phi, VarLayout layout);

/// phi(x, y) . n_hat on the given facet (just +-phi_axis).
template <class S>
BasicPolynomial<S> normal_component(const BasicPolyVector<S>& phi, const Facet& facet);

/// Substitutes y -> y + u0(x), z -> z + grad u0(x) in every integrand, giving the
/// problem for v = u - u0.
template <class S>
BasicProblem<S> shift_boundary_data(const BasicProblem<S>& problem, const BasicPolyVector<S>& u0);

/// Data (phi0, beta, q, r) for the coercivity/growth hypotheses of strong duality.
struct CoercivityWitness {
    PolyVector phi0;
    double beta = 1.0;
    double q = 2.0;
    double r = 0.0;
};

struct CoercivityCheck {
    std::string inequality;  // "bulk-coercivity", "boundary-coercivity", "growth-a", "growth-b"
    double worst_margin = 0.0;
    std::size_t samples = 0;
    bool passed = false;
    bool vacuous = false;  // no constraint present (growth checks with no a/b)
};

/// Sampling-based evidence for the strong-duality hypotheses. A pass is
/// necessary evidence only; it is not a proof.
struct CoercivityReport {
    std::vector<CoercivityCheck> checks;
    bool inconclusive = false;
    bool passed() const;
};

CoercivityReport check_coercivity(const VariationalProblem& problem, const CoercivityWitness& witness,
                                  double radius, std::size_t samples);

}  // namespace varbound
