#include "doctest.h"

#include "varbound/fem.hpp"
#include "varbound/legendre.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace varbound;

namespace {

std::string data(const std::string& rel) { return std::string(VARBOUND_DATA_DIR) + "/" + rel; }

VariationalProblem parse_text(const std::string& text) {
    return parse_problem(KeyValueDocument::parse(text)).cast<double>();
}

VariationalProblem load_double(const std::string& rel) { return load_problem(data(rel)).cast<double>(); }

double convex_oracle() {
    const int n = 20000;
    const double h = 2.0 / n;
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double x = -1.0 + k * h;
        const double u = x - std::sinh(x) / std::sinh(1.0);
        const double du = 1.0 - std::cosh(x) / std::sinh(1.0);
        const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        acc += w * (du * du + (u - x) * (u - x));
    }
    return acc * h / 3.0;
}

// Exact integral of x^a y^b over [0,1]^2.
double monomial_integral(int a, int b) { return 1.0 / ((a + 1) * (b + 1)); }

}  // namespace

TEST_CASE("uniform meshes") {
    Box interval{{-1.0}, {1.0}};
    auto m1 = Mesh::uniform(interval, 4);
    CHECK(m1.num_nodes() == 5);
    CHECK(m1.cells.size() == 4);
    CHECK(m1.boundary.size() == 2);
    CHECK(m1.h == doctest::Approx(0.5));
    CHECK(m1.nodes.back()[0] == 1.0);

    Box square{{0.0, 0.0}, {1.0, 1.0}};
    auto m2 = Mesh::uniform(square, 8);
    CHECK(m2.num_nodes() == 81);
    CHECK(m2.cells.size() == 128);
    CHECK(m2.boundary.size() == 32);
    int pinned = 0;
    for (bool b : m2.boundary_node) pinned += b;
    CHECK(pinned == 32);
    CHECK_THROWS_AS(Mesh::uniform(square, 0), std::invalid_argument);
}

TEST_CASE("quadrature is exact for polynomials of the requested degree") {
    Box square{{0.0, 0.0}, {1.0, 1.0}};
    auto mesh = Mesh::uniform(square, 3);
    for (int deg = 0; deg <= 8; ++deg) {
        auto qps = cell_quadrature(mesh, deg);
        for (int a = 0; a <= deg; ++a) {
            const int b = deg - a;
            double s = 0.0;
            for (const auto& q : qps) s += q.weight * std::pow(q.x[0], a) * std::pow(q.x[1], b);
            CHECK(s == doctest::Approx(monomial_integral(a, b)).epsilon(1e-12));
        }
    }
    double perimeter = 0.0;
    for (const auto& q : boundary_quadrature(mesh, 2)) perimeter += q.weight;
    CHECK(perimeter == doctest::Approx(4.0));

    Box interval{{-1.0}, {2.0}};
    auto line = Mesh::uniform(interval, 5);
    for (int deg = 0; deg <= 9; ++deg) {
        double s = 0.0;
        for (const auto& q : cell_quadrature(line, deg)) s += q.weight * std::pow(q.x[0], deg);
        CHECK(s == doctest::Approx((std::pow(2.0, deg + 1) - std::pow(-1.0, deg + 1)) / (deg + 1)).epsilon(1e-12));
    }
}

TEST_CASE("energy of interpolants is exact for piecewise linear data") {
    auto pr = parse_text("dim = 2 1\nomega = 0 1 0 1\nf = z11^2 + z12^2 + y1^2\n");
    Box square{{0.0, 0.0}, {1.0, 1.0}};
    auto mesh = Mesh::uniform(square, 4);
    // u = x + 2 y: |grad u|^2 = 5, int u^2 = 1/3 + 2 * 1/2 + 4/3 = 8/3.
    auto v = interpolate(mesh, 1, [](const std::array<double, 2>& x, int) { return x[0] + 2.0 * x[1]; });
    CHECK(fe_energy(pr, mesh, v) == doctest::Approx(5.0 + 8.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("Poincare constant on 256 elements") {
    auto pr = load_double("problems/poincare_mean_zero.txt");
    const double lambda = std::numbers::pi * std::numbers::pi / 4.0;
    auto sol = minimize_fe(pr, Mesh::uniform(pr.omega, 256));
    CHECK(sol.converged);
    CHECK(std::abs(sol.energy - lambda) <= 1e-3);
    // Galerkin approximations of the first eigenvalue lie above it.
    CHECK(sol.energy >= lambda - 1e-12);
    for (double r : sol.constraint_residuals) CHECK(std::abs(r) <= 1e-12);
    CHECK(sol.trace.front() >= sol.trace.back());
}

TEST_CASE("convex example matches the closed form") {
    auto pr = load_double("problems/convex_additive.txt");
    auto sol = minimize_fe(pr, Mesh::uniform(pr.omega, 256));
    CHECK(sol.converged);
    CHECK(std::abs(sol.energy - convex_oracle()) <= 1e-4);
    CHECK(sol.energy >= convex_oracle() - 1e-12);
    // The minimizer interpolates x - sinh(x) / sinh(1) to O(h^2).
    double worst = 0.0;
    for (int a = 0; a < sol.mesh.num_nodes(); ++a) {
        const double x = sol.mesh.nodes[a][0];
        worst = std::max(worst, std::abs(sol.values[a] - (x - std::sinh(x) / std::sinh(1.0))));
    }
    CHECK(worst <= 1e-4);
    // The discrete minimum lies below the energy of the interpolated exact solution.
    auto exact = interpolate(sol.mesh, 1, [](const std::array<double, 2>& x, int) {
        return x[0] - std::sinh(x[0]) / std::sinh(1.0);
    });
    CHECK(sol.energy <= fe_energy(pr, sol.mesh, exact) + 1e-12);
}

TEST_CASE("nested refinement never raises the energy of convex problems") {
    for (const char* text : {"dim = 1 1\nomega = -1 1\nbc = dirichlet\nf = z11^2 + (y1 - x1)^2\n",
                             "dim = 1 1\nomega = 0 2\nf = z11^2 + y1^2 - 2*x1*y1\n",
                             "dim = 1 1\np = 4\nomega = 0 1\nbc = dirichlet\nf = z11^4 + z11^2 + y1\n"}) {
        auto pr = parse_text(text);
        double prev = std::numeric_limits<double>::infinity();
        for (int N : {4, 8, 16, 32, 64, 128}) {
            auto sol = minimize_fe(pr, Mesh::uniform(pr.omega, N));
            CHECK(sol.converged);
            CHECK(sol.energy <= prev + 1e-10);
            prev = sol.energy;
        }
    }
}

TEST_CASE("upper bound dominates certified lower bounds") {
    const double oracle = convex_oracle();
    auto pr = load_double("problems/convex_additive.txt");
    auto sol = minimize_fe(pr, Mesh::uniform(pr.omega, 128));
    auto fields = solve_conjugate_dual_1d(pr);
    CHECK(fields.objective <= sol.energy + 1e-3);
    auto cert = certificate_from_dual_fields(fields, pr);
    CHECK(cert.certified_value <= sol.energy);
    CHECK(cert.certified_value <= oracle);

    PdrOptions o;
    o.x_nodes = 9;
    o.grid.radius = 2.0;
    o.grid.y_nodes = 9;
    o.grid.z_nodes = 9;
    auto pdr = solve_pdr(pr, o);
    CHECK(pdr.certificate.certified_value <= sol.energy);

    // Linear lower-order term: exact value -1/6 is approached from above.
    auto lin = parse_text("dim = 1 1\nomega = -1 1\nbc = dirichlet\nf = z11^2 + y1\n");
    auto lsol = minimize_fe(lin, Mesh::uniform(lin.omega, 64));
    CHECK(lsol.energy >= -1.0 / 6.0 - 1e-12);
    CHECK(lsol.energy <= -1.0 / 6.0 + 1e-3);
    CHECK(solve_conjugate_dual_1d(lin).objective <= lsol.energy + 1e-3);
}

TEST_CASE("two-well energy: multistart upper bound and refinement") {
    auto pr = load_double("problems/double_well.txt");
    FeOptions o;
    o.multistart = 8;
    o.tolerance = 1e-10;
    auto coarse = minimize_fe(pr, Mesh::uniform(pr.omega, 8), o);
    REQUIRE(coarse.starts.size() == 8);
    CHECK(coarse.mesh.h == doctest::Approx(0.125));
    CHECK(coarse.energy >= 0.5);
    // With u = 0 on the boundary, int (div u)^2 <= int |grad u|^2, and
    // f = (|z|^2 + 2)^2 - 4 (tr z)^2, so the energy is at least 4.
    CHECK(coarse.energy >= 4.0 - 1e-9);
    for (const auto& s : coarse.starts) {
        CHECK(s.energy >= coarse.energy);
        CHECK(s.seed == o.seed + static_cast<std::uint64_t>(s.index));
    }

    FeOptions serial = o;
    serial.parallel = false;
    auto again = minimize_fe(pr, Mesh::uniform(pr.omega, 8), serial);
    CHECK(again.values == coarse.values);
    CHECK(again.energy == coarse.energy);

    FeOptions fine_opts = o;
    fine_opts.multistart = 2;
    auto fine = minimize_fe(pr, Mesh::uniform(pr.omega, 16), fine_opts);
    CHECK(fine.energy <= coarse.energy + 1e-6);
    CHECK(fine.energy >= 4.0 - 1e-9);
}

TEST_CASE("unsupported constraints are rejected") {
    Box interval{{0.0}, {1.0}};
    auto mesh = Mesh::uniform(interval, 4);
    CHECK_THROWS_AS(minimize_fe(parse_text("dim = 1 1\nomega = 0 1\nf = z11^2\nc = y1 - x1\n"), mesh),
                    std::invalid_argument);
    CHECK_THROWS_AS(minimize_fe(parse_text("dim = 1 1\nomega = 0 1\nf = z11^2\na[] = x1*y1\nrhs[] = 1\n"), mesh),
                    std::invalid_argument);
    CHECK_THROWS_AS(minimize_fe(parse_text("dim = 1 1\nomega = 0 1\nf = z11^2\na[] = y1^2\nrhs[] = 0\n"), mesh),
                    std::invalid_argument);
    CHECK_THROWS_AS(minimize_fe(parse_text("dim = 1 1\nomega = 0 1\nbc = dirichlet\nd = (y1 - 1)^2\nf = z11^2\n"),
                                mesh),
                    std::invalid_argument);
    CHECK_THROWS_AS(minimize_fe(parse_text("dim = 1 1\nomega = 0 2\nf = z11^2\n"), mesh), std::invalid_argument);
    FeOptions o;
    o.multistart = 0;
    CHECK_THROWS_AS(minimize_fe(parse_text("dim = 1 1\nomega = 0 1\nf = z11^2\n"), mesh, o), std::invalid_argument);
}

TEST_CASE("mean constraint with a nonzero right-hand side") {
    // Minimize int u'^2 + u^2 subject to int u = 1 on (0, 1): u = 1.
    auto pr = parse_text("dim = 1 1\nomega = 0 1\nf = z11^2 + y1^2\na[] = y1\nrhs[] = 1\n");
    auto sol = minimize_fe(pr, Mesh::uniform(pr.omega, 16));
    CHECK(sol.energy == doctest::Approx(1.0).epsilon(1e-10));
    for (double v : sol.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("optimality residual of a sharp certificate") {
    auto pr = load_double("problems/convex_additive.txt");
    auto sol = minimize_fe(pr, Mesh::uniform(pr.omega, 256));
    auto cert = certificate_from_dual_fields(solve_conjugate_dual_1d(pr), pr);
    auto res = optimality_residual(pr, sol, cert);
    CHECK(res.sup_bulk <= 1e-2);
    CHECK(res.min_bulk >= -1e-9);
    CHECK(res.epsilon >= 0.0);
    // The integrals of F and G add up to the gap U - L.
    CHECK(res.integral_bulk + res.integral_boundary ==
          doctest::Approx(sol.energy - cert.certified_value).epsilon(1e-8));
    REQUIRE(res.chebyshev.size() == 3);
    for (const auto& row : res.chebyshev) {
        CHECK(row.holds);
        CHECK(row.lambda + row.sigma <= row.bound);
        CHECK(row.bound == doctest::Approx(2.0 * res.epsilon / row.delta));
    }
}

TEST_CASE("optimality residual with a weak certificate") {
    auto pr = load_double("problems/poincare_mean_zero.txt");
    auto sol = minimize_fe(pr, Mesh::uniform(pr.omega, 64));
    const auto zero = DualCertificate::zero(pr);
    auto res = optimality_residual(pr, sol, zero, {1e-2, 1e-1, 1.0, 10.0});
    // F = u'^2, G = 0: the gap is the whole energy.
    CHECK(res.integral_bulk == doctest::Approx(sol.energy).epsilon(1e-10));
    CHECK(res.sup_boundary == 0.0);
    CHECK(res.epsilon == doctest::Approx(sol.energy / 2.0 + 1e-9));
    for (const auto& row : res.chebyshev) CHECK(row.holds);
    CHECK(res.chebyshev[0].lambda > 1.9);  // u'^2 >= 0.01 away from the ends

    FeSolution bad = sol;
    for (auto& v : bad.values) v += 0.1;
    CHECK_THROWS_AS(optimality_residual(pr, bad, zero), std::invalid_argument);
}
