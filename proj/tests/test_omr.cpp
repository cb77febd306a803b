#include "doctest.h"

#include "varbound/omr.hpp"

#include <cmath>
#include <sstream>

using namespace varbound;

namespace {

std::string data(const std::string& rel) { return std::string(VARBOUND_DATA_DIR) + "/" + rel; }

struct Loaded {
    VariationalProblem problem;
    GridSpec grid;
};

Loaded load(const std::string& rel) {
    auto doc = KeyValueDocument::load(data(rel));
    Loaded l;
    l.problem = parse_problem(doc).cast<double>();
    l.grid = parse_grid_section(doc, l.problem.layout, default_grid(l.problem.layout));
    return l;
}

VariationalProblem parse_text(const std::string& text) {
    return parse_problem(KeyValueDocument::parse(text)).cast<double>();
}

void check_extraction(const OmrResult& res, const VariationalProblem& pr, const OmrBases& bases) {
    auto ex = extract_measure(res.measures, pr, bases);
    CHECK(ex.report.max_residual() <= 1e-7);
    CHECK(ex.report.support_violation <= 1e-9);
    CHECK(ex.report.objective_value == doctest::Approx(res.value).epsilon(1e-9).scale(1.0));
}

}  // namespace

TEST_CASE("grid section parsing and overrides") {
    auto l = load("problems/poincare_mean_zero.txt");
    CHECK(l.grid.cells == std::vector<int>{4});
    CHECK(l.grid.radius == 1.0);
    REQUIRE(l.grid.special_y.size() == 2);
    CHECK(l.grid.special_y[0][0] == doctest::Approx(std::sqrt(0.5)));

    auto g = apply_grid_overrides(l.grid, "cells=6, z_nodes=7, special_y=0.25;-0.25", l.problem.layout);
    CHECK(g.cells == std::vector<int>{6});
    CHECK(g.z_nodes == 7);
    CHECK(g.special_y.size() == 2);
    CHECK_THROWS_AS(apply_grid_overrides(l.grid, "bogus=1", l.problem.layout), InputError);
    CHECK_THROWS(apply_grid_overrides(l.grid, "special_y=3", l.problem.layout));  // outside radius

    auto bad = KeyValueDocument::parse("dim = 1 1\nomega = 0 1\nf = z11^2\n[grid]\nwhat = 1\n");
    CHECK_THROWS_AS(parse_grid_section(bad, VarLayout{1, 1}, default_grid(VarLayout{1, 1})), InputError);

    auto two = default_grid(VarLayout{2, 2}, 0.5);
    CHECK(two.cells == std::vector<int>{2, 2});
    CHECK(two.radius == doctest::Approx(6.0));
}

TEST_CASE("gauss count follows the basis degree") {
    auto b = default_bases(VarLayout{1, 1}, 4, 2);
    CHECK(auto_gauss_points(b) == 3);
    auto c = default_bases(VarLayout{1, 1}, 7, 2);
    CHECK(auto_gauss_points(c) == 4);
}

TEST_CASE("zero integrand with Dirichlet data") {
    auto pr = parse_text("dim = 1 1\nomega = 0 1\nbc = dirichlet\nf = z11^2\n");
    GridSpec g = default_grid(pr.layout);
    g.radius = 1.0;
    g.y_nodes = 3;
    g.z_nodes = 3;
    auto bases = default_bases(pr.layout, 2, 2);
    auto res = solve_omr(pr, g, bases);
    REQUIRE(res.ok());
    CHECK(std::abs(res.value) <= 1e-10);
    // Any optimal pair puts all gradient mass on z = 0.
    CHECK(res.measures.mu_mass_at_z({0.0}) == doctest::Approx(1.0));
    check_extraction(res, pr, bases);
}

TEST_CASE("mean-zero Poincare problem relaxes to zero") {
    auto l = load("problems/poincare_mean_zero.txt");
    auto bases = default_bases(l.problem.layout, 3, 2);
    auto res = solve_omr(l.problem, l.grid, bases);
    REQUIRE(res.ok());
    CHECK(std::abs(res.value) <= 1e-8);
    CHECK(res.measures.mu_mass_at_z({0.0}) == doctest::Approx(2.0));
    check_extraction(res, l.problem, bases);

    // With y nodes where y^2 >= 1/2, the constraints pin the atoms to +-1/sqrt(2).
    GridSpec g = l.grid;
    g.y_nodes = 0;
    g.special_y = {{std::sqrt(0.5)}, {-std::sqrt(0.5)}, {1.0}, {-1.0}};
    auto pinned = solve_omr(l.problem, g, default_bases(l.problem.layout, 4, 2));
    REQUIRE(pinned.ok());
    CHECK(std::abs(pinned.value) <= 1e-8);
    CHECK(pinned.measures.mu_mass_at_y({std::sqrt(0.5)}, 1e-12) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(pinned.measures.mu_mass_at_y({-std::sqrt(0.5)}, 1e-12) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("two-well problem relaxes to zero with the wells split evenly") {
    auto l = load("problems/double_well.txt");
    auto bases = default_bases(l.problem.layout, 4, 2);
    auto res = solve_omr(l.problem, l.grid, bases);
    REQUIRE(res.ok());
    CHECK(std::abs(res.value) <= 1e-8);
    CHECK(std::abs(res.measures.mu_mass_at_z({1, 0, 0, 1}) - 0.5) <= 1e-6);
    CHECK(std::abs(res.measures.mu_mass_at_z({-1, 0, 0, -1}) - 0.5) <= 1e-6);
    check_extraction(res, l.problem, bases);
}

TEST_CASE("empty grids are rejected") {
    auto pr = parse_text("dim = 1 1\nomega = 0 1\nbc = dirichlet\nf = z11^2\n");
    GridSpec g = default_grid(pr.layout);
    g.z_nodes = 0;
    CHECK_THROWS_WITH_AS(solve_omr(pr, g, default_bases(pr.layout, 2, 2)), "z grid is empty", std::invalid_argument);
    // Dirichlet data with no y node at 0 leaves no boundary support.
    g = default_grid(pr.layout);
    g.y_nodes = 2;
    CHECK_THROWS_AS(build_grid(pr, g, 2), std::invalid_argument);
}

TEST_CASE("infeasible grid reports diagnostics") {
    // Integral constraint int u = 5 cannot hold with |y| <= 1 on (0, 1).
    auto pr = parse_text("dim = 1 1\nomega = 0 1\nf = z11^2\na[] = y1\nrhs[] = 5\n");
    GridSpec g = default_grid(pr.layout);
    g.radius = 1.0;
    g.y_nodes = 3;
    g.z_nodes = 3;
    auto res = solve_omr(pr, g, default_bases(pr.layout, 2, 2));
    CHECK(res.lp.status == LpStatus::Infeasible);
    CHECK(res.message.find("infeasible") != std::string::npos);
}

TEST_CASE("richer divergence bases never lower the value") {
    auto l = load("problems/convex_additive.txt");
    GridSpec g = l.grid;
    g.cells = {4};
    g.y_nodes = 9;
    g.z_nodes = 9;
    g.gauss_points = 4;
    double prev = -1.0;
    for (int deg : {1, 2, 3, 4, 5}) {
        CAPTURE(deg);
        auto res = solve_omr(l.problem, g, default_bases(l.problem.layout, deg, 2));
        REQUIRE(res.ok());
        CHECK(res.value >= prev - 1e-9);
        prev = res.value;
    }
}

TEST_CASE("convex example: refinement study") {
    const double oracle = 2.0 * (1.0 / std::tanh(1.0) - 1.0);
    auto l = load("problems/convex_additive.txt");
    auto bases = default_bases(l.problem.layout, 4, 2);
    std::vector<double> values;
    for (auto [cells, nodes] : {std::pair{4, 9}, std::pair{8, 17}}) {
        GridSpec g = l.grid;
        g.cells = {cells};
        g.y_nodes = nodes;
        g.z_nodes = nodes;
        auto res = solve_omr(l.problem, g, bases);
        REQUIRE(res.ok());
        check_extraction(res, l.problem, bases);
        values.push_back(res.value);
    }
    CHECK(values[1] <= values[0] + 1e-9);
    CHECK(std::abs(values[1] - oracle) <= 0.05);
}

TEST_CASE("grid measure csv") {
    auto pr = parse_text("dim = 1 1\nomega = 0 1\nbc = dirichlet\nf = z11^2\n");
    GridSpec g = default_grid(pr.layout);
    g.radius = 1.0;
    g.y_nodes = 3;
    g.z_nodes = 3;
    auto res = solve_omr(pr, g, default_bases(pr.layout, 2, 2));
    REQUIRE(res.ok());
    std::ostringstream os;
    write_grid_measure_csv(os, res.measures, pr.layout);
    const std::string s = os.str();
    CHECK(s.rfind("kind,x1,y1,z11,weight\n", 0) == 0);
    CHECK(s.find("\nnu,0,0,0,1\n") != std::string::npos);
    CHECK(s.find("\nnu,1,0,0,1\n") != std::string::npos);
}

TEST_CASE("extracted grid measures round-trip through the measure file format") {
    auto l = load("problems/double_well.txt");
    auto bases = default_bases(l.problem.layout, 4, 2);
    auto res = solve_omr(l.problem, l.grid, bases);
    REQUIRE(res.ok());
    auto ex = extract_measure(res.measures, l.problem, bases);
    std::ostringstream os;
    os << "problem = " << data("problems/double_well.txt") << "\nphi_degree = 4\n";
    write_measure_pair(os, ex.mu, ex.nu, "");
    auto doc = KeyValueDocument::parse(os.str());
    auto exact = load_problem(data("problems/double_well.txt"));
    auto pair = parse_measure_pair(doc, exact);
    CHECK(pair.mu.pieces.size() == ex.mu.pieces.size());
    CHECK(pair.nu.pieces.size() == ex.nu.pieces.size());
    CHECK(to_double(pair.nu.total_mass()) == doctest::Approx(4.0));
}
