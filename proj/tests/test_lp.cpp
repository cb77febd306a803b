#include "doctest.h"

#include "varbound/lp.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace varbound;

namespace {

double rhs_norm(const LinearProgram& lp) {
    double n = 0.0;
    for (const auto& r : lp.rows) n = std::max(n, std::abs(r.rhs));
    return n;
}

void check_certificates(const LinearProgram& lp, const LpSolution& sol) {
    REQUIRE(sol.optimal());
    CHECK(primal_infeasibility(lp, sol.primal) <= 1e-8 * (1.0 + rhs_norm(lp)));
    CHECK(dual_infeasibility(lp, sol.dual) <= 1e-8);
    CHECK(complementary_slackness(lp, sol) <= 1e-8);
    CHECK(check_duality_gap(lp, sol) <= 1e-8 * (1.0 + std::abs(sol.objective)));
}

// Random bounded, feasible program with every relation and bound type.
LinearProgram random_lp(std::mt19937& rng, int vars, int rows, Sense sense) {
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> rel(0, 2);
    LinearProgram lp;
    lp.sense = sense;
    std::vector<double> x0(vars);
    for (int j = 0; j < vars; ++j) {
        const bool free = j % 3 == 2;
        lp.add_variable(coef(rng), free ? VarBound::Free : VarBound::NonNegative);
        x0[j] = free ? coef(rng) : 2.0 * unit(rng);
    }
    for (int i = 0; i < rows; ++i) {
        std::vector<std::pair<int, double>> row;
        double act = 0.0;
        for (int j = 0; j < vars; ++j) {
            if (unit(rng) < 0.6) {
                row.push_back({j, coef(rng)});
                act += row.back().second * x0[j];
            }
        }
        const int r = rel(rng);
        if (r == 0) lp.add_row(row, Relation::Equal, act);
        if (r == 1) lp.add_row(row, Relation::LessEqual, act + unit(rng));
        if (r == 2) lp.add_row(row, Relation::GreaterEqual, act - unit(rng));
    }
    for (int j = 0; j < vars; ++j) {
        lp.add_row({{j, 1.0}}, Relation::LessEqual, 10.0);
        if (lp.variables[j].bound == VarBound::Free) lp.add_row({{j, 1.0}}, Relation::GreaterEqual, -10.0);
    }
    return lp;
}

}  // namespace

TEST_CASE("tiny programs") {
    LinearProgram a;
    int x = a.add_variable(1.0);
    a.add_row({{x, 1.0}}, Relation::GreaterEqual, 3.0);
    auto sa = solve(a);
    REQUIRE(sa.optimal());
    CHECK(sa.primal[0] == doctest::Approx(3.0));
    check_certificates(a, sa);

    LinearProgram b;
    b.sense = Sense::Maximize;
    int u = b.add_variable(1.0);
    int v = b.add_variable(1.0);
    b.add_row({{u, 1.0}, {v, 1.0}}, Relation::LessEqual, 1.0);
    auto sb = solve(b);
    REQUIRE(sb.optimal());
    CHECK(sb.objective == doctest::Approx(1.0));
    check_certificates(b, sb);

    LinearProgram c;
    int w = c.add_variable(0.0, VarBound::Free);
    c.add_row({{w, 1.0}}, Relation::Equal, 1.0);
    c.add_row({{w, 1.0}}, Relation::Equal, 2.0);
    CHECK(solve(c).status == LpStatus::Infeasible);
    CHECK_THROWS_AS(check_duality_gap(c, solve(c)), std::logic_error);

    LinearProgram d;
    int t = d.add_variable(-1.0);
    d.add_row({{t, 1.0}}, Relation::GreaterEqual, 0.0);
    CHECK(solve(d).status == LpStatus::Unbounded);
}

TEST_CASE("textbook program") {
    // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18: optimum 36 at (2, 6).
    LinearProgram lp;
    lp.sense = Sense::Maximize;
    int x = lp.add_variable(3.0);
    int y = lp.add_variable(5.0);
    lp.add_row({{x, 1.0}}, Relation::LessEqual, 4.0);
    lp.add_row({{y, 2.0}}, Relation::LessEqual, 12.0);
    lp.add_row({{x, 3.0}, {y, 2.0}}, Relation::LessEqual, 18.0);
    auto sol = solve(lp);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == doctest::Approx(36.0));
    CHECK(sol.primal[0] == doctest::Approx(2.0));
    CHECK(sol.primal[1] == doctest::Approx(6.0));
    // Shadow prices (0, 3/2, 1).
    CHECK(sol.dual[0] == doctest::Approx(0.0));
    CHECK(sol.dual[1] == doctest::Approx(1.5));
    CHECK(sol.dual[2] == doctest::Approx(1.0));
    check_certificates(lp, sol);
}

TEST_CASE("random programs: direct and dual routes agree") {
    std::mt19937 rng(77);
    LpOptions direct;
    direct.dualize_ratio = 0.0;
    LpOptions via_dual;
    via_dual.dualize_ratio = 1e-9;  // always dualize
    for (int trial = 0; trial < 40; ++trial) {
        CAPTURE(trial);
        const Sense sense = trial % 2 ? Sense::Maximize : Sense::Minimize;
        auto lp = random_lp(rng, 3 + trial % 6, 2 + trial % 7, sense);
        auto a = solve(lp, direct);
        auto b = solve(lp, via_dual);
        check_certificates(lp, a);
        check_certificates(lp, b);
        CHECK(b.solved_dual);
        CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-8));
    }
}

TEST_CASE("row scaling does not change the answer") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto lp = random_lp(rng, 6, 5, Sense::Minimize);
        auto scaled = lp;
        for (auto& r : scaled.rows) {
            for (auto& [j, a] : r.coeffs) a *= 10.0;
            r.rhs *= 10.0;
        }
        auto a = solve(lp);
        auto b = solve(scaled);
        check_certificates(scaled, b);
        CHECK(check_duality_gap(scaled, b) <= 1e-8 * (1.0 + std::abs(b.objective)));
        CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
    }
}

TEST_CASE("identical input gives identical pivots") {
    std::mt19937 rng(123);
    auto lp = random_lp(rng, 12, 10, Sense::Minimize);
    auto a = solve(lp);
    auto b = solve(lp);
    REQUIRE(a.optimal());
    CHECK(a.pivots == b.pivots);
    CHECK(a.primal == b.primal);
    CHECK(a.dual == b.dual);
}

TEST_CASE("every phase-two iterate is bounded below by the dual objective") {
    std::mt19937 rng(31);
    LpOptions opt;
    opt.dualize_ratio = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        auto lp = random_lp(rng, 8, 6, Sense::Minimize);
        auto sol = solve(lp, opt);
        REQUIRE(sol.optimal());
        double dual_obj = 0.0;
        for (int i = 0; i < lp.num_rows(); ++i) dual_obj += lp.rows[i].rhs * sol.dual[i];
        for (double v : sol.objective_trace) CHECK(dual_obj <= v + 1e-9);
    }
}

TEST_CASE("degenerate program terminates") {
    // Many constraints active at the origin.
    LinearProgram lp;
    lp.sense = Sense::Maximize;
    const int n = 6;
    for (int j = 0; j < n; ++j) lp.add_variable(1.0 + 0.1 * j);
    for (int i = 0; i < 30; ++i) {
        std::vector<std::pair<int, double>> row;
        for (int j = 0; j < n; ++j) row.push_back({j, std::sin(1.0 + i * n + j)});
        lp.add_row(row, Relation::LessEqual, 0.0);
    }
    lp.add_row({{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}, {4, 1.0}, {5, 1.0}}, Relation::LessEqual, 1.0);
    LpOptions opt;
    opt.dualize_ratio = 0.0;
    auto sol = solve(lp, opt);
    CHECK(sol.status != LpStatus::IterationLimit);
    if (sol.optimal()) check_certificates(lp, sol);
}

TEST_CASE("lp text dump") {
    LinearProgram lp;
    int x = lp.add_variable(2.0, VarBound::Free, "a");
    int y = lp.add_variable(-1.0);
    lp.add_row({{x, 1.0}, {y, -2.5}}, Relation::GreaterEqual, 1.0, "first");
    std::ostringstream os;
    lp.write_lp_format(os);
    const std::string s = os.str();
    CHECK(s.find("Minimize") == 0);
    CHECK(s.find("first: 1 a - 2.5 x1 >= 1") != std::string::npos);
    CHECK(s.find("a free") != std::string::npos);
    CHECK(s.find("End") != std::string::npos);
}
