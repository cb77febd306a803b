#include "doctest.h"

#include "random_inputs.hpp"
#include "varbound/legendre.hpp"
#include "varbound/sampling.hpp"

#include <cmath>
#include <random>

using namespace varbound;
using namespace varbound::testing;

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

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
}

}  // namespace

TEST_CASE("conjugate of z^2 is s^2/4") {
    auto f = SampledFunction::sample([](double z) { return z * z; }, -4.0, 4.0, 801);
    auto fs = conjugate(f);
    const double h = f.step();
    for (double s : linspace(-4.0, 4.0, 81)) {
        CAPTURE(s);
        CHECK(std::abs(fs.eval(s) - s * s / 4.0) <= 2.0 * h * h);
    }
    // The dual grid spans the hull slopes.
    CHECK(fs.lo() == doctest::Approx(-8.0 + h));
    CHECK(fs.hi() == doctest::Approx(8.0 - h));
}

TEST_CASE("conjugate of |z|^4/4 is 3/4 |s|^(4/3)") {
    auto f = SampledFunction::sample([](double z) { return std::pow(z, 4) / 4.0; }, -3.0, 3.0, 1201);
    auto fs = conjugate(f);
    for (double s : linspace(-8.0, 8.0, 33)) {
        CAPTURE(s);
        CHECK(std::abs(fs.eval(s) - 0.75 * std::pow(std::abs(s), 4.0 / 3.0)) <= 1e-3);
    }
}

TEST_CASE("conjugate of a linear function is an indicator") {
    auto f = SampledFunction::sample([](double z) { return 2.0 * z; }, -3.0, 3.0, 61);
    auto fs = conjugate(f);
    REQUIRE(fs.grid.size() == 1u);
    CHECK(fs.grid[0] == doctest::Approx(2.0));
    CHECK(std::abs(fs.values[0]) <= 1e-12);
    CHECK(std::isinf(fs.eval(1.5)));
    CHECK(std::isinf(fs.eval(2.5)));
    CHECK_THROWS_AS(conjugate(SampledFunction{}), std::invalid_argument);
}

TEST_CASE("convex envelopes") {
    SUBCASE("|y - 1||y + 1|") {
        auto f = SampledFunction::sample([](double y) { return std::abs(y - 1) * std::abs(y + 1); }, -3.0, 3.0, 601);
        auto env = convexify(f);
        const double h = f.step();
        for (std::size_t k = 0; k < f.grid.size(); ++k) {
            const double y = f.grid[k];
            CAPTURE(y);
            if (std::abs(y) <= 1.0 - 2 * h) CHECK(std::abs(env.values[k]) <= 1e-12);
            if (std::abs(y) >= 1.0 + 2 * h) CHECK(env.values[k] == doctest::Approx(f.values[k]).epsilon(1e-12));
        }
    }
    SUBCASE("scalar two-well") {
        auto f = SampledFunction::sample([](double z) { return (z * z - 1) * (z * z - 1); }, -2.0, 2.0, 401);
        auto env = convexify(f);
        for (std::size_t k = 0; k < f.grid.size(); ++k) {
            if (std::abs(f.grid[k]) <= 1.0) CHECK(std::abs(env.values[k]) <= 1e-12);
        }
    }
    SUBCASE("convex input is unchanged") {
        auto f = SampledFunction::sample([](double z) { return std::pow(z, 4); }, -2.0, 2.0, 201);
        auto env = convexify(f);
        for (std::size_t k = 0; k < f.grid.size(); ++k) CHECK(env.values[k] == doctest::Approx(f.values[k]).epsilon(1e-12));
    }
}

TEST_CASE("properties on random sampled functions") {
    std::mt19937_64 rng(20241101);
    for (int trial = 0; trial < 50; ++trial) {
        CAPTURE(trial);
        const auto f = random_function(rng);
        const auto fs = conjugate(f);
        const double scale = 1.0 + max_abs(f.values) + max_abs(fs.values);

        // Involution f*** = f* at the nodes of f*.
        const auto back = conjugate_at(conjugate(fs), fs.grid);
        for (std::size_t k = 0; k < fs.grid.size(); ++k) CHECK(std::abs(back[k] - fs.values[k]) <= 1e-9 * scale);

        // Young-Fenchel on every grid pair.
        double worst = -1e300;
        for (std::size_t i = 0; i < f.grid.size(); ++i) {
            for (std::size_t j = 0; j < fs.grid.size(); ++j)
                worst = std::max(worst, f.grid[i] * fs.grid[j] - f.values[i] - fs.values[j]);
        }
        CHECK(worst <= 1e-12 * scale);

        // The envelope lies below and is idempotent.
        const auto env = convexify(f);
        const auto env2 = convexify(env);
        for (std::size_t k = 0; k < f.grid.size(); ++k) {
            CHECK(env.values[k] <= f.values[k] + 1e-12 * scale);
            CHECK(std::abs(env2.values[k] - env.values[k]) <= 1e-9 * scale);
        }

        // Order reversal: f <= g gives f* >= g*.
        SampledFunction g = f;
        std::uniform_real_distribution<double> U(0.0, 0.5);
        for (double& v : g.values) v += U(rng);
        const auto s = linspace(-5.0, 5.0, 101);
        const auto cf = conjugate_at(f, s), cg = conjugate_at(g, s);
        for (std::size_t k = 0; k < s.size(); ++k) CHECK(cf[k] >= cg[k] - 1e-12 * scale);
    }
}

TEST_CASE("tensor conjugate of a separable function is the sum of conjugates") {
    SampledFunction2D f;
    f.gx = linspace(-2.0, 2.0, 41);
    f.gy = linspace(-1.5, 1.5, 31);
    for (double a : f.gx) {
        for (double b : f.gy) f.values.push_back(a * a + std::pow(b, 4) / 4.0 + 0.5 * b);
    }
    const auto sx = linspace(-3.0, 3.0, 13), sy = linspace(-2.0, 2.0, 9);
    auto c = conjugate_2d(f, sx, sy);
    auto fx = SampledFunction::sample([](double a) { return a * a; }, -2.0, 2.0, 41);
    auto fy = SampledFunction::sample([](double b) { return std::pow(b, 4) / 4.0 + 0.5 * b; }, -1.5, 1.5, 31);
    auto cx = conjugate_at(fx, sx), cy = conjugate_at(fy, sy);
    for (std::size_t i = 0; i < sx.size(); ++i) {
        for (std::size_t j = 0; j < sy.size(); ++j) CHECK(c.at(i, j) == doctest::Approx(cx[i] + cy[j]).epsilon(1e-12));
    }
}

TEST_CASE("convex-additive split") {
    auto pr = load_double("problems/convex_additive.txt");
    auto s = split_convex_additive(pr);
    CHECK(s.f0 == parse_polynomial<double>("z11^2", pr.layout));
    CHECK(s.f1 == parse_polynomial<double>("y1^2 - 2*x1*y1 + x1^2", pr.layout));
    CHECK_THROWS_AS(split_convex_additive(parse_text("dim = 1 1\nomega = 0 1\nf = y1*z11 + z11^2\n")),
                    std::invalid_argument);
    CHECK_THROWS_AS(split_convex_additive(load_double("problems/poincare_mean_zero.txt")), std::invalid_argument);
    CHECK_THROWS_AS(split_convex_additive(load_double("problems/double_well.txt")), std::invalid_argument);
}

TEST_CASE("dual ascent on the convex example") {
    const double oracle = convex_oracle();
    auto pr = load_double("problems/convex_additive.txt");
    auto d = solve_conjugate_dual_1d(pr);
    CHECK(d.converged);
    CHECK(d.coercive);
    CHECK(std::abs(d.objective - oracle) <= 1e-3);
    // sigma is the gradient of f0 along the minimizer: 2 u'.
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        const double du = 1.0 - std::cosh(d.x[i]) / std::sinh(1.0);
        CHECK(std::abs(d.sigma[i] - 2.0 * du) <= 2e-2);
    }
    CHECK(d.rho == discrete_derivative(d.x, d.sigma));
    CHECK(dual_objective(pr, d.x, d.sigma) == doctest::Approx(d.objective).epsilon(1e-12));

    auto cert = certificate_from_dual_fields(d, pr);
    CHECK(cert.record.min_F >= -1e-9);
    CHECK(cert.certified_value == cert.raw_value);
    CHECK(std::abs(cert.certified_value - oracle) <= 5e-3);
    CHECK(cert.certified_value <= oracle + 1e-6);
}

TEST_CASE("trivial instance: u = 0 is optimal") {
    auto pr = parse_text("dim = 1 1\nomega = -1 1\nbc = dirichlet\nf = z11^2 + y1^2\n");
    auto d = solve_conjugate_dual_1d(pr);
    CHECK(std::abs(d.objective) <= 1e-9);
    CHECK(max_abs(d.sigma) <= 1e-9);
    auto cert = certificate_from_dual_fields(d, pr);
    CHECK(std::abs(cert.certified_value) <= 1e-9);
}

TEST_CASE("scalar two-well after convexification") {
    auto pr = load_double("problems/double_well_1d.txt");
    for (bool envelope : {true, false}) {
        CAPTURE(envelope);
        SharpOptions o;
        o.dual.convexify = envelope;
        auto d = solve_conjugate_dual_1d(pr, o.dual);
        CHECK(std::abs(d.objective) <= 1e-9);
        auto cert = certificate_from_dual_fields(d, pr, o);
        CHECK(std::abs(cert.certified_value) <= 1e-9);
        CHECK(cert.record.min_F >= -1e-9);
    }
}

TEST_CASE("linear lower-order term pins rho") {
    // min int u'^2 + u with u(+-1) = 0: u = (x^2 - 1)/4 and value -1/6.
    auto pr = parse_text("dim = 1 1\nomega = -1 1\nbc = dirichlet\nf = z11^2 + y1\n");
    auto d = solve_conjugate_dual_1d(pr);
    CHECK(d.linear_f1);
    CHECK(d.objective == doctest::Approx(-1.0 / 6.0).epsilon(1e-3));
    for (std::size_t i = 0; i < d.x.size(); ++i) CHECK(d.sigma[i] == doctest::Approx(d.x[i]).epsilon(1e-6).scale(1.0));
    auto cert = certificate_from_dual_fields(d, pr);
    CHECK(std::abs(cert.certified_value + 1.0 / 6.0) <= 5e-3);

    auto nat = parse_text("dim = 1 1\nomega = -1 1\nf = z11^2 + y1\n");
    auto dn = solve_conjugate_dual_1d(nat);
    CHECK(std::isinf(dn.objective));
    CHECK_FALSE(dn.warnings.empty());
}

TEST_CASE("noisy fields are shifted or rejected") {
    auto pr = load_double("problems/convex_additive.txt");
    auto d = solve_conjugate_dual_1d(pr);
    std::mt19937 rng(3);
    std::normal_distribution<double> N(0.0, 0.05);
    for (double& s : d.sigma) s += N(rng);
    d.rho = discrete_derivative(d.x, d.sigma);
    CHECK_THROWS_AS(certificate_from_dual_fields(d, pr), FitError);
    SharpOptions loose;
    loose.fit_tolerance = 1.0;
    loose.sigma_degree = 40;
    loose.h_degree = 12;
    auto cert = certificate_from_dual_fields(d, pr, loose);
    CHECK(cert.certified_value < cert.raw_value);
    CHECK(cert.certified_value <= convex_oracle() + 1e-6);
}

TEST_CASE("failed growth check is reported") {
    auto pr = parse_text("dim = 1 1\np = 4\nomega = -1 1\nbc = dirichlet\nf = z11^4 - y1^4\n");
    auto d = solve_conjugate_dual_1d(pr);
    CHECK_FALSE(d.coercive);
    REQUIRE_FALSE(d.warnings.empty());
    CHECK(d.warnings[0].find("uncertified") != std::string::npos);
}

TEST_CASE("pointwise conjugate refines between nodes") {
    auto f = [](double z) { return z * z; };
    CHECK(pointwise_conjugate(f, 0.3, 4.0, 11) == doctest::Approx(0.0225).epsilon(1e-10));
    auto L = VarLayout{1, 1};
    std::vector<double> x = linspace(-1.0, 3.0, 9), v;
    for (double t : x) v.push_back(1.0 - 2.0 * t + 0.5 * t * t * t);
    double res = 1.0;
    auto p = fit_polynomial_x(L, x, v, 3, &res);
    CHECK(res <= 1e-12);
    CHECK(p == p);
    CHECK(p.degree() == 3);
}
