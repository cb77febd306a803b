#include "doctest.h"

#include "varbound/pdr.hpp"

#include <cmath>
#include <random>
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

// Energy of u = x - sinh(x)/sinh(1) on (-1, 1) by composite Simpson.
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

Polynomial poly(const std::string& s, VarLayout L) { return parse_polynomial<double>(s, L); }

DualCertificate random_certificate(const VariationalProblem& pr, std::mt19937& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    DualCertificate c = DualCertificate::zero(pr);
    for (const auto& p : monomial_phi_basis<double>(pr.layout, 3)) {
        const double a = U(rng);
        for (int i = 0; i < pr.layout.n; ++i) c.phi[i] += p[i] * a;
    }
    for (auto& e : c.eta) e = U(rng);
    for (const auto& h : monomial_x_basis<double>(pr.layout, 3)) c.h += h * U(rng);
    return c;
}

PdrOptions options_for(const Loaded& l, int phi_degree, int h_degree) {
    PdrOptions o;
    o.phi_degree = phi_degree;
    o.h_degree = h_degree;
    o.grid = l.grid;
    o.grid.radius = 2.0;
    o.certify.radius = 2.0;
    return o;
}

}  // namespace

TEST_CASE("independent oracle for the convex example") {
    CHECK(convex_oracle() == doctest::Approx(2.0 * (1.0 / std::tanh(1.0) - 1.0)).epsilon(1e-12));
}

TEST_CASE("assemble_F matches a hand expansion") {
    auto pr = parse_text("dim = 1 1\nomega = -1 1\nbc = dirichlet\nf = z11^2\n");
    const VarLayout L = pr.layout;
    const double s = 0.75;
    PolyVector phi = PolyVector::zero(L, 1);
    phi[0] = poly("x1*y1", L) * (-s);
    // D(-s x y) = -s y - s x z.
    const Polynomial F = assemble_F(pr, phi, {}, Polynomial(L));
    CHECK(F == poly("z11^2 - 0.75*y1 - 0.75*x1*z11", L));
    CHECK(assemble_F(pr, PolyVector::zero(L, 1), {}, Polynomial(L)) == pr.f);
    CHECK_THROWS_AS(assemble_F(pr, phi, {1.0}, Polynomial(L)), std::invalid_argument);

    Facet right{0, true};
    const Polynomial G = assemble_G(pr, phi, {}, Polynomial::constant(L, 2.0), right);
    CHECK(G == poly("0.75*x1*y1 - 2", L));
}

TEST_CASE("assemble_F is affine in the certificate") {
    auto l = load("problems/poincare_mean_zero.txt");
    const auto& pr = l.problem;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        auto c1 = random_certificate(pr, rng);
        auto c2 = random_certificate(pr, rng);
        DualCertificate sum = DualCertificate::zero(pr);
        sum.phi[0] = c1.phi[0] + c2.phi[0];
        for (std::size_t k = 0; k < sum.eta.size(); ++k) sum.eta[k] = c1.eta[k] + c2.eta[k];
        sum.h = c1.h + c2.h;
        const Polynomial lhs = assemble_F(pr, c1.phi, c1.eta, c1.h) + assemble_F(pr, c2.phi, c2.eta, c2.h);
        const Polynomial rhs = assemble_F(pr, sum.phi, sum.eta, sum.h) + pr.f;
        for (int k = 0; k < 10; ++k) {
            std::vector<double> p{U(rng) / 2, U(rng), U(rng)};
            CHECK(lhs.eval_double(p) == doctest::Approx(rhs.eval_double(p)).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("zero certificate on a nonnegative integrand") {
    auto pr = parse_text("dim = 1 1\nomega = -1 1\nbc = dirichlet\nf = z11^2\n");
    auto c = certify(pr, DualCertificate::zero(pr));
    CHECK(c.record.verified);
    CHECK(c.record.min_F == 0.0);
    CHECK(c.certified_value == 0.0);
    CHECK(c.raw_value == 0.0);
    CHECK(c.record.note.find("[-2") != std::string::npos);
}

TEST_CASE("a corrupted h is shifted back") {
    auto pr = parse_text("dim = 1 1\nomega = -1 1\nbc = dirichlet\nf = z11^2\n");
    auto c = DualCertificate::zero(pr);
    c.h = Polynomial::constant(pr.layout, 0.1);
    auto out = certify(pr, c);
    CHECK(out.raw_value == doctest::Approx(0.2));
    CHECK(out.record.min_F == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(out.raw_value - out.certified_value == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(out.certified_value <= out.raw_value);
    // Certifying again changes nothing.
    auto again = certify(pr, out);
    CHECK(again.record.min_F >= -1e-12);
    CHECK(again.certified_value == doctest::Approx(out.certified_value).epsilon(1e-12).scale(1.0));
}

TEST_CASE("boundary search pins y for homogeneous Dirichlet data") {
    auto pr = parse_text("dim = 1 1\nomega = 0 1\nbc = dirichlet\nf = z11^2\n");
    auto c = DualCertificate::zero(pr);
    c.phi[0] = poly("y1", pr.layout);  // G = -phi.n vanishes at y = 0
    auto out = certify(pr, c);
    CHECK(out.record.min_G == 0.0);
    // Natural data: y is free, so G = -+y takes negative values.
    auto nat = parse_text("dim = 1 1\nomega = 0 1\nf = z11^2\n");
    auto c2 = DualCertificate::zero(nat);
    c2.phi[0] = poly("y1", nat.layout);
    auto out2 = certify(nat, c2);
    CHECK(out2.record.min_G == doctest::Approx(-2.0));
    // Both facets shift by -2 and min_z (z^2 + z) = -1/4 over a unit interval.
    CHECK(out2.record.min_F == doctest::Approx(-0.25));
    CHECK(out2.certified_value == doctest::Approx(-4.25));
}

TEST_CASE("collocation LP rows and empty node sets") {
    auto pr = parse_text("dim = 1 1\nomega = -1 1\nbc = dirichlet\nf = z11^2\n");
    PdrOptions o;
    o.phi_degree = 2;
    o.h_degree = 2;
    o.grid = default_grid(pr.layout);
    o.grid.y_nodes = 5;
    o.grid.z_nodes = 5;
    o.x_nodes = 5;
    auto nodes = default_collocation(pr, o);
    CHECK(nodes.bulk.size() == 5u * 5u * 5u);
    CHECK(nodes.boundary.size() == 2u);  // only y = 0 survives d = y^2
    auto prog = build_pdr_lp(pr, o, nodes);
    CHECK(prog.eta_vars == 0);
    CHECK(prog.l_vars == 0);
    auto sol = solve(prog.lp);
    REQUIRE(sol.optimal());
    CHECK(sol.objective >= -1e-9);
    CHECK_THROWS_AS(build_pdr_lp(pr, o, CollocationSet{}), std::invalid_argument);
}

TEST_CASE("richer phi bases never lower the collocation optimum") {
    auto l = load("problems/convex_additive.txt");
    double prev = -1e300;
    for (int deg : {1, 2, 3, 4, 5}) {
        CAPTURE(deg);
        auto o = options_for(l, deg, 4);
        auto nodes = default_collocation(l.problem, o);
        auto sol = solve(build_pdr_lp(l.problem, o, nodes).lp);
        REQUIRE(sol.optimal());
        CHECK(sol.objective >= prev - 1e-7);
        prev = sol.objective;
    }
}

TEST_CASE("convex example: collocation reaches the oracle") {
    const double oracle = convex_oracle();
    auto l = load("problems/convex_additive.txt");
    auto res = solve_pdr(l.problem, options_for(l, 4, 4));
    REQUIRE(res.ok());
    const auto& c = res.certificate;
    CHECK(c.certified_value <= c.raw_value);
    CHECK(c.certified_value <= oracle + 1e-6);
    CHECK(std::abs(c.certified_value - oracle) <= 5e-3);
    CHECK(c.record.verified);

    // The restricted ansatz phi = sigma(x) y gets there too.
    auto o = options_for(l, 4, 6);
    o.sigma_y_mode = true;
    auto sig = solve_pdr(l.problem, o);
    REQUIRE(sig.ok());
    CHECK(std::abs(sig.certificate.certified_value - oracle) <= 5e-3);
    CHECK(sig.certificate.certified_value <= oracle + 1e-6);
}

TEST_CASE("certified minima are stable under denser sampling") {
    auto l = load("problems/convex_additive.txt");
    auto res = solve_pdr(l.problem, options_for(l, 4, 4));
    REQUIRE(res.ok());
    const double original = std::abs(res.certificate.record.min_F);
    CertifyOptions dense;
    dense.samples_per_variable = 40960;
    dense.halton_skip = 977;
    auto again = certify(l.problem, res.certificate, dense);
    CHECK(again.record.min_F >= -5.0 * (original + 1e-9));
}

TEST_CASE("mean-zero Poincare problem: the dual bound is zero") {
    auto l = load("problems/poincare_mean_zero.txt");
    auto res = solve_pdr(l.problem, options_for(l, 4, 4));
    REQUIRE(res.ok());
    CHECK(std::abs(res.certificate.certified_value) <= 1e-6);
    CHECK(res.certificate.eta.size() == 2u);
}

TEST_CASE("finite weak duality against the grid relaxation") {
    struct Case {
        std::string file;
        int phi;
        int h;
    };
    for (const auto& cs : {Case{"problems/convex_additive.txt", 4, 4}, Case{"problems/poincare_mean_zero.txt", 4, 4},
                           Case{"problems/double_well_1d.txt", 4, 4}, Case{"problems/double_well.txt", 2, 2}}) {
        CAPTURE(cs.file);
        auto l = load(cs.file);
        auto o = options_for(l, cs.phi, cs.h);
        if (l.problem.layout.n > 1) {
            o.x_nodes = 5;
            o.cutting_rounds = 2;
        }
        auto pdr = solve_pdr(l.problem, o);
        REQUIRE(pdr.ok());
        auto omr = solve_omr(l.problem, l.grid, default_bases(l.problem.layout, std::max(cs.phi, 4), cs.h));
        REQUIRE(omr.ok());
        auto rep = weak_duality_report(omr.value, pdr.certificate, std::nullopt);
        CHECK(rep.consistent);
        CHECK(pdr.certificate.certified_value <= omr.value + 1e-4);
        // Moment form of the same inequality.
        auto ex = extract_measure(omr.measures, l.problem, default_bases(l.problem.layout, std::max(cs.phi, 4), cs.h));
        CHECK(ex.report.objective_value >= pdr.certificate.certified_value - 1e-4);
    }
}

TEST_CASE("sandwich report flags violations") {
    auto pr = parse_text("dim = 1 1\nomega = -1 1\nbc = dirichlet\nf = z11^2\n");
    auto c = certify(pr, DualCertificate::zero(pr));
    auto ok = weak_duality_report(0.0, c, 0.5);
    CHECK(ok.consistent);
    c.certified_value = 1.0;
    auto bad = weak_duality_report(0.0, c, 0.5);
    CHECK_FALSE(bad.consistent);
    CHECK(bad.verdict.find("discretization failure") != std::string::npos);
}

TEST_CASE("certificate files round-trip") {
    auto l = load("problems/poincare_mean_zero.txt");
    auto c = DualCertificate::zero(l.problem);
    c.phi[0] = poly("0.5*x1*y1^2 - y1", l.problem.layout);
    c.eta = {0.25, -1.0 / 3.0};
    c.h = poly("x1^2 + 0.125", l.problem.layout);
    c.l[1] = Polynomial::constant(l.problem.layout, -0.5);
    c = certify(l.problem, c);
    std::ostringstream os;
    write_certificate(os, c, data("problems/poincare_mean_zero.txt"));
    auto doc = KeyValueDocument::parse(os.str());
    auto back = parse_certificate(doc, l.problem.layout);
    CHECK(back.problem_path == std::filesystem::path(data("problems/poincare_mean_zero.txt")));
    const auto& b = back.certificate;
    CHECK(b.phi[0] == c.phi[0]);
    CHECK(b.h == c.h);
    CHECK(b.eta == c.eta);
    CHECK(b.l[1] == c.l[1]);
    CHECK(b.certified_value == c.certified_value);
    CHECK(b.record.min_F == c.record.min_F);
    CHECK(b.record.note == c.record.note);
    CHECK(certificate_value(l.problem, b) == doctest::Approx(c.certified_value));

    CHECK_THROWS_AS(parse_certificate(KeyValueDocument::parse("phi[] = 0\n"), l.problem.layout), InputError);
    CHECK_THROWS_AS(parse_certificate(KeyValueDocument::parse("problem = p\nphi[] = z11\nl[] = 0\nl[] = 0\n"),
                                      l.problem.layout),
                    InputError);
}
