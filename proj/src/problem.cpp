#include "varbound/problem.hpp"

#include "varbound/sampling.hpp"

#include <cmath>
#include <limits>

namespace varbound {

template <class S>
void BasicProblem<S>::validate() const {
    if (layout.n < 1 || layout.m < 1) throw std::invalid_argument("dimensions n, m must be >= 1");
    if (omega.dim() != layout.n) throw std::invalid_argument("omega dimension does not match n");
    for (int i = 0; i < layout.n; ++i) {
        if (!(omega.lo[i] < omega.hi[i])) throw std::invalid_argument("omega has an empty axis");
    }
    if (!(p > 1.0)) throw std::invalid_argument("growth exponent p must exceed 1");
    if (a.size() != b.size()) throw std::invalid_argument("a[] and b[] must have equal length");
    if (rhs.size() != a.size()) throw std::invalid_argument("rhs[] must match the length of a[]");
    auto same_layout = [&](const BasicPolynomial<S>& q, const char* what) {
        if (!(q.layout() == layout)) throw std::invalid_argument(std::string(what) + " has the wrong layout");
    };
    same_layout(f, "f");
    same_layout(g, "g");
    same_layout(c, "c");
    same_layout(d, "d");
    for (const auto& q : a) same_layout(q, "a[]");
    for (const auto& q : b) same_layout(q, "b[]");
    if (g.depends_on(Block::Z)) throw std::invalid_argument("g must not depend on z");
    if (d.depends_on(Block::Z)) throw std::invalid_argument("d must not depend on z");
    for (const auto& q : b) {
        if (q.depends_on(Block::Z)) throw std::invalid_argument("b[] must not depend on z");
    }
    if (std::floor(p) == p) {
        const int ip = static_cast<int>(p);
        if (f.degree_in_yz() > ip) throw std::invalid_argument("f grows faster than degree p in (y, z)");
        if (g.degree_in_yz() > ip) throw std::invalid_argument("g grows faster than degree p in y");
        for (const auto& q : a) {
            if (q.degree_in_yz() > ip) throw std::invalid_argument("a[] grows faster than degree p in (y, z)");
        }
        for (const auto& q : b) {
            if (q.degree_in_yz() > ip) throw std::invalid_argument("b[] grows faster than degree p in y");
        }
    }
}

template <class S>
std::vector<std::string> BasicProblem<S>::warnings() const {
    std::vector<std::string> out;
    if (std::floor(p) != p) out.push_back("non-integer p: polynomial growth check skipped");
    return out;
}

template struct BasicProblem<double>;
template struct BasicProblem<Surd>;

ExactProblem parse_problem(const KeyValueDocument& doc) {
    const KeyValueSection& top = doc.root();
    top.reject_unknown({"name", "dim", "p", "omega", "bc", "f", "g", "a[]", "b[]", "rhs[]", "c", "d", "oracle"});
    ExactProblem pr;
    pr.name = top.get("name").value_or(doc.source.stem().string());

    const KeyValueEntry* dim = top.find("dim");
    if (dim == nullptr) throw InputError("missing key 'dim'");
    auto dims = split_whitespace(dim->value);
    if (dims.size() != 2) throw InputError("dim expects 'n m'", dim->line);
    pr.layout = {parse_int(dims[0], dim->line), parse_int(dims[1], dim->line)};
    if (pr.layout.n < 1 || pr.layout.m < 1) throw InputError("dimensions must be positive", dim->line);

    if (const KeyValueEntry* e = top.find("p")) pr.p = parse_double(e->value, e->line);

    const KeyValueEntry* om = top.find("omega");
    if (om == nullptr) throw InputError("missing key 'omega'");
    auto bounds = split_whitespace(om->value);
    if (static_cast<int>(bounds.size()) != 2 * pr.layout.n)
        throw InputError("omega expects 'lo hi' per axis", om->line);
    for (int i = 0; i < pr.layout.n; ++i) {
        try {
            pr.omega.lo.push_back(Surd::parse(bounds[2 * i]));
            pr.omega.hi.push_back(Surd::parse(bounds[2 * i + 1]));
        } catch (const std::exception& ex) {
            throw InputError(ex.what(), om->line);
        }
    }

    if (const KeyValueEntry* e = top.find("bc")) {
        if (e->value == "dirichlet") pr.bc = BoundaryCondition::Dirichlet;
        else if (e->value == "natural") pr.bc = BoundaryCondition::Natural;
        else throw InputError("bc must be 'dirichlet' or 'natural'", e->line);
    }

    auto poly = [&](const KeyValueEntry& e) {
        try {
            return parse_polynomial<Surd>(e.value, pr.layout);
        } catch (const std::exception& ex) {
            throw InputError(ex.what(), e.line);
        }
    };
    auto optional_poly = [&](const char* key) {
        const KeyValueEntry* e = top.find(key);
        return e ? poly(*e) : ExactPolynomial(pr.layout);
    };
    const KeyValueEntry* fe = top.find("f");
    if (fe == nullptr) throw InputError("missing key 'f'");
    pr.f = poly(*fe);
    pr.g = optional_poly("g");
    pr.c = optional_poly("c");
    pr.d = optional_poly("d");

    for (const auto& e : top.entries) {
        if (e.key == "a[]") pr.a.push_back(poly(e));
        if (e.key == "b[]") pr.b.push_back(poly(e));
        if (e.key == "rhs[]") {
            try {
                pr.rhs.push_back(Surd::parse(e.value));
            } catch (const std::exception& ex) {
                throw InputError(ex.what(), e.line);
            }
        }
    }
    if (pr.b.empty()) pr.b.assign(pr.a.size(), ExactPolynomial(pr.layout));
    if (pr.rhs.empty()) pr.rhs.assign(pr.a.size(), Surd(0));

    if (pr.bc == BoundaryCondition::Dirichlet && pr.d.is_zero()) {
        for (int j = 0; j < pr.layout.m; ++j) pr.d += ExactPolynomial::variable(pr.layout, VarId::y(j), 2);
    }
    if (const KeyValueEntry* e = top.find("oracle")) pr.oracle = parse_double(e->value, e->line);

    try {
        pr.validate();
    } catch (const std::invalid_argument& ex) {
        throw InputError(ex.what());
    }
    return pr;
}

ExactProblem load_problem(const std::filesystem::path& path) {
    return parse_problem(KeyValueDocument::load(path));
}

template <class S>
BasicPolynomial<S> total_divergence(const BasicPolyVector<S>& phi, VarLayout layout) {
    if (static_cast<int>(phi.size()) != layout.n)
        throw std::invalid_argument("phi must have n components");
    BasicPolynomial<S> out(layout);
    for (int i = 0; i < layout.n; ++i) {
        const auto& comp = phi[i];
        if (!(comp.layout() == layout)) throw std::invalid_argument("phi has the wrong layout");
        if (comp.depends_on(Block::Z)) throw std::invalid_argument("phi must not depend on z");
        out += comp.partial(VarId::x(i));
        for (int j = 0; j < layout.m; ++j) {
            out += comp.partial(VarId::y(j)) * BasicPolynomial<S>::variable(layout, VarId::z(j, i));
        }
    }
    return out;
}

template Polynomial total_divergence(const PolyVector&, VarLayout);
template ExactPolynomial total_divergence(const ExactPolyVector&, VarLayout);

template <class S>
BasicPolynomial<S> normal_component(const BasicPolyVector<S>& phi, const Facet& facet) {
    return phi[facet.axis] * S(facet.normal_sign());
}

template Polynomial normal_component(const PolyVector&, const Facet&);
template ExactPolynomial normal_component(const ExactPolyVector&, const Facet&);

template <class S>
BasicProblem<S> shift_boundary_data(const BasicProblem<S>& problem, const BasicPolyVector<S>& u0) {
    const VarLayout L = problem.layout;
    if (static_cast<int>(u0.size()) != L.m) throw std::invalid_argument("u0 must have m components");
    for (const auto& comp : u0.entries) {
        if (comp.depends_on(Block::Y) || comp.depends_on(Block::Z))
            throw std::invalid_argument("u0 must be a polynomial in x only");
    }
    std::vector<BasicPolynomial<S>> repl;
    repl.reserve(L.size());
    for (int k = 0; k < L.size(); ++k) {
        VarId v = L.var(k);
        BasicPolynomial<S> r = BasicPolynomial<S>::variable(L, v);
        if (v.block == Block::Y) r += u0[v.row];
        if (v.block == Block::Z) r += u0[v.row].partial(VarId::x(v.col));
        repl.push_back(std::move(r));
    }
    BasicProblem<S> out = problem;
    out.f = problem.f.compose(repl);
    out.g = problem.g.compose(repl);
    out.c = problem.c.compose(repl);
    out.d = problem.d.compose(repl);
    for (std::size_t k = 0; k < problem.a.size(); ++k) {
        out.a[k] = problem.a[k].compose(repl);
        out.b[k] = problem.b[k].compose(repl);
    }
    return out;
}

template VariationalProblem shift_boundary_data(const VariationalProblem&, const PolyVector&);
template ExactProblem shift_boundary_data(const ExactProblem&, const ExactPolyVector&);

bool CoercivityReport::passed() const {
    if (inconclusive) return false;
    for (const auto& c : checks) {
        if (!c.passed) return false;
    }
    return true;
}

namespace {

double norm_range(std::span<const double> v, std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t k = begin; k < end; ++k) s += v[k] * v[k];
    return std::sqrt(s);
}

}  // namespace

CoercivityReport check_coercivity(const VariationalProblem& problem, const CoercivityWitness& w,
                                  double radius, std::size_t samples) {
    const VarLayout L = problem.layout;
    if (!(w.beta > 0) || !(0 <= w.r && w.r < w.q && w.q <= problem.p))
        throw std::invalid_argument("coercivity witness needs beta > 0 and 0 <= r < q <= p");
    PolyVector phi0 = w.phi0.entries.empty() ? PolyVector::zero(L, L.n) : w.phi0;
    const Polynomial bulk = problem.f + total_divergence(phi0, L);
    const double support_tol = 1e-9;

    CoercivityReport report;
    CoercivityCheck bulk_c{"bulk-coercivity", std::numeric_limits<double>::infinity(), 0, false, false};
    CoercivityCheck bnd_c{"boundary-coercivity", std::numeric_limits<double>::infinity(), 0, false, false};
    CoercivityCheck ga{"growth-a", std::numeric_limits<double>::infinity(), 0, false, problem.a.empty()};
    CoercivityCheck gb{"growth-b", std::numeric_limits<double>::infinity(), 0, false, problem.b.empty()};

    const auto& box = problem.omega;
    const bool dirichlet_like = problem.bc == BoundaryCondition::Dirichlet;

    // Bulk: Gamma within the truncation cube.
    HaltonSequence bulk_seq(L.size());
    std::vector<double> pt(L.size());
    for (std::size_t s = 0; s < samples; ++s) {
        auto u = bulk_seq.next();
        for (int i = 0; i < L.n; ++i) pt[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * u[i];
        for (int k = L.n; k < L.size(); ++k) pt[k] = radius * (2.0 * u[k] - 1.0);
        if (!problem.c.is_zero() && std::abs(problem.c.eval_double(pt)) > support_tol) continue;
        const double ny = norm_range(pt, L.n, L.n + L.m);
        const double nz = norm_range(pt, L.n + L.m, L.size());
        const double lhs = bulk.eval_double(pt);
        const double rhs = w.beta * (std::pow(ny, w.q) + std::pow(nz, w.q) - 1.0);
        bulk_c.worst_margin = std::min(bulk_c.worst_margin, lhs - rhs);
        ++bulk_c.samples;
        if (!ga.vacuous) {
            double na = 0.0;
            for (const auto& q : problem.a) na += std::pow(q.eval_double(pt), 2);
            na = std::sqrt(na);
            ga.worst_margin = std::min(ga.worst_margin, w.beta * (std::pow(ny, w.r) + std::pow(nz, w.r)) - na);
            ++ga.samples;
        }
    }

    // Boundary: Lambda on each facet; Dirichlet data pins y = 0.
    HaltonSequence bnd_seq(L.size());
    const auto facets = box.facets();
    for (std::size_t s = 0; s < samples; ++s) {
        auto u = bnd_seq.next();
        const Facet& fct = facets[s % facets.size()];
        for (int i = 0; i < L.n; ++i) pt[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * u[i];
        pt[fct.axis] = box.facet_coordinate(fct);
        for (int k = L.n; k < L.size(); ++k) pt[k] = 0.0;
        if (!dirichlet_like) {
            for (int j = 0; j < L.m; ++j) pt[L.n + j] = radius * (2.0 * u[L.n + j] - 1.0);
        }
        if (!problem.d.is_zero() && std::abs(problem.d.eval_double(pt)) > support_tol) continue;
        const double ny = norm_range(pt, L.n, L.n + L.m);
        const double lhs = problem.g.eval_double(pt) - normal_component(phi0, fct).eval_double(pt);
        const double rhs = w.beta * (std::pow(ny, w.q) - 1.0);
        bnd_c.worst_margin = std::min(bnd_c.worst_margin, lhs - rhs);
        ++bnd_c.samples;
        if (!gb.vacuous) {
            double nb = 0.0;
            for (const auto& q : problem.b) nb += std::pow(q.eval_double(pt), 2);
            nb = std::sqrt(nb);
            gb.worst_margin = std::min(gb.worst_margin, w.beta * std::pow(ny, w.r) - nb);
            ++gb.samples;
        }
    }

    for (CoercivityCheck* c : {&bulk_c, &bnd_c, &ga, &gb}) {
        c->passed = c->vacuous || (c->samples > 0 && c->worst_margin >= 0.0);
        if (!c->vacuous && c->samples == 0) report.inconclusive = true;
        report.checks.push_back(*c);
    }
    return report;
}

}  // namespace varbound
