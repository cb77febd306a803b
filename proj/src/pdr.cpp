#include "varbound/pdr.hpp"

#include "varbound/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace varbound {

DualCertificate DualCertificate::zero(const VariationalProblem& problem) {
    const VarLayout L = problem.layout;
    DualCertificate c;
    c.layout = L;
    c.phi = PolyVector::zero(L, L.n);
    c.eta.assign(problem.a.size(), 0.0);
    c.h = Polynomial(L);
    c.l.assign(2 * L.n, Polynomial(L));
    return c;
}

Polynomial assemble_F(const VariationalProblem& problem, const PolyVector& phi, const std::vector<double>& eta,
                      const Polynomial& h) {
    if (eta.size() != problem.a.size()) throw std::invalid_argument("eta has the wrong length");
    Polynomial F = problem.f + total_divergence(phi, problem.layout) - h;
    for (std::size_t k = 0; k < eta.size(); ++k) F -= problem.a[k] * eta[k];
    return F;
}

Polynomial assemble_G(const VariationalProblem& problem, const PolyVector& phi, const std::vector<double>& eta,
                      const Polynomial& l, const Facet& facet) {
    if (eta.size() != problem.b.size()) throw std::invalid_argument("eta has the wrong length");
    Polynomial G = problem.g - normal_component(phi, facet) - l;
    for (std::size_t k = 0; k < eta.size(); ++k) G -= problem.b[k] * eta[k];
    return G;
}

double certificate_value(const VariationalProblem& problem, const DualCertificate& cert) {
    const Box& box = problem.omega;
    double v = cert.h.integrate_box(box.lo, box.hi);
    const auto facets = box.facets();
    for (std::size_t f = 0; f < facets.size(); ++f)
        v += cert.l[f].integrate_facet(box.lo, box.hi, facets[f].axis, box.facet_coordinate(facets[f]));
    for (std::size_t k = 0; k < cert.eta.size(); ++k) v += cert.eta[k] * to_double(problem.rhs.empty() ? 0.0 : problem.rhs[k]);
    return v;
}

namespace {

struct SearchResult {
    double value = std::numeric_limits<double>::infinity();
    std::vector<double> argmin;
    std::vector<std::pair<double, std::vector<double>>> polished;  // all polished local minima
    int samples = 0;
    bool ok = true;
};

// Minimizes P over the box [lo, hi] (coordinates with lo == hi are fixed).
SearchResult minimize_on_box(const Polynomial& P, const std::vector<double>& lo, const std::vector<double>& hi,
                             const CertifyOptions& opt) {
    const VarLayout L = P.layout();
    std::vector<int> free_dims;
    for (int k = 0; k < L.size(); ++k) {
        if (hi[k] > lo[k]) free_dims.push_back(k);
    }
    SearchResult res;
    std::vector<std::pair<double, std::vector<double>>> pool;
    auto consider = [&](std::vector<double> p) {
        const double v = P.eval_double(p);
        if (!std::isfinite(v)) {
            res.ok = false;
            return;
        }
        pool.push_back({v, std::move(p)});
    };
    const int d = static_cast<int>(free_dims.size());
    if (d == 0) {
        consider(lo);
    } else {
        HaltonSequence halton(d, opt.halton_skip);
        const int n = opt.samples_per_variable * d;
        for (int s = 0; s < n; ++s) {
            auto u = halton.next();
            std::vector<double> p = lo;
            for (int a = 0; a < d; ++a) p[free_dims[a]] = lo[free_dims[a]] + u[a] * (hi[free_dims[a]] - lo[free_dims[a]]);
            consider(std::move(p));
        }
        // Tensor grid with the corners, where polynomial minima often sit.
        int k = 2;
        while (k < 9 && std::pow(k + 1.0, d) <= 20000.0) ++k;
        std::vector<int> idx(d, 0);
        while (true) {
            std::vector<double> p = lo;
            for (int a = 0; a < d; ++a) {
                const int fd = free_dims[a];
                p[fd] = lo[fd] + (hi[fd] - lo[fd]) * idx[a] / (k - 1);
            }
            consider(std::move(p));
            int t = d - 1;
            while (t >= 0 && ++idx[t] == k) idx[t--] = 0;
            if (t < 0) break;
        }
    }
    res.samples = static_cast<int>(pool.size());
    const std::size_t starts = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(std::max(1, opt.polish_starts)));
    std::partial_sort(pool.begin(), pool.begin() + starts, pool.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<Polynomial> grad;
    for (int fd : free_dims) grad.push_back(P.partial(L.var(fd)));
    double span = 0.0;
    for (int fd : free_dims) span = std::max(span, hi[fd] - lo[fd]);

    for (std::size_t s = 0; s < starts; ++s) {
        std::vector<double> x = pool[s].second;
        double fx = pool[s].first;
        double step = 0.1 * span;
        for (int it = 0; it < opt.polish_iterations && d > 0; ++it) {
            std::vector<double> g(d);
            double gn = 0.0;
            for (int a = 0; a < d; ++a) {
                g[a] = grad[a].eval_double(x);
                gn += g[a] * g[a];
            }
            if (!std::isfinite(gn)) {
                res.ok = false;
                break;
            }
            if (gn < 1e-28) break;
            bool accepted = false;
            while (step > 1e-15 * (1.0 + span)) {
                std::vector<double> xn = x;
                double decrease = 0.0;
                for (int a = 0; a < d; ++a) {
                    const int fd = free_dims[a];
                    xn[fd] = std::clamp(x[fd] - step * g[a], lo[fd], hi[fd]);
                    decrease += g[a] * (x[fd] - xn[fd]);
                }
                const double fn = P.eval_double(xn);
                if (!std::isfinite(fn)) {
                    res.ok = false;
                    break;
                }
                if (fn <= fx - 1e-4 * decrease && decrease > 0.0) {
                    x = std::move(xn);
                    fx = fn;
                    step = std::min(2.0 * step, span);
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted || !res.ok) break;
        }
        res.polished.push_back({fx, x});
        if (fx < res.value) {
            res.value = fx;
            res.argmin = x;
        }
    }
    return res;
}

bool is_zero_dirichlet(const VariationalProblem& problem) {
    const VarLayout L = problem.layout;
    Polynomial sumsq(L);
    for (int j = 0; j < L.m; ++j) sumsq += Polynomial::variable(L, VarId::y(j), 2);
    return problem.d == sumsq;
}

// Negative local minima found during certification, used as cutting planes.
struct Cuts {
    std::vector<std::vector<double>> bulk;
    std::vector<std::pair<std::vector<double>, Facet>> boundary;
};

DualCertificate certify_impl(const VariationalProblem& problem, DualCertificate cert, const CertifyOptions& options,
                             Cuts* cuts, double cut_tol) {
    const VarLayout L = problem.layout;
    const Box& box = problem.omega;
    const double R = options.radius;
    VerificationRecord rec;
    rec.radius = R;
    rec.polish_starts = options.polish_starts;
    rec.verified = true;
    std::vector<std::string> notes;
    notes.push_back("y and z searched in [-" + std::to_string(R) + ", " + std::to_string(R) + "] only");

    const double raw = certificate_value(problem, cert);
    cert.raw_value = raw;

    std::vector<double> lo(L.size(), -R), hi(L.size(), R);
    for (int i = 0; i < L.n; ++i) {
        lo[i] = box.lo[i];
        hi[i] = box.hi[i];
    }
    if (!problem.c.is_zero()) notes.push_back("bulk search ignores c = 0 (a superset, so the shift is conservative)");
    const Polynomial F = assemble_F(problem, cert.phi, cert.eta, cert.h);
    SearchResult bulk = minimize_on_box(F, lo, hi, options);
    rec.samples += bulk.samples;
    rec.min_F = bulk.value;
    if (cuts) {
        for (const auto& [v, p] : bulk.polished) {
            if (v < -cut_tol) cuts->bulk.push_back(p);
        }
    }
    rec.argmin_F = bulk.argmin;
    if (!bulk.ok) rec.verified = false;

    const bool pinned = is_zero_dirichlet(problem);
    if (!pinned && !problem.d.is_zero())
        notes.push_back("boundary search ignores d = 0 (a superset, so the shift is conservative)");
    rec.min_G = std::numeric_limits<double>::infinity();
    const auto facets = box.facets();
    for (std::size_t f = 0; f < facets.size(); ++f) {
        std::vector<double> flo = lo, fhi = hi;
        flo[facets[f].axis] = fhi[facets[f].axis] = box.facet_coordinate(facets[f]);
        for (int j = 0; j < L.m; ++j) {
            if (pinned) flo[L.n + j] = fhi[L.n + j] = 0.0;
        }
        for (int k = L.n + L.m; k < L.size(); ++k) flo[k] = fhi[k] = 0.0;
        const Polynomial G = assemble_G(problem, cert.phi, cert.eta, cert.l[f], facets[f]);
        SearchResult s = minimize_on_box(G, flo, fhi, options);
        rec.samples += s.samples;
        if (cuts) {
            for (const auto& [v, p] : s.polished) {
                if (v < -cut_tol) cuts->boundary.push_back({p, facets[f]});
            }
        }
        if (!s.ok) rec.verified = false;
        if (s.value < rec.min_G) {
            rec.min_G = s.value;
            rec.argmin_G = s.argmin;
        }
    }
    if (!rec.verified) notes.push_back("search produced non-finite values; minimum estimate unreliable");

    rec.shift_h = std::min(0.0, rec.min_F);
    rec.shift_l = std::min(0.0, rec.min_G);
    if (rec.shift_h < 0.0) cert.h += Polynomial::constant(L, rec.shift_h);
    if (rec.shift_l < 0.0) {
        for (auto& l : cert.l) l += Polynomial::constant(L, rec.shift_l);
    }
    std::string note;
    for (std::size_t k = 0; k < notes.size(); ++k) note += (k ? "; " : "") + notes[k];
    rec.note = note;
    cert.record = std::move(rec);
    cert.certified_value = certificate_value(problem, cert);
    return cert;
}

}  // namespace

DualCertificate certify(const VariationalProblem& problem, DualCertificate cert, const CertifyOptions& options) {
    return certify_impl(problem, std::move(cert), options, nullptr, 0.0);
}

namespace {

struct PdrBasis {
    std::vector<PolyVector> phi;
    std::vector<Polynomial> div;                      // D phi_k
    std::vector<Polynomial> h;
    std::vector<std::vector<Polynomial>> l;           // per facet
};

PdrBasis pdr_basis(const VariationalProblem& problem, const PdrOptions& opt) {
    const VarLayout L = problem.layout;
    PdrBasis b;
    if (opt.sigma_y_mode) {
        std::vector<int> xs;
        for (int i = 0; i < L.n; ++i) xs.push_back(i);
        const Polynomial y1 = Polynomial::variable(L, VarId::y(0));
        for (int i = 0; i < L.n; ++i) {
            for (const auto& e : monomials_up_to(L, xs, opt.phi_degree)) {
                auto v = PolyVector::zero(L, L.n);
                v[i] = Polynomial::monomial(L, e) * y1;
                b.phi.push_back(std::move(v));
            }
        }
    } else {
        b.phi = monomial_phi_basis<double>(L, opt.phi_degree);
    }
    for (const auto& p : b.phi) b.div.push_back(total_divergence(p, L));
    b.h = monomial_x_basis<double>(L, opt.h_degree);
    const bool l_free = problem.bc == BoundaryCondition::Natural || opt.free_l;
    for (const Facet& f : problem.omega.facets()) {
        std::vector<Polynomial> basis;
        if (l_free) {
            std::vector<int> xs;
            for (int i = 0; i < L.n; ++i) {
                if (i != f.axis) xs.push_back(i);
            }
            for (const auto& e : monomials_up_to(L, xs, opt.h_degree)) basis.push_back(Polynomial::monomial(L, e));
        }
        b.l.push_back(std::move(basis));
    }
    return b;
}

}  // namespace

CollocationSet default_collocation(const VariationalProblem& problem, const PdrOptions& options) {
    const VarLayout L = problem.layout;
    const Box& box = problem.omega;
    const GridSpec& g = options.grid;
    const auto ys = tensor_grid(g.y_nodes, L.m, g.radius, g.special_y);
    const auto zs = tensor_grid(g.z_nodes, L.m * L.n, g.radius, g.special_z);
    std::vector<std::vector<double>> axes;
    for (int i = 0; i < L.n; ++i) axes.push_back(linspace(box.lo[i], box.hi[i], std::max(2, options.x_nodes)));

    auto x_points = [&](int fixed_axis, double fixed_value) {
        std::vector<std::vector<double>> out;
        std::vector<int> idx(L.n, 0);
        const int k = static_cast<int>(axes[0].size());
        while (true) {
            std::vector<double> x(L.n);
            for (int i = 0; i < L.n; ++i) x[i] = i == fixed_axis ? fixed_value : axes[i][idx[i]];
            out.push_back(std::move(x));
            int t = L.n - 1;
            while (t >= 0 && (t == fixed_axis || ++idx[t] == k)) {
                if (t != fixed_axis) idx[t] = 0;
                --t;
            }
            if (t < 0) break;
        }
        return out;
    };

    CollocationSet set;
    for (const auto& x : x_points(-1, 0.0)) {
        for (const auto& y : ys) {
            for (const auto& z : zs) {
                std::vector<double> p = x;
                p.insert(p.end(), y.begin(), y.end());
                p.insert(p.end(), z.begin(), z.end());
                if (!problem.c.is_zero() && std::abs(problem.c.eval_double(p)) > g.support_tol) continue;
                set.bulk.push_back(std::move(p));
            }
        }
    }
    for (const Facet& f : box.facets()) {
        for (const auto& x : x_points(f.axis, box.facet_coordinate(f))) {
            for (const auto& y : ys) {
                std::vector<double> p = x;
                p.insert(p.end(), y.begin(), y.end());
                p.resize(L.size(), 0.0);
                if (!problem.d.is_zero() && std::abs(problem.d.eval_double(p)) > g.support_tol) continue;
                set.boundary.push_back(std::move(p));
                set.boundary_facets.push_back(f);
            }
        }
    }
    return set;
}

PdrProgram build_pdr_lp(const VariationalProblem& problem, const PdrOptions& options, const CollocationSet& nodes) {
    if (nodes.bulk.empty()) throw std::invalid_argument("empty collocation set");
    const Box& box = problem.omega;
    const PdrBasis basis = pdr_basis(problem, options);
    PdrProgram prog;
    LinearProgram& lp = prog.lp;
    lp.sense = Sense::Maximize;

    const auto facets = box.facets();
    auto facet_index = [&](const Facet& f) { return f.axis * 2 + (f.upper ? 1 : 0); };

    for (std::size_t k = 0; k < basis.phi.size(); ++k) lp.add_variable(0.0, VarBound::Free, "phi" + std::to_string(k));
    prog.phi_vars = static_cast<int>(basis.phi.size());
    for (std::size_t k = 0; k < problem.a.size(); ++k)
        lp.add_variable(to_double(problem.rhs[k]), VarBound::Free, "eta" + std::to_string(k));
    prog.eta_vars = static_cast<int>(problem.a.size());
    for (std::size_t k = 0; k < basis.h.size(); ++k)
        lp.add_variable(basis.h[k].integrate_box(box.lo, box.hi), VarBound::Free, "h" + std::to_string(k));
    prog.h_vars = static_cast<int>(basis.h.size());
    std::vector<int> l_first(facets.size());
    for (std::size_t f = 0; f < facets.size(); ++f) {
        l_first[f] = lp.num_vars();
        for (std::size_t k = 0; k < basis.l[f].size(); ++k) {
            const double w = basis.l[f][k].integrate_facet(box.lo, box.hi, facets[f].axis, box.facet_coordinate(facets[f]));
            lp.add_variable(w, VarBound::Free, "l" + std::to_string(f) + "_" + std::to_string(k));
            ++prog.l_vars;
        }
    }
    const int eta0 = prog.phi_vars;
    const int h0 = eta0 + prog.eta_vars;

    for (const auto& p : nodes.bulk) {
        std::vector<std::pair<int, double>> row;
        for (int k = 0; k < prog.phi_vars; ++k) {
            const double v = basis.div[k].eval_double(p);
            if (v != 0.0) row.push_back({k, v});
        }
        for (int k = 0; k < prog.eta_vars; ++k) {
            const double v = -problem.a[k].eval_double(p);
            if (v != 0.0) row.push_back({eta0 + k, v});
        }
        for (int k = 0; k < prog.h_vars; ++k) row.push_back({h0 + k, -basis.h[k].eval_double(p)});
        lp.add_row(std::move(row), Relation::GreaterEqual, -problem.f.eval_double(p));
        ++prog.bulk_rows;
    }
    for (std::size_t q = 0; q < nodes.boundary.size(); ++q) {
        const auto& p = nodes.boundary[q];
        const Facet& f = nodes.boundary_facets[q];
        const int fi = facet_index(f);
        std::vector<std::pair<int, double>> row;
        for (int k = 0; k < prog.phi_vars; ++k) {
            const double v = -f.normal_sign() * basis.phi[k][f.axis].eval_double(p);
            if (v != 0.0) row.push_back({k, v});
        }
        for (int k = 0; k < prog.eta_vars; ++k) {
            const double v = -problem.b[k].eval_double(p);
            if (v != 0.0) row.push_back({eta0 + k, v});
        }
        for (std::size_t k = 0; k < basis.l[fi].size(); ++k)
            row.push_back({l_first[fi] + static_cast<int>(k), -basis.l[fi][k].eval_double(p)});
        if (row.empty() && problem.g.eval_double(p) >= 0.0) continue;
        lp.add_row(std::move(row), Relation::GreaterEqual, -problem.g.eval_double(p));
        ++prog.boundary_rows;
    }
    if (options.coefficient_bound > 0.0) {
        for (int j = 0; j < lp.num_vars(); ++j) {
            lp.add_row({{j, 1.0}}, Relation::LessEqual, options.coefficient_bound);
            lp.add_row({{j, 1.0}}, Relation::GreaterEqual, -options.coefficient_bound);
        }
    }
    return prog;
}

DualCertificate decode_certificate(const VariationalProblem& problem, const PdrOptions& options,
                                   const std::vector<double>& primal) {
    const PdrBasis basis = pdr_basis(problem, options);
    const VarLayout L = problem.layout;
    DualCertificate cert = DualCertificate::zero(problem);
    std::size_t j = 0;
    for (const auto& p : basis.phi) {
        const double c = primal.at(j++);
        for (int i = 0; i < L.n; ++i) cert.phi[i] += p[i] * c;
    }
    for (auto& e : cert.eta) e = primal.at(j++);
    for (const auto& h : basis.h) cert.h += h * primal.at(j++);
    for (std::size_t f = 0; f < basis.l.size(); ++f) {
        for (const auto& l : basis.l[f]) cert.l[f] += l * primal.at(j++);
    }
    cert.raw_value = certificate_value(problem, cert);
    cert.certified_value = cert.raw_value;
    return cert;
}

PdrResult solve_pdr(const VariationalProblem& problem, const PdrOptions& options) {
    PdrResult res;
    CollocationSet nodes = default_collocation(problem, options);
    bool have = false;
    // The zero certificate is always a candidate; collocation LPs with a
    // degenerate optimum can return wild certificates that certify worse.
    res.certificate = certify(problem, DualCertificate::zero(problem), options.certify);
    bool from_lp = false;
    for (int round = 0; round <= options.cutting_rounds; ++round) {
        PdrProgram prog = build_pdr_lp(problem, options, nodes);
        LpSolution sol = solve(prog.lp, options.lp);
        res.rounds = round + 1;
        res.bulk_nodes = static_cast<int>(nodes.bulk.size());
        res.boundary_nodes = static_cast<int>(nodes.boundary.size());
        if (!sol.optimal()) {
            res.status = sol.status;
            res.message = std::string("collocation LP ") + to_string(sol.status) + ": " + sol.message;
            if (!have) return res;
            break;
        }
        Cuts cuts;
        DualCertificate cert = certify_impl(problem, decode_certificate(problem, options, sol.primal), options.certify,
                                            &cuts, options.cut_tolerance);
        if (!have) res.lp_value = sol.objective;
        have = true;
        if (cert.certified_value > res.certificate.certified_value) {
            res.certificate = cert;
            res.lp_value = sol.objective;
            from_lp = true;
        }
        res.status = LpStatus::Optimal;
        if (cuts.bulk.empty() && cuts.boundary.empty()) break;
        for (auto& p : cuts.bulk) nodes.bulk.push_back(std::move(p));
        for (auto& [p, f] : cuts.boundary) {
            nodes.boundary.push_back(std::move(p));
            nodes.boundary_facets.push_back(f);
        }
    }
    if (!from_lp) res.message = "zero certificate kept: no collocation certificate certified higher";
    return res;
}

SandwichReport weak_duality_report(double omr_value, const DualCertificate& cert, std::optional<double> upper,
                                   double tolerance) {
    SandwichReport rep;
    rep.certified = cert.certified_value;
    rep.omr = omr_value;
    rep.upper = upper;
    rep.tolerance = tolerance;
    std::ostringstream os;
    os << std::setprecision(10);
    os << "certified " << rep.certified << " <= omr " << rep.omr;
    if (upper) os << " <= upper " << *upper;
    if (rep.certified > rep.omr + tolerance) {
        rep.consistent = false;
        os << "; discretization failure: certified value exceeds the grid value by " << rep.certified - rep.omr;
    }
    if (upper && rep.certified > *upper + tolerance) {
        rep.consistent = false;
        os << "; certified value exceeds the upper bound by " << rep.certified - *upper;
    }
    if (!cert.record.verified) {
        rep.consistent = false;
        os << "; certificate unverified";
    }
    rep.verdict = os.str();
    return rep;
}

void write_certificate(std::ostream& os, const DualCertificate& cert, const std::string& problem_ref) {
    os << std::setprecision(17);
    os << "problem = " << problem_ref << "\n";
    for (const auto& p : cert.phi.entries) os << "phi[] = " << (p.is_zero() ? std::string("0") : p.to_string()) << "\n";
    for (double e : cert.eta) os << "eta[] = " << e << "\n";
    os << "h = " << (cert.h.is_zero() ? std::string("0") : cert.h.to_string()) << "\n";
    for (const auto& l : cert.l) os << "l[] = " << (l.is_zero() ? std::string("0") : l.to_string()) << "\n";
    os << "raw_value = " << cert.raw_value << "\n";
    os << "certified_value = " << cert.certified_value << "\n";
    const auto& r = cert.record;
    os << "\n[verification]\n";
    os << "verified = " << (r.verified ? "true" : "false") << "\n";
    os << "min_F = " << r.min_F << "\n";
    os << "min_G = " << r.min_G << "\n";
    os << "shift_h = " << r.shift_h << "\n";
    os << "shift_l = " << r.shift_l << "\n";
    os << "radius = " << r.radius << "\n";
    os << "samples = " << r.samples << "\n";
    os << "polish_starts = " << r.polish_starts << "\n";
    os << "note = " << r.note << "\n";
}

std::filesystem::path certificate_problem(const KeyValueDocument& doc) {
    auto p = doc.root().get("problem");
    if (!p) throw InputError("certificate lacks a problem reference");
    std::filesystem::path path(*p);
    if (path.is_relative() && !doc.source.empty()) path = doc.source.parent_path() / path;
    return path;
}

CertificateFile parse_certificate(const KeyValueDocument& doc, const VarLayout& layout) {
    const auto& root = doc.root();
    root.reject_unknown({"problem", "phi[]", "eta[]", "h", "l[]", "raw_value", "certified_value"});
    CertificateFile out;
    out.problem_path = certificate_problem(doc);
    DualCertificate& c = out.certificate;
    c.layout = layout;
    auto poly = [&](const std::string& text, int line) {
        try {
            return parse_polynomial<double>(text, layout);
        } catch (const std::exception& ex) {
            throw InputError(ex.what(), line);
        }
    };
    for (const auto& e : root.entries) {
        if (e.key == "phi[]") c.phi.entries.push_back(poly(e.value, e.line));
        if (e.key == "eta[]") c.eta.push_back(parse_double(e.value, e.line));
        if (e.key == "l[]") c.l.push_back(poly(e.value, e.line));
        if (e.key == "h") c.h = poly(e.value, e.line);
    }
    if (!root.find("h")) c.h = Polynomial(layout);
    if (static_cast<int>(c.phi.size()) != layout.n) throw InputError("certificate needs n phi[] entries");
    if (static_cast<int>(c.l.size()) != 2 * layout.n) throw InputError("certificate needs one l[] entry per facet");
    for (const auto& p : c.phi.entries) {
        if (p.depends_on(Block::Z)) throw InputError("phi must not depend on z");
    }
    if (c.h.depends_on(Block::Y) || c.h.depends_on(Block::Z)) throw InputError("h must depend on x only");
    if (auto v = root.get("raw_value")) c.raw_value = parse_double(*v);
    if (auto v = root.get("certified_value")) c.certified_value = parse_double(*v);
    if (const auto* sec = doc.section("verification")) {
        sec->reject_unknown({"verified", "min_F", "min_G", "shift_h", "shift_l", "radius", "samples", "polish_starts", "note"});
        auto& r = c.record;
        if (auto v = sec->get("verified")) r.verified = parse_bool(*v);
        if (auto v = sec->get("min_F")) r.min_F = parse_double(*v);
        if (auto v = sec->get("min_G")) r.min_G = parse_double(*v);
        if (auto v = sec->get("shift_h")) r.shift_h = parse_double(*v);
        if (auto v = sec->get("shift_l")) r.shift_l = parse_double(*v);
        if (auto v = sec->get("radius")) r.radius = parse_double(*v);
        if (auto v = sec->get("samples")) r.samples = parse_int(*v);
        if (auto v = sec->get("polish_starts")) r.polish_starts = parse_int(*v);
        if (auto v = sec->get("note")) r.note = *v;
    }
    return out;
}

}  // namespace varbound
