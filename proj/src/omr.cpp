#include "varbound/omr.hpp"

#include "varbound/sampling.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace varbound {

void GridSpec::validate(VarLayout layout) const {
    if (static_cast<int>(cells.size()) != layout.n) throw std::invalid_argument("grid needs one cell count per x axis");
    for (int c : cells) {
        if (c < 1) throw std::invalid_argument("cell counts must be positive");
    }
    if (!(radius > 0.0)) throw std::invalid_argument("truncation radius must be positive");
    if (gauss_points < 0) throw std::invalid_argument("gauss point count must be nonnegative");
    if (y_nodes < 0 || z_nodes < 0) throw std::invalid_argument("node counts must be nonnegative");
    if (y_nodes == 0 && special_y.empty()) throw std::invalid_argument("y grid is empty");
    if (z_nodes == 0 && special_z.empty()) throw std::invalid_argument("z grid is empty");
    auto inside = [&](const std::vector<double>& v, std::size_t len, const char* what) {
        if (v.size() != len) throw std::invalid_argument(std::string("special ") + what + " node has the wrong length");
        for (double c : v) {
            if (std::abs(c) > radius + 1e-12)
                throw std::invalid_argument(std::string("special ") + what + " node lies outside the truncation box");
        }
    };
    for (const auto& v : special_y) inside(v, layout.m, "y");
    for (const auto& v : special_z) inside(v, static_cast<std::size_t>(layout.m * layout.n), "z");
    if (!(support_tol >= 0.0)) throw std::invalid_argument("support tolerance must be nonnegative");
}

GridSpec default_grid(VarLayout layout, double amplitude) {
    GridSpec g;
    g.cells.assign(layout.n, 2);
    g.radius = 4.0 * (1.0 + std::abs(amplitude));
    return g;
}

namespace {

std::vector<std::vector<double>> parse_node_list(const std::vector<std::string>& texts, int line) {
    std::vector<std::vector<double>> out;
    for (const auto& t : texts) {
        std::vector<double> v;
        for (const auto& w : split_whitespace(t)) {
            try {
                v.push_back(to_double(Surd::parse(w)));
            } catch (const std::exception& ex) {
                throw InputError(std::string("bad node coordinate: ") + ex.what(), line);
            }
        }
        out.push_back(std::move(v));
    }
    return out;
}

void set_grid_key(GridSpec& g, const std::string& key, const std::vector<std::string>& values, int line,
                  VarLayout layout) {
    const std::string& v = values.back();
    if (key == "cells") {
        auto words = split_whitespace(v);
        g.cells.clear();
        for (const auto& w : words) g.cells.push_back(parse_int(w, line));
        if (g.cells.size() == 1 && layout.n > 1) g.cells.assign(layout.n, g.cells[0]);
    } else if (key == "gauss") {
        g.gauss_points = parse_int(v, line);
    } else if (key == "radius") {
        g.radius = parse_double(v, line);
    } else if (key == "y_nodes") {
        g.y_nodes = parse_int(v, line);
    } else if (key == "z_nodes") {
        g.z_nodes = parse_int(v, line);
    } else if (key == "special_y") {
        g.special_y = parse_node_list(values, line);
    } else if (key == "special_z") {
        g.special_z = parse_node_list(values, line);
    } else if (key == "tol") {
        g.support_tol = parse_double(v, line);
    } else {
        throw InputError("unknown grid key '" + key + "'", line);
    }
}

}  // namespace

GridSpec parse_grid_section(const KeyValueDocument& doc, VarLayout layout, GridSpec base) {
    const KeyValueSection* sec = doc.section("grid");
    if (!sec) return base;
    sec->reject_unknown({"cells", "gauss", "radius", "y_nodes", "z_nodes", "special_y[]", "special_z[]", "tol"});
    for (const char* key : {"cells", "gauss", "radius", "y_nodes", "z_nodes", "tol"}) {
        if (const auto* e = sec->find(key)) set_grid_key(base, key, {e->value}, e->line, layout);
    }
    for (const char* key : {"special_y", "special_z"}) {
        const std::string k = std::string(key) + "[]";
        std::vector<std::string> all;
        int line = 0;
        for (const auto& e : sec->entries) {
            if (e.key != k) continue;
            all.push_back(e.value);
            if (line == 0) line = e.line;
        }
        if (!all.empty()) set_grid_key(base, key, all, line, layout);
    }
    try {
        base.validate(layout);
    } catch (const std::invalid_argument& ex) {
        throw InputError(std::string("[grid]: ") + ex.what(), sec->line);
    }
    return base;
}

GridSpec apply_grid_overrides(GridSpec spec, const std::string& overrides, VarLayout layout) {
    for (const auto& item : split_on(overrides, ',')) {
        const std::string t = trim_copy(item);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw InputError("grid override '" + t + "' lacks '='");
        const std::string key = trim_copy(t.substr(0, eq));
        const std::string value = trim_copy(t.substr(eq + 1));
        if (key == "special_y" || key == "special_z") {
            std::vector<std::string> nodes;
            for (const auto& n : split_on(value, ';')) nodes.push_back(trim_copy(n));
            set_grid_key(spec, key, nodes, 0, layout);
        } else {
            set_grid_key(spec, key, {value}, 0, layout);
        }
    }
    spec.validate(layout);
    return spec;
}

OmrBases default_bases(VarLayout layout, int phi_degree, int h_degree) {
    OmrBases b;
    b.phi = monomial_phi_basis<double>(layout, phi_degree);
    b.h = monomial_x_basis<double>(layout, h_degree);
    b.l = monomial_x_basis<double>(layout, h_degree);
    return b;
}

int auto_gauss_points(const OmrBases& bases) {
    int deg = 0;
    for (const auto& phi : bases.phi) {
        for (const auto& c : phi.entries) deg = std::max(deg, c.degree_in(Block::X));
    }
    for (const auto& h : bases.h) deg = std::max(deg, h.degree());
    for (const auto& l : bases.l) deg = std::max(deg, l.degree());
    // A k-point rule integrates degree 2k - 1 exactly.
    return std::max(2, (deg + 2) / 2);
}

std::vector<std::vector<double>> tensor_grid(int per_axis, int dims, double radius,
                                             const std::vector<std::vector<double>>& special) {
    std::vector<std::vector<double>> out;
    if (dims == 0) {
        out.push_back({});
        return out;
    }
    if (per_axis > 0) {
        const auto axis = linspace(-radius, radius, per_axis);
        std::vector<int> idx(dims, 0);
        while (true) {
            std::vector<double> v(dims);
            for (int k = 0; k < dims; ++k) v[k] = axis[idx[k]];
            out.push_back(std::move(v));
            int k = dims - 1;
            while (k >= 0 && ++idx[k] == per_axis) idx[k--] = 0;
            if (k < 0) break;
        }
    }
    for (const auto& s : special) {
        bool dup = false;
        for (const auto& v : out) {
            double d = 0.0;
            for (int k = 0; k < dims; ++k) d = std::max(d, std::abs(v[k] - s[k]));
            if (d < 1e-12) dup = true;
        }
        if (!dup) out.push_back(s);
    }
    return out;
}

namespace {

// Gauss points of every cell of a tensor grid over [lo, hi] restricted to `axes`.
struct CellPoints {
    std::vector<std::vector<std::vector<double>>> points;  // per cell, per point: full x
    std::vector<double> measure;                            // per cell
};

CellPoints cell_points(const Box& box, const std::vector<int>& cells, const std::vector<int>& axes,
                       const std::vector<double>& fixed, int q) {
    const GaussRule rule = gauss_legendre(q);
    CellPoints out;
    const int k = static_cast<int>(axes.size());
    std::vector<int> cidx(k, 0);
    while (true) {
        std::vector<double> lo(k), hi(k);
        double meas = 1.0;
        for (int a = 0; a < k; ++a) {
            const int ax = axes[a];
            const double h = (box.hi[ax] - box.lo[ax]) / cells[ax];
            lo[a] = box.lo[ax] + cidx[a] * h;
            hi[a] = lo[a] + h;
            meas *= h;
        }
        std::vector<std::vector<double>> pts;
        std::vector<int> pidx(k, 0);
        while (true) {
            std::vector<double> x = fixed;
            for (int a = 0; a < k; ++a) {
                x[axes[a]] = 0.5 * (lo[a] + hi[a]) + 0.5 * (hi[a] - lo[a]) * rule.nodes[pidx[a]];
            }
            pts.push_back(std::move(x));
            int t = k - 1;
            while (t >= 0 && ++pidx[t] == q) pidx[t--] = 0;
            if (t < 0) break;
        }
        out.points.push_back(std::move(pts));
        out.measure.push_back(meas);
        int t = k - 1;
        while (t >= 0 && ++cidx[t] == cells[axes[t]]) cidx[t--] = 0;
        if (t < 0) break;
    }
    return out;
}

std::vector<double> flat_point(const GridNode& node, VarLayout L) {
    std::vector<double> v;
    v.reserve(L.size());
    v.insert(v.end(), node.x.begin(), node.x.end());
    v.insert(v.end(), node.y.begin(), node.y.end());
    if (node.z.empty()) v.resize(L.size(), 0.0);
    else v.insert(v.end(), node.z.begin(), node.z.end());
    return v;
}

}  // namespace

OmrGrid build_grid(const VariationalProblem& problem, const GridSpec& spec, int gauss_points) {
    const VarLayout L = problem.layout;
    spec.validate(L);
    OmrGrid grid;
    grid.gauss_points = gauss_points;
    const auto ys = tensor_grid(spec.y_nodes, L.m, spec.radius, spec.special_y);
    const auto zs = tensor_grid(spec.z_nodes, L.m * L.n, spec.radius, spec.special_z);
    const Box& box = problem.omega;

    std::vector<int> all_axes;
    for (int i = 0; i < L.n; ++i) all_axes.push_back(i);
    const CellPoints bulk = cell_points(box, spec.cells, all_axes, std::vector<double>(L.n, 0.0), gauss_points);
    grid.cell_volume = bulk.measure;
    for (std::size_t c = 0; c < bulk.points.size(); ++c) {
        for (const auto& x : bulk.points[c]) {
            for (const auto& y : ys) {
                for (const auto& z : zs) {
                    GridNode node{x, y, z, static_cast<int>(c), {}};
                    if (!problem.c.is_zero()) {
                        const auto fp = flat_point(node, L);
                        if (std::abs(problem.c.eval_double(fp)) > spec.support_tol) continue;
                    }
                    grid.gamma.push_back(std::move(node));
                }
            }
        }
    }

    for (const Facet& f : box.facets()) {
        std::vector<int> axes;
        for (int i = 0; i < L.n; ++i) {
            if (i != f.axis) axes.push_back(i);
        }
        std::vector<double> fixed(L.n, 0.0);
        fixed[f.axis] = box.facet_coordinate(f);
        const CellPoints face = cell_points(box, spec.cells, axes, fixed, gauss_points);
        for (std::size_t c = 0; c < face.points.size(); ++c) {
            const int cell = static_cast<int>(grid.facet_cell_area.size());
            grid.facet_cell_area.push_back(face.measure[c]);
            for (const auto& x : face.points[c]) {
                for (const auto& y : ys) {
                    GridNode node{x, y, {}, cell, f};
                    if (!problem.d.is_zero()) {
                        const auto fp = flat_point(node, L);
                        if (std::abs(problem.d.eval_double(fp)) > spec.support_tol) continue;
                    }
                    grid.lambda.push_back(std::move(node));
                }
            }
        }
    }
    if (grid.gamma.empty()) throw std::invalid_argument("no grid node satisfies the bulk constraint c = 0");
    if (grid.lambda.empty()) throw std::invalid_argument("no grid node satisfies the boundary constraint d = 0");
    return grid;
}

OmrProgram build_omr_lp(const VariationalProblem& problem, const GridSpec& spec, const OmrBases& bases) {
    const VarLayout L = problem.layout;
    OmrProgram prog;
    const int q = spec.gauss_points > 0 ? spec.gauss_points : auto_gauss_points(bases);
    prog.grid = build_grid(problem, spec, q);
    const auto& G = prog.grid.gamma;
    const auto& Lam = prog.grid.lambda;
    const int ng = static_cast<int>(G.size());
    auto& lp = prog.lp;

    std::vector<std::vector<double>> gp, lpnt;
    gp.reserve(G.size());
    for (const auto& node : G) gp.push_back(flat_point(node, L));
    for (const auto& node : Lam) lpnt.push_back(flat_point(node, L));

    for (std::size_t k = 0; k < G.size(); ++k) lp.add_variable(problem.f.eval_double(gp[k]));
    for (std::size_t k = 0; k < Lam.size(); ++k) lp.add_variable(problem.g.eval_double(lpnt[k]));

    auto add_eval_row = [&](const Polynomial* on_gamma, const std::vector<Polynomial>* on_lambda, double rhs,
                            std::string name) {
        std::vector<std::pair<int, double>> row;
        if (on_gamma && !on_gamma->is_zero()) {
            for (int k = 0; k < ng; ++k) {
                const double v = on_gamma->eval_double(gp[k]);
                if (v != 0.0) row.push_back({k, v});
            }
        }
        if (on_lambda) {
            for (std::size_t k = 0; k < Lam.size(); ++k) {
                const Polynomial& p = (*on_lambda)[Lam[k].facet.axis * 2 + (Lam[k].facet.upper ? 1 : 0)];
                if (p.is_zero()) continue;
                const double v = p.eval_double(lpnt[k]);
                if (v != 0.0) row.push_back({ng + static_cast<int>(k), v});
            }
        }
        if (row.empty() && std::abs(rhs) == 0.0) return false;
        lp.add_row(std::move(row), Relation::Equal, rhs, std::move(name));
        return true;
    };

    // Cell marginals.
    std::vector<std::vector<std::pair<int, double>>> cell_rows(prog.grid.cell_volume.size());
    for (int k = 0; k < ng; ++k) cell_rows[G[k].cell].push_back({k, 1.0});
    for (std::size_t c = 0; c < cell_rows.size(); ++c) {
        lp.add_row(std::move(cell_rows[c]), Relation::Equal, prog.grid.cell_volume[c], "cell" + std::to_string(c));
        ++prog.marginal_rows;
    }
    std::vector<std::vector<std::pair<int, double>>> face_rows(prog.grid.facet_cell_area.size());
    for (std::size_t k = 0; k < Lam.size(); ++k) face_rows[Lam[k].cell].push_back({ng + static_cast<int>(k), 1.0});
    for (std::size_t c = 0; c < face_rows.size(); ++c) {
        lp.add_row(std::move(face_rows[c]), Relation::Equal, prog.grid.facet_cell_area[c], "face" + std::to_string(c));
        ++prog.marginal_rows;
    }

    // Polynomial marginals; constants are already implied by the cell rows.
    const Box& box = problem.omega;
    for (std::size_t k = 0; k < bases.h.size(); ++k) {
        const auto& h = bases.h[k];
        if (h.degree() == 0) continue;
        if (add_eval_row(&h, nullptr, h.integrate_box(box.lo, box.hi), "hmarg" + std::to_string(k))) ++prog.marginal_rows;
    }
    for (std::size_t k = 0; k < bases.l.size(); ++k) {
        const auto& l = bases.l[k];
        if (l.degree() == 0) continue;
        double exact = 0.0;
        for (const Facet& f : box.facets()) exact += l.integrate_facet(box.lo, box.hi, f.axis, box.facet_coordinate(f));
        std::vector<Polynomial> per_facet(2 * L.n, l);
        if (add_eval_row(nullptr, &per_facet, exact, "lmarg" + std::to_string(k))) ++prog.marginal_rows;
    }

    for (std::size_t k = 0; k < problem.a.size(); ++k) {
        std::vector<Polynomial> per_facet(2 * L.n, problem.b[k]);
        add_eval_row(&problem.a[k], &per_facet, problem.rhs[k], "integral" + std::to_string(k));
        ++prog.integral_rows;
    }

    for (std::size_t k = 0; k < bases.phi.size(); ++k) {
        const Polynomial div = total_divergence(bases.phi[k], L);
        std::vector<Polynomial> per_facet;
        for (const Facet& f : box.facets()) per_facet.push_back(-normal_component(bases.phi[k], f));
        if (add_eval_row(&div, &per_facet, 0.0, "div" + std::to_string(k))) ++prog.divergence_rows;
    }
    return prog;
}

double GridMeasurePair::mu_mass_at_z(const std::vector<double>& z, double tol) const {
    double m = 0.0;
    for (std::size_t k = 0; k < mu_nodes.size(); ++k) {
        double d = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) d = std::max(d, std::abs(mu_nodes[k].z[i] - z[i]));
        if (d <= tol) m += mu_weights[k];
    }
    return m;
}

double GridMeasurePair::mu_mass_at_y(const std::vector<double>& y, double tol) const {
    double m = 0.0;
    for (std::size_t k = 0; k < mu_nodes.size(); ++k) {
        double d = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) d = std::max(d, std::abs(mu_nodes[k].y[i] - y[i]));
        if (d <= tol) m += mu_weights[k];
    }
    return m;
}

OmrResult solve_omr(const VariationalProblem& problem, const GridSpec& spec, const OmrBases& bases,
                    const LpOptions& options) {
    OmrProgram prog = build_omr_lp(problem, spec, bases);
    OmrResult res;
    res.gamma_nodes = static_cast<int>(prog.grid.gamma.size());
    res.lambda_nodes = static_cast<int>(prog.grid.lambda.size());
    res.rows = prog.lp.num_rows();
    res.lp = solve(prog.lp, options);
    if (!res.lp.optimal()) {
        res.message = std::string("grid LP ") + to_string(res.lp.status) + " (" + std::to_string(res.gamma_nodes) +
                      " bulk nodes, " + std::to_string(res.lambda_nodes) + " boundary nodes, " +
                      std::to_string(res.rows) + " rows)";
        if (res.lp.status == LpStatus::Infeasible)
            res.message += "; the grid cannot satisfy the marginal, integral and divergence rows, refine it or add nodes";
        return res;
    }
    res.value = res.lp.objective;
    const int ng = res.gamma_nodes;
    for (int k = 0; k < ng; ++k) {
        const double w = std::max(0.0, res.lp.primal[k]);
        if (w == 0.0) continue;
        res.measures.mu_nodes.push_back(prog.grid.gamma[k]);
        res.measures.mu_weights.push_back(w);
    }
    for (int k = 0; k < res.lambda_nodes; ++k) {
        const double w = std::max(0.0, res.lp.primal[ng + k]);
        if (w == 0.0) continue;
        res.measures.nu_nodes.push_back(prog.grid.lambda[k]);
        res.measures.nu_weights.push_back(w);
    }
    return res;
}

ExtractedMeasure extract_measure(const GridMeasurePair& pair, const VariationalProblem& problem,
                                 const OmrBases& bases, double threshold) {
    const VarLayout L = problem.layout;
    ExtractedMeasure out;
    out.mu.layout = L;
    out.nu.layout = L;
    out.nu.boundary = true;
    auto constant_atom = [&](const std::vector<double>& v) {
        Atom<double> a;
        a.mass = 1.0;
        for (double c : v) a.position.push_back(Polynomial::constant(L, c));
        return a;
    };
    auto piece_at = [&](const GridNode& node, double w, bool boundary) {
        MeasurePiece<double> p;
        p.weight = w;
        p.base.kind = XBase<double>::Kind::Point;
        p.base.point = node.x;
        p.base.facet = node.facet;
        p.y_atoms.push_back(constant_atom(node.y));
        if (!boundary) p.z_atoms.push_back(constant_atom(node.z));
        return p;
    };
    for (std::size_t k = 0; k < pair.mu_nodes.size(); ++k) {
        if (pair.mu_weights[k] < threshold) continue;
        out.mu.pieces.push_back(piece_at(pair.mu_nodes[k], pair.mu_weights[k], false));
    }
    for (std::size_t k = 0; k < pair.nu_nodes.size(); ++k) {
        if (pair.nu_weights[k] < threshold) continue;
        out.nu.pieces.push_back(piece_at(pair.nu_nodes[k], pair.nu_weights[k], true));
    }
    out.report = check_membership(out.mu, out.nu, problem, bases.phi, bases.h, bases.l);
    return out;
}

void write_grid_measure_csv(std::ostream& os, const GridMeasurePair& pair, VarLayout L) {
    os << "kind";
    for (int k = 0; k < L.size(); ++k) os << ',' << L.name(k);
    os << ",weight\n";
    os << std::setprecision(17);
    auto line = [&](const char* kind, const GridNode& node, double w) {
        os << kind;
        for (const auto& v : flat_point(node, L)) os << ',' << v;
        os << ',' << w << '\n';
    };
    for (std::size_t k = 0; k < pair.mu_nodes.size(); ++k) line("mu", pair.mu_nodes[k], pair.mu_weights[k]);
    for (std::size_t k = 0; k < pair.nu_nodes.size(); ++k) line("nu", pair.nu_nodes[k], pair.nu_weights[k]);
}

}  // namespace varbound
