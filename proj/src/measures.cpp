#include "varbound/measures.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace varbound {

namespace {

template <class S>
std::vector<S> cell_lo(const std::vector<std::vector<S>>& breaks, const std::vector<int>& idx) {
    std::vector<S> v;
    for (std::size_t a = 0; a < breaks.size(); ++a) v.push_back(breaks[a][idx[a]]);
    return v;
}

template <class S>
std::vector<S> cell_hi(const std::vector<std::vector<S>>& breaks, const std::vector<int>& idx) {
    std::vector<S> v;
    for (std::size_t a = 0; a < breaks.size(); ++a) v.push_back(breaks[a][idx[a] + 1]);
    return v;
}

std::vector<int> unflatten(int flat, const std::vector<int>& counts) {
    std::vector<int> idx(counts.size());
    for (int a = static_cast<int>(counts.size()) - 1; a >= 0; --a) {
        idx[a] = flat % counts[a];
        flat /= counts[a];
    }
    return idx;
}

int flatten(const std::vector<int>& idx, const std::vector<int>& counts) {
    int f = 0;
    for (std::size_t a = 0; a < counts.size(); ++a) f = f * counts[a] + idx[a];
    return f;
}

template <class S>
std::string scalar_text(const S& v) {
    if constexpr (std::is_same_v<S, double>) {
        std::ostringstream os;
        os << std::setprecision(17) << v;
        return os.str();
    } else {
        return v.to_string();
    }
}

// Replacement list mapping x to itself and y, z to the atom positions.
template <class S>
std::vector<BasicPolynomial<S>> atom_substitution(VarLayout L, const Atom<S>& ya, const Atom<S>* za) {
    std::vector<BasicPolynomial<S>> sub;
    sub.reserve(L.size());
    for (int i = 0; i < L.n; ++i) sub.push_back(BasicPolynomial<S>::variable(L, VarId::x(i)));
    for (int j = 0; j < L.m; ++j) sub.push_back(ya.position[j]);
    for (int k = 0; k < L.m * L.n; ++k) sub.push_back(za ? za->position[k] : BasicPolynomial<S>(L));
    return sub;
}

template <class S>
S piece_moment(VarLayout L, const MeasurePiece<S>& piece, const BasicPolynomial<S>& test) {
    S acc(0);
    for (const auto& ya : piece.y_atoms) {
        if (piece.z_atoms.empty()) {
            acc += ya.mass * piece.base.integrate(test.compose(atom_substitution<S>(L, ya, nullptr)));
            continue;
        }
        for (const auto& za : piece.z_atoms) {
            acc += ya.mass * za.mass * piece.base.integrate(test.compose(atom_substitution(L, ya, &za)));
        }
    }
    return piece.weight * acc;
}

template <class S>
double worst_on_atoms(VarLayout L, const MeasurePiece<S>& piece, const BasicPolynomial<S>& q) {
    double worst = 0.0;
    auto pts = piece.base.sample_points();
    auto check = [&](const BasicPolynomial<S>& composed) {
        if (composed.is_zero()) return;
        Polynomial cd = composed.template cast<double>();
        std::vector<double> full(L.size(), 0.0);
        for (const auto& x : pts) {
            std::copy(x.begin(), x.end(), full.begin());
            worst = std::max(worst, std::abs(cd.eval_double(full)));
        }
    };
    for (const auto& ya : piece.y_atoms) {
        if (piece.z_atoms.empty()) {
            check(q.compose(atom_substitution<S>(L, ya, nullptr)));
            continue;
        }
        for (const auto& za : piece.z_atoms) check(q.compose(atom_substitution(L, ya, &za)));
    }
    return worst;
}

}  // namespace

template <class S>
S XBase<S>::integrate(const BasicPolynomial<S>& p) const {
    switch (kind) {
        case Kind::Box: return p.integrate_box(lo, hi);
        case Kind::Facet: return p.integrate_facet(lo, hi, facet.axis, lo[facet.axis]);
        case Kind::Point: {
            std::vector<S> full(p.layout().size(), S(0));
            std::copy(point.begin(), point.end(), full.begin());
            return p.template eval_flat<S>(full);
        }
    }
    return S(0);
}

template <class S>
S XBase<S>::mass() const {
    S v(1);
    if (kind == Kind::Point) return v;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (kind == Kind::Facet && static_cast<int>(i) == facet.axis) continue;
        v *= hi[i] - lo[i];
    }
    return v;
}

template <class S>
std::vector<std::vector<double>> XBase<S>::sample_points() const {
    std::vector<std::vector<double>> out;
    if (kind == Kind::Point) {
        std::vector<double> p;
        for (const auto& v : point) p.push_back(to_double(v));
        out.push_back(p);
        return out;
    }
    const std::size_t n = lo.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = to_double((mask >> i) & 1 ? hi[i] : lo[i]);
        out.push_back(p);
    }
    for (int frac : {1, 2}) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double l = to_double(lo[i]);
            const double h = to_double(hi[i]);
            p[i] = l + (h - l) * (frac == 1 ? 0.5 : 0.3 + 0.1 * static_cast<double>(i));
        }
        out.push_back(p);
    }
    return out;
}

template <class S>
S ProductMeasure<S>::moment(const BasicPolynomial<S>& test) const {
    S acc(0);
    for (const auto& piece : pieces) acc += piece_moment(layout, piece, test);
    return acc;
}

template <class S>
S ProductMeasure<S>::total_mass() const {
    return moment(BasicPolynomial<S>::constant(layout, S(1)));
}

template <class S>
void ProductMeasure<S>::validate() const {
    for (const auto& piece : pieces) {
        if (piece.weight < S(0)) throw std::invalid_argument("negative piece weight");
        if (piece.y_atoms.empty()) throw std::invalid_argument("measure piece without y atoms");
        if (boundary && !piece.z_atoms.empty()) throw std::invalid_argument("boundary measure with z atoms");
        if (!boundary && piece.z_atoms.empty()) throw std::invalid_argument("occupation measure piece without z atoms");
        if (boundary && piece.base.kind == XBase<S>::Kind::Box)
            throw std::invalid_argument("boundary measure pieces must live on facets");
        for (const auto& a : piece.y_atoms) {
            if (a.mass < S(0)) throw std::invalid_argument("negative atom mass");
            if (static_cast<int>(a.position.size()) != layout.m)
                throw std::invalid_argument("y atom has the wrong number of coordinates");
        }
        for (const auto& a : piece.z_atoms) {
            if (a.mass < S(0)) throw std::invalid_argument("negative atom mass");
            if (static_cast<int>(a.position.size()) != layout.m * layout.n)
                throw std::invalid_argument("z atom has the wrong number of coordinates");
        }
    }
}

template <class S>
ProductMeasure<S> ProductMeasure<S>::scaled(const S& factor) const {
    ProductMeasure out = *this;
    for (auto& piece : out.pieces) piece.weight *= factor;
    return out;
}

template <class S>
int PiecewiseFunction<S>::cell_count() const {
    int c = 1;
    for (const auto& b : breaks) c *= static_cast<int>(b.size()) - 1;
    return c;
}

template <class S>
std::vector<int> PiecewiseFunction<S>::cells_per_axis() const {
    std::vector<int> c;
    for (const auto& b : breaks) c.push_back(static_cast<int>(b.size()) - 1);
    return c;
}

template <class S>
PiecewiseFunction<S> PiecewiseFunction<S>::single(const BasicBox<S>& box, BasicPolyVector<S> u) {
    PiecewiseFunction f;
    for (int i = 0; i < box.dim(); ++i) f.breaks.push_back({box.lo[i], box.hi[i]});
    f.cells.push_back(std::move(u));
    return f;
}

template <class S>
double continuity_defect(const PiecewiseFunction<S>& u, VarLayout L) {
    const auto counts = u.cells_per_axis();
    double worst = 0.0;
    for (int c = 0; c < u.cell_count(); ++c) {
        auto idx = unflatten(c, counts);
        for (int a = 0; a < L.n; ++a) {
            if (idx[a] + 1 >= counts[a]) continue;
            auto nb = idx;
            nb[a] += 1;
            XBase<S> face;
            face.kind = XBase<S>::Kind::Facet;
            face.lo = cell_lo(u.breaks, idx);
            face.hi = cell_hi(u.breaks, idx);
            face.lo[a] = face.hi[a];
            face.facet = {a, true};
            const auto& left = u.cells[c];
            const auto& right = u.cells[flatten(nb, counts)];
            std::vector<double> full(L.size(), 0.0);
            for (const auto& x : face.sample_points()) {
                std::copy(x.begin(), x.end(), full.begin());
                for (int j = 0; j < L.m; ++j) {
                    double d = left[j].template cast<double>().eval_double(full) -
                               right[j].template cast<double>().eval_double(full);
                    worst = std::max(worst, std::abs(d));
                }
            }
        }
    }
    return worst;
}

template <class S>
std::pair<ProductMeasure<S>, ProductMeasure<S>> pushforward(const PiecewiseFunction<S>& u,
                                                           const BasicProblem<S>& problem) {
    const VarLayout L = problem.layout;
    if (!u.continuous) throw std::invalid_argument("pushforward requires a continuous piecewise function");
    if (static_cast<int>(u.breaks.size()) != L.n) throw std::invalid_argument("breakpoint grid has the wrong dimension");
    if (static_cast<int>(u.cells.size()) != u.cell_count())
        throw std::invalid_argument("piecewise function is not defined on every cell");
    for (int i = 0; i < L.n; ++i) {
        if (!(u.breaks[i].front() == problem.omega.lo[i]) || !(u.breaks[i].back() == problem.omega.hi[i]))
            throw std::invalid_argument("breakpoint grid does not cover omega");
    }
    for (const auto& cell : u.cells) {
        if (static_cast<int>(cell.size()) != L.m) throw std::invalid_argument("cell map has the wrong number of components");
        for (const auto& e : cell.entries) {
            if (!(e.layout() == L) || e.depends_on(Block::Y) || e.depends_on(Block::Z))
                throw std::invalid_argument("cell maps must be polynomials in x on the problem layout");
        }
    }
    if (continuity_defect(u, L) > 1e-9) throw std::invalid_argument("piecewise function is discontinuous across a face");

    ProductMeasure<S> mu{L, false, {}};
    ProductMeasure<S> nu{L, true, {}};
    const auto counts = u.cells_per_axis();
    for (int c = 0; c < u.cell_count(); ++c) {
        auto idx = unflatten(c, counts);
        const auto& cell = u.cells[c];
        Atom<S> ya{cell.entries, S(1)};
        Atom<S> za{{}, S(1)};
        for (int j = 0; j < L.m; ++j) {
            for (int i = 0; i < L.n; ++i) za.position.push_back(cell[j].partial(VarId::x(i)));
        }
        MeasurePiece<S> piece;
        piece.base.kind = XBase<S>::Kind::Box;
        piece.base.lo = cell_lo(u.breaks, idx);
        piece.base.hi = cell_hi(u.breaks, idx);
        piece.y_atoms = {ya};
        piece.z_atoms = {za};
        mu.pieces.push_back(piece);

        for (const Facet& f : problem.omega.facets()) {
            const bool on_side = f.upper ? idx[f.axis] == counts[f.axis] - 1 : idx[f.axis] == 0;
            if (!on_side) continue;
            MeasurePiece<S> bp;
            bp.base.kind = XBase<S>::Kind::Facet;
            bp.base.facet = f;
            bp.base.lo = piece.base.lo;
            bp.base.hi = piece.base.hi;
            const S coord = problem.omega.facet_coordinate(f);
            bp.base.lo[f.axis] = coord;
            bp.base.hi[f.axis] = coord;
            bp.y_atoms = {ya};
            nu.pieces.push_back(bp);
        }
    }
    return {mu, nu};
}

template <class S>
double MembershipReport<S>::max_residual() const {
    double worst = 0.0;
    for (const auto* v : {&integral_residuals, &marginal_residuals, &divergence_residuals}) {
        for (const auto& r : *v) worst = std::max(worst, std::abs(to_double(r)));
    }
    return worst;
}

template <class S>
void MembershipReport<S>::write_csv(std::ostream& os) const {
    os << "constraint,residual,exact\n";
    auto row = [&](const std::string& id, const S& v) {
        os << id << ',' << std::setprecision(17) << to_double(v) << ',' << scalar_text(v) << '\n';
    };
    for (std::size_t k = 0; k < integral_residuals.size(); ++k) row("integral_" + std::to_string(k), integral_residuals[k]);
    for (std::size_t k = 0; k < marginal_residuals.size(); ++k) {
        const bool bulk = k < h_count;
        row(std::string(bulk ? "marginal_h_" : "marginal_l_") + std::to_string(bulk ? k : k - h_count),
            marginal_residuals[k]);
    }
    for (std::size_t k = 0; k < divergence_residuals.size(); ++k)
        row("divergence_" + std::to_string(k), divergence_residuals[k]);
    os << "support," << std::setprecision(17) << support_violation << ',' << support_violation << '\n';
    row("objective", objective_value);
}

template <class S>
std::vector<BasicPolyVector<S>> monomial_phi_basis(VarLayout L, int degree) {
    std::vector<int> vars;
    for (int k = 0; k < L.n + L.m; ++k) vars.push_back(k);
    auto monos = monomials_up_to(L, vars, degree);
    std::vector<BasicPolyVector<S>> out;
    for (int i = 0; i < L.n; ++i) {
        for (const auto& e : monos) {
            auto v = BasicPolyVector<S>::zero(L, L.n);
            v[i] = BasicPolynomial<S>::monomial(L, e);
            out.push_back(std::move(v));
        }
    }
    return out;
}

template <class S>
std::vector<BasicPolynomial<S>> monomial_x_basis(VarLayout L, int degree) {
    std::vector<int> vars;
    for (int k = 0; k < L.n; ++k) vars.push_back(k);
    std::vector<BasicPolynomial<S>> out;
    for (const auto& e : monomials_up_to(L, vars, degree)) out.push_back(BasicPolynomial<S>::monomial(L, e));
    return out;
}

int default_phi_degree(const ExactProblem& problem) { return std::max(problem.f.degree(), 4); }

template <class S>
MembershipReport<S> check_membership(const ProductMeasure<S>& mu, const ProductMeasure<S>& nu,
                                     const BasicProblem<S>& problem,
                                     const std::vector<BasicPolyVector<S>>& phi_basis,
                                     const std::vector<BasicPolynomial<S>>& h_basis,
                                     const std::vector<BasicPolynomial<S>>& l_basis) {
    const VarLayout L = problem.layout;
    if (!(mu.layout == L) || !(nu.layout == L)) throw std::invalid_argument("measure layout differs from problem");
    for (const auto& piece : nu.pieces) {
        if (piece.base.kind == XBase<S>::Kind::Box)
            throw std::invalid_argument("boundary measure pieces must live on facets");
    }
    MembershipReport<S> rep;
    for (std::size_t k = 0; k < problem.a.size(); ++k)
        rep.integral_residuals.push_back(mu.moment(problem.a[k]) + nu.moment(problem.b[k]) - problem.rhs[k]);

    const auto& box = problem.omega;
    for (const auto& h : h_basis) rep.marginal_residuals.push_back(mu.moment(h) - h.integrate_box(box.lo, box.hi));
    rep.h_count = h_basis.size();
    for (const auto& l : l_basis) {
        S exact(0);
        for (const Facet& f : box.facets()) exact += l.integrate_facet(box.lo, box.hi, f.axis, box.facet_coordinate(f));
        rep.marginal_residuals.push_back(nu.moment(l) - exact);
    }

    for (const auto& phi : phi_basis) {
        S r = mu.moment(total_divergence(phi, L));
        for (const auto& piece : nu.pieces) r -= piece_moment(L, piece, normal_component(phi, piece.base.facet));
        rep.divergence_residuals.push_back(r);
    }

    for (const auto& piece : mu.pieces) {
        if (!problem.c.is_zero()) rep.support_violation = std::max(rep.support_violation, worst_on_atoms(L, piece, problem.c));
    }
    for (const auto& piece : nu.pieces) {
        if (!problem.d.is_zero()) rep.support_violation = std::max(rep.support_violation, worst_on_atoms(L, piece, problem.d));
    }
    rep.objective_value = mu.moment(problem.f) + nu.moment(problem.g);
    return rep;
}

DetJensenGap det_jensen_gap(const std::vector<std::pair<Matrix2, Surd>>& atoms) {
    DetJensenGap gap{Surd(0), Surd(0)};
    Matrix2 mean{};
    for (auto& row : mean) row = {Surd(0), Surd(0)};
    for (const auto& [z, w] : atoms) {
        gap.mean_det += w * (z[0][0] * z[1][1] - z[0][1] * z[1][0]);
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) mean[r][c] += w * z[r][c];
        }
    }
    gap.det_mean = mean[0][0] * mean[1][1] - mean[0][1] * mean[1][0];
    return gap;
}

std::vector<std::pair<Matrix2, Surd>> z_atoms_as_matrices(const ExactMeasure& mu, const std::vector<Surd>& at_x) {
    const VarLayout L = mu.layout;
    if (L.n != 2 || L.m != 2) throw std::invalid_argument("determinant check needs 2x2 gradients");
    std::vector<Surd> full(L.size(), Surd(0));
    std::copy(at_x.begin(), at_x.end(), full.begin());
    std::vector<std::pair<Matrix2, Surd>> out;
    for (const auto& piece : mu.pieces) {
        Surd ymass(0);
        for (const auto& ya : piece.y_atoms) ymass += ya.mass;
        for (const auto& za : piece.z_atoms) {
            Matrix2 z;
            for (int j = 0; j < 2; ++j) {
                for (int i = 0; i < 2; ++i) z[j][i] = za.position[j * 2 + i].eval_flat<Surd>(full);
            }
            out.push_back({z, piece.weight * ymass * za.mass});
        }
    }
    return out;
}

namespace {

std::vector<Surd> parse_numbers(const std::vector<std::string>& words, std::size_t from, int line) {
    std::vector<Surd> v;
    for (std::size_t k = from; k < words.size(); ++k) {
        try {
            v.push_back(Surd::parse(words[k]));
        } catch (const std::exception& ex) {
            throw InputError(ex.what(), line);
        }
    }
    return v;
}

std::vector<XBase<Surd>> parse_base(const KeyValueEntry& e, const ExactProblem& pr, bool boundary) {
    using Kind = XBase<Surd>::Kind;
    const int n = pr.layout.n;
    auto words = split_whitespace(e.value);
    if (words.empty()) throw InputError("empty x base", e.line);
    std::vector<XBase<Surd>> out;
    const std::string& kind = words[0];
    auto full_box = [&](std::size_t from, XBase<Surd>& b) {
        if (words.size() == from) {
            b.lo = pr.omega.lo;
            b.hi = pr.omega.hi;
            return;
        }
        auto nums = parse_numbers(words, from, e.line);
        if (static_cast<int>(nums.size()) != 2 * n) throw InputError("box expects 'lo hi' per axis", e.line);
        for (int i = 0; i < n; ++i) {
            b.lo.push_back(nums[2 * i]);
            b.hi.push_back(nums[2 * i + 1]);
        }
    };
    if (kind == "box" || kind == "point") {
        if (boundary) throw InputError("boundary pieces need a facet base", e.line);
        XBase<Surd> b;
        if (kind == "box") {
            b.kind = Kind::Box;
            full_box(1, b);
        } else {
            b.kind = Kind::Point;
            b.point = parse_numbers(words, 1, e.line);
            if (static_cast<int>(b.point.size()) != n) throw InputError("point expects n coordinates", e.line);
        }
        out.push_back(b);
    } else if (kind == "facet") {
        if (!boundary) throw InputError("occupation pieces need a box or point base", e.line);
        if (words.size() < 3) throw InputError("facet expects 'AXIS lower|upper'", e.line);
        XBase<Surd> b;
        b.kind = Kind::Facet;
        int axis = parse_int(words[1], e.line) - 1;
        if (axis < 0 || axis >= n) throw InputError("facet axis out of range", e.line);
        if (words[2] != "lower" && words[2] != "upper") throw InputError("facet side must be lower or upper", e.line);
        b.facet = {axis, words[2] == "upper"};
        full_box(3, b);
        const Surd coord = b.facet.upper ? b.hi[axis] : b.lo[axis];
        b.lo[axis] = coord;
        b.hi[axis] = coord;
        out.push_back(b);
    } else if (kind == "facet_point") {
        if (!boundary) throw InputError("occupation pieces need a box or point base", e.line);
        if (words.size() < 3) throw InputError("facet_point expects 'AXIS lower|upper COORDS'", e.line);
        XBase<Surd> b;
        b.kind = Kind::Point;
        int axis = parse_int(words[1], e.line) - 1;
        if (axis < 0 || axis >= n) throw InputError("facet axis out of range", e.line);
        if (words[2] != "lower" && words[2] != "upper") throw InputError("facet side must be lower or upper", e.line);
        b.facet = {axis, words[2] == "upper"};
        b.point = parse_numbers(words, 3, e.line);
        if (static_cast<int>(b.point.size()) != n) throw InputError("facet_point expects n coordinates", e.line);
        if (!(b.point[axis] == pr.omega.facet_coordinate(b.facet)))
            throw InputError("facet_point does not lie on its facet", e.line);
        out.push_back(b);
    } else if (kind == "boundary") {
        if (!boundary) throw InputError("occupation pieces need a box or point base", e.line);
        if (words.size() != 1) throw InputError("'boundary' takes no arguments", e.line);
        for (const Facet& f : pr.omega.facets()) {
            XBase<Surd> b;
            b.kind = Kind::Facet;
            b.facet = f;
            b.lo = pr.omega.lo;
            b.hi = pr.omega.hi;
            const Surd coord = pr.omega.facet_coordinate(f);
            b.lo[f.axis] = coord;
            b.hi[f.axis] = coord;
            out.push_back(b);
        }
    } else {
        throw InputError("unknown x base '" + kind + "'", e.line);
    }
    return out;
}

Atom<Surd> parse_atom(const KeyValueEntry& e, VarLayout L, int expected) {
    auto at = e.value.find('@');
    if (at == std::string::npos) throw InputError("atom expects 'MASS @ coordinates'", e.line);
    Atom<Surd> a;
    try {
        a.mass = Surd::parse(trim_copy(std::string_view(e.value).substr(0, at)));
    } catch (const std::exception& ex) {
        throw InputError(ex.what(), e.line);
    }
    for (const auto& coord : split_on(std::string_view(e.value).substr(at + 1), ',')) {
        try {
            auto p = parse_polynomial<Surd>(coord, L);
            if (p.depends_on(Block::Y) || p.depends_on(Block::Z)) throw InputError("atom coordinates may depend on x only", e.line);
            a.position.push_back(std::move(p));
        } catch (const InputError&) {
            throw;
        } catch (const std::exception& ex) {
            throw InputError(ex.what(), e.line);
        }
    }
    if (static_cast<int>(a.position.size()) != expected)
        throw InputError("atom expects " + std::to_string(expected) + " coordinates", e.line);
    return a;
}

}  // namespace

MeasurePairFile read_measure_header(const KeyValueDocument& doc) {
    const auto& top = doc.root();
    top.reject_unknown({"problem", "phi_degree"});
    MeasurePairFile out;
    if (auto p = top.get("problem")) out.problem_path = doc.source.parent_path() / *p;
    if (const KeyValueEntry* e = top.find("phi_degree")) out.phi_degree = parse_int(e->value, e->line);
    return out;
}

MeasurePairFile parse_measure_pair(const KeyValueDocument& doc, const ExactProblem& pr) {
    MeasurePairFile out = read_measure_header(doc);
    const VarLayout L = pr.layout;
    out.mu = ExactMeasure{L, false, {}};
    out.nu = ExactMeasure{L, true, {}};
    for (std::size_t s = 1; s < doc.sections.size(); ++s) {
        const auto& sec = doc.sections[s];
        if (sec.name != "mu" && sec.name != "nu") throw InputError("unknown section [" + sec.name + "]", sec.line);
        const bool boundary = sec.name == "nu";
        sec.reject_unknown({"weight", "x", "y", "z"});
        MeasurePiece<Surd> proto;
        if (const KeyValueEntry* w = sec.find("weight")) {
            try {
                proto.weight = Surd::parse(w->value);
            } catch (const std::exception& ex) {
                throw InputError(ex.what(), w->line);
            }
        }
        for (const auto& e : sec.entries) {
            if (e.key == "y") proto.y_atoms.push_back(parse_atom(e, L, L.m));
            if (e.key == "z") {
                if (boundary) throw InputError("boundary pieces carry no z atoms", e.line);
                proto.z_atoms.push_back(parse_atom(e, L, L.m * L.n));
            }
        }
        const KeyValueEntry* xe = sec.find("x");
        if (xe == nullptr) throw InputError("piece without an x base", sec.line);
        for (auto& base : parse_base(*xe, pr, boundary)) {
            MeasurePiece<Surd> piece = proto;
            piece.base = std::move(base);
            (boundary ? out.nu : out.mu).pieces.push_back(std::move(piece));
        }
    }
    try {
        out.mu.validate();
        out.nu.validate();
    } catch (const std::invalid_argument& ex) {
        throw InputError(ex.what());
    }
    return out;
}

template <class S>
void write_measure_pair(std::ostream& os, const ProductMeasure<S>& mu, const ProductMeasure<S>& nu,
                        const std::string& problem_ref) {
    if (!problem_ref.empty()) os << "problem = " << problem_ref << "\n";
    auto atoms = [&](const char* key, const std::vector<Atom<S>>& list) {
        for (const auto& a : list) {
            os << key << " = " << scalar_text(a.mass) << " @ ";
            for (std::size_t k = 0; k < a.position.size(); ++k) os << (k ? ", " : "") << a.position[k].to_string();
            os << "\n";
        }
    };
    auto bounds = [&](const XBase<S>& b) {
        for (std::size_t i = 0; i < b.lo.size(); ++i) os << ' ' << scalar_text(b.lo[i]) << ' ' << scalar_text(b.hi[i]);
    };
    for (const auto* m : {&mu, &nu}) {
        for (const auto& piece : m->pieces) {
            os << "\n[" << (m->boundary ? "nu" : "mu") << "]\n";
            os << "weight = " << scalar_text(piece.weight) << "\n";
            os << "x =";
            switch (piece.base.kind) {
                case XBase<S>::Kind::Box: os << " box"; bounds(piece.base); break;
                case XBase<S>::Kind::Facet: {
                    os << " facet " << piece.base.facet.axis + 1 << (piece.base.facet.upper ? " upper" : " lower");
                    bounds(piece.base);
                    break;
                }
                case XBase<S>::Kind::Point:
                    if (m->boundary)
                        os << " facet_point " << piece.base.facet.axis + 1 << (piece.base.facet.upper ? " upper" : " lower");
                    else
                        os << " point";
                    for (const auto& v : piece.base.point) os << ' ' << scalar_text(v);
                    break;
            }
            os << "\n";
            atoms("y", piece.y_atoms);
            atoms("z", piece.z_atoms);
        }
    }
}

#define VARBOUND_MEASURE_INSTANTIATE(S)                                                                         \
    template struct XBase<S>;                                                                                  \
    template struct ProductMeasure<S>;                                                                         \
    template struct PiecewiseFunction<S>;                                                                      \
    template struct MembershipReport<S>;                                                                       \
    template double continuity_defect(const PiecewiseFunction<S>&, VarLayout);                                 \
    template std::pair<ProductMeasure<S>, ProductMeasure<S>> pushforward(const PiecewiseFunction<S>&,          \
                                                                         const BasicProblem<S>&);              \
    template std::vector<BasicPolyVector<S>> monomial_phi_basis<S>(VarLayout, int);                            \
    template std::vector<BasicPolynomial<S>> monomial_x_basis<S>(VarLayout, int);                              \
    template MembershipReport<S> check_membership(const ProductMeasure<S>&, const ProductMeasure<S>&,          \
                                                  const BasicProblem<S>&, const std::vector<BasicPolyVector<S>>&, \
                                                  const std::vector<BasicPolynomial<S>>&,                      \
                                                  const std::vector<BasicPolynomial<S>>&);                     \
    template void write_measure_pair(std::ostream&, const ProductMeasure<S>&, const ProductMeasure<S>&,         \
                                     const std::string&);

VARBOUND_MEASURE_INSTANTIATE(double)
VARBOUND_MEASURE_INSTANTIATE(Surd)

}  // namespace varbound
