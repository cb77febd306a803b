#include "varbound/fem.hpp"

#include "varbound/sampling.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <stdexcept>

namespace varbound {

Mesh Mesh::uniform(const Box& box, int elements) {
    if (elements < 1) throw std::invalid_argument("mesh needs at least one element per axis");
    Mesh mesh;
    mesh.dim = box.dim();
    const int N = elements;
    if (mesh.dim == 1) {
        const double hx = (box.hi[0] - box.lo[0]) / N;
        for (int k = 0; k <= N; ++k) {
            mesh.nodes.push_back({k == N ? box.hi[0] : box.lo[0] + k * hx, 0.0});
            mesh.boundary_node.push_back(k == 0 || k == N);
        }
        for (int k = 0; k < N; ++k) mesh.cells.push_back({k, k + 1, -1});
        mesh.boundary.push_back({{0, -1}, Facet{0, false}});
        mesh.boundary.push_back({{N, -1}, Facet{0, true}});
        mesh.h = hx;
        return mesh;
    }
    if (mesh.dim != 2) throw std::invalid_argument("finite elements support n = 1 or n = 2");
    const double hx = (box.hi[0] - box.lo[0]) / N;
    const double hy = (box.hi[1] - box.lo[1]) / N;
    auto id = [N](int i, int j) { return i * (N + 1) + j; };
    for (int i = 0; i <= N; ++i) {
        for (int j = 0; j <= N; ++j) {
            mesh.nodes.push_back({i == N ? box.hi[0] : box.lo[0] + i * hx, j == N ? box.hi[1] : box.lo[1] + j * hy});
            mesh.boundary_node.push_back(i == 0 || i == N || j == 0 || j == N);
        }
    }
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            mesh.cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            mesh.cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    for (int k = 0; k < N; ++k) {
        mesh.boundary.push_back({{id(0, k), id(0, k + 1)}, Facet{0, false}});
        mesh.boundary.push_back({{id(N, k), id(N, k + 1)}, Facet{0, true}});
        mesh.boundary.push_back({{id(k, 0), id(k + 1, 0)}, Facet{1, false}});
        mesh.boundary.push_back({{id(k, N), id(k + 1, N)}, Facet{1, true}});
    }
    mesh.h = std::max(hx, hy);
    return mesh;
}

namespace {

using Grads = std::array<std::array<double, 2>, 3>;

Grads cell_gradients(const Mesh& mesh, int cell) {
    const auto& c = mesh.cells[cell];
    Grads g{};
    if (mesh.dim == 1) {
        const double len = mesh.nodes[c[1]][0] - mesh.nodes[c[0]][0];
        g[0][0] = -1.0 / len;
        g[1][0] = 1.0 / len;
        return g;
    }
    const auto& p0 = mesh.nodes[c[0]];
    const auto& p1 = mesh.nodes[c[1]];
    const auto& p2 = mesh.nodes[c[2]];
    const double a = p1[0] - p0[0], b = p2[0] - p0[0];
    const double cc = p1[1] - p0[1], d = p2[1] - p0[1];
    const double det = a * d - b * cc;
    // Rows of the inverse of [p1 - p0, p2 - p0].
    g[1] = {d / det, -b / det};
    g[2] = {-cc / det, a / det};
    g[0] = {-g[1][0] - g[2][0], -g[1][1] - g[2][1]};
    return g;
}

double cell_measure(const Mesh& mesh, int cell) {
    const auto& c = mesh.cells[cell];
    if (mesh.dim == 1) return mesh.nodes[c[1]][0] - mesh.nodes[c[0]][0];
    const auto& p0 = mesh.nodes[c[0]];
    const auto& p1 = mesh.nodes[c[1]];
    const auto& p2 = mesh.nodes[c[2]];
    return 0.5 * std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

// Degree in x of P(x, u(x), grad u) for piecewise linear u.
int composed_degree(const Polynomial& p) {
    const VarLayout L = p.layout();
    int d = 0;
    for (const auto& [e, c] : p.terms()) {
        int s = 0;
        for (int k = 0; k < L.n + L.m; ++k) s += e[k];
        d = std::max(d, s);
    }
    return d;
}

}  // namespace

std::vector<QuadPoint> cell_quadrature(const Mesh& mesh, int degree) {
    std::vector<QuadPoint> out;
    if (mesh.dim == 1) {
        const GaussRule rule = gauss_legendre(std::max(1, (degree + 2) / 2));
        for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
            const double xa = mesh.nodes[mesh.cells[c][0]][0];
            const double len = cell_measure(mesh, c);
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double s = 0.5 * (1.0 + rule.nodes[q]);
                out.push_back({c, {xa + len * s, 0.0}, {1.0 - s, s, 0.0}, 0.5 * len * rule.weights[q]});
            }
        }
        return out;
    }
    // Collapsed Gauss rule: the factor (1 - xi) raises the degree by one.
    const GaussRule rule = gauss_legendre(std::max(1, (degree + 3) / 2));
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
        const auto& cell = mesh.cells[c];
        const double area = cell_measure(mesh, c);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double xi = 0.5 * (1.0 + rule.nodes[i]);
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                const double eta = 0.5 * (1.0 + rule.nodes[j]);
                const double l1 = xi;
                const double l2 = eta * (1.0 - xi);
                const double l0 = 1.0 - l1 - l2;
                QuadPoint qp;
                qp.cell = c;
                for (int k = 0; k < 2; ++k) {
                    qp.x[k] = l0 * mesh.nodes[cell[0]][k] + l1 * mesh.nodes[cell[1]][k] + l2 * mesh.nodes[cell[2]][k];
                }
                qp.basis = {l0, l1, l2};
                qp.weight = 2.0 * area * 0.25 * rule.weights[i] * rule.weights[j] * (1.0 - xi);
                out.push_back(qp);
            }
        }
    }
    return out;
}

std::vector<QuadPoint> boundary_quadrature(const Mesh& mesh, int degree) {
    std::vector<QuadPoint> out;
    if (mesh.dim == 1) {
        for (int b = 0; b < static_cast<int>(mesh.boundary.size()); ++b) {
            out.push_back({b, {mesh.nodes[mesh.boundary[b].nodes[0]][0], 0.0}, {1.0, 0.0, 0.0}, 1.0});
        }
        return out;
    }
    const GaussRule rule = gauss_legendre(std::max(1, (degree + 2) / 2));
    for (int b = 0; b < static_cast<int>(mesh.boundary.size()); ++b) {
        const auto& pa = mesh.nodes[mesh.boundary[b].nodes[0]];
        const auto& pb = mesh.nodes[mesh.boundary[b].nodes[1]];
        const double len = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double s = 0.5 * (1.0 + rule.nodes[q]);
            out.push_back({b, {pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])}, {1.0 - s, s, 0.0},
                           0.5 * len * rule.weights[q]});
        }
    }
    return out;
}

void FeSolution::evaluate(int cell, const std::array<double, 3>& basis, std::vector<double>& y,
                          std::vector<double>& z) const {
    const int m = components;
    const int n = mesh.dim;
    const Grads g = cell_gradients(mesh, cell);
    y.assign(m, 0.0);
    z.assign(m * n, 0.0);
    for (int a = 0; a <= n; ++a) {
        const int node = mesh.cells[cell][a];
        for (int j = 0; j < m; ++j) {
            const double v = values[node * m + j];
            y[j] += basis[a] * v;
            for (int i = 0; i < n; ++i) z[j * n + i] += g[a][i] * v;
        }
    }
}

std::vector<double> interpolate(const Mesh& mesh, int components,
                                const std::function<double(const std::array<double, 2>&, int)>& u) {
    std::vector<double> v(mesh.nodes.size() * components);
    for (std::size_t a = 0; a < mesh.nodes.size(); ++a) {
        for (int j = 0; j < components; ++j) v[a * components + j] = u(mesh.nodes[a], j);
    }
    return v;
}

namespace {

enum class ConstraintKind { Mean, Sphere };

struct ConstraintInfo {
    ConstraintKind kind;
    std::vector<int> components;
    double rhs = 0.0;
};

// Flat list of monomials for repeated evaluation.
class CompiledPolynomial {
public:
    CompiledPolynomial() = default;
    explicit CompiledPolynomial(const Polynomial& p) {
        for (const auto& [e, c] : p.terms()) {
            Term t;
            t.coef = to_double(c);
            for (std::size_t k = 0; k < e.size(); ++k) {
                if (e[k] != 0) t.factors.push_back({static_cast<int>(k), static_cast<int>(e[k])});
            }
            terms_.push_back(std::move(t));
        }
    }

    bool empty() const { return terms_.empty(); }

    double operator()(const std::vector<double>& pt) const {
        double acc = 0.0;
        for (const auto& t : terms_) {
            double v = t.coef;
            for (const auto& [k, e] : t.factors) {
                for (int r = 0; r < e; ++r) v *= pt[k];
            }
            acc += v;
        }
        return acc;
    }

private:
    struct Term {
        double coef = 0.0;
        std::vector<std::pair<int, int>> factors;
    };
    std::vector<Term> terms_;
};

// A bulk integrand, an optional boundary integrand and their partials.
struct Integrand {
    CompiledPolynomial bulk, boundary;
    std::vector<CompiledPolynomial> dy, dz, gy;

    Integrand(const Polynomial& P, const Polynomial* Q, bool with_gradient) : bulk(P) {
        const VarLayout L = P.layout();
        if (Q) boundary = CompiledPolynomial(*Q);
        if (!with_gradient) return;
        for (int j = 0; j < L.m; ++j) {
            dy.emplace_back(P.partial(VarId::y(j)));
            for (int i = 0; i < L.n; ++i) dz.emplace_back(P.partial(VarId::z(j, i)));
            if (Q) gy.emplace_back(Q->partial(VarId::y(j)));
        }
    }
};

// Integrals of polynomial integrands and their gradients in the nodal values.
class Discretization {
public:
    Discretization(const VariationalProblem& problem, const Mesh& mesh) : problem_(problem), mesh_(mesh) {
        const VarLayout L = problem.layout;
        if (L.n != mesh.dim) throw std::invalid_argument("mesh dimension differs from the problem");
        for (int i = 0; i < L.n; ++i) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& x : mesh.nodes) {
                lo = std::min(lo, x[i]);
                hi = std::max(hi, x[i]);
            }
            const double tol = 1e-12 * (1.0 + problem.omega.hi[i] - problem.omega.lo[i]);
            if (std::abs(lo - problem.omega.lo[i]) > tol || std::abs(hi - problem.omega.hi[i]) > tol) {
                throw std::invalid_argument("mesh does not cover the problem domain");
            }
        }
        m_ = L.m;
        int deg = std::max(2, composed_degree(problem.f));
        for (const auto& a : problem.a) deg = std::max(deg, composed_degree(a));
        cell_qp_ = cell_quadrature(mesh, deg);
        int bdeg = std::max(2, composed_degree(problem.g));
        for (const auto& b : problem.b) bdeg = std::max(bdeg, composed_degree(b));
        bnd_qp_ = boundary_quadrature(mesh, bdeg);
        for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) grads_.push_back(cell_gradients(mesh, c));
        for (int i = 0; i < L.n; ++i) x_slot_.push_back(L.flat(VarId::x(i)));
        for (int j = 0; j < L.m; ++j) {
            y_slot_.push_back(L.flat(VarId::y(j)));
            for (int i = 0; i < L.n; ++i) z_slot_.push_back(L.flat(VarId::z(j, i)));
        }
    }

    // Integral of the bulk part over the domain plus the boundary part over
    // the boundary; the gradient is added into `grad` when non-null (the
    // integrand must then carry its partials).
    double integrate(const Integrand& I, const std::vector<double>& u, std::vector<double>* grad) const {
        const int n = mesh_.dim;
        std::vector<double> pt(problem_.layout.size(), 0.0);
        double total = 0.0;
        for (const auto& qp : cell_qp_) {
            const auto& cell = mesh_.cells[qp.cell];
            const Grads& g = grads_[qp.cell];
            fill_point(pt, qp.x, cell, qp.basis, &g, u, n + 1);
            total += qp.weight * I.bulk(pt);
            if (!grad) continue;
            for (int j = 0; j < m_; ++j) {
                const double fy = I.dy[j].empty() ? 0.0 : I.dy[j](pt);
                std::array<double, 2> fz{0.0, 0.0};
                for (int i = 0; i < n; ++i) {
                    const auto& pz = I.dz[j * n + i];
                    if (!pz.empty()) fz[i] = pz(pt);
                }
                for (int a = 0; a <= n; ++a) {
                    double s = fy * qp.basis[a];
                    for (int i = 0; i < n; ++i) s += fz[i] * g[a][i];
                    (*grad)[cell[a] * m_ + j] += qp.weight * s;
                }
            }
        }
        if (!I.boundary.empty()) {
            for (const auto& qp : bnd_qp_) {
                const auto& piece = mesh_.boundary[qp.cell];
                const std::array<int, 3> nodes{piece.nodes[0], piece.nodes[1], -1};
                fill_point(pt, qp.x, nodes, qp.basis, nullptr, u, mesh_.dim);
                total += qp.weight * I.boundary(pt);
                if (!grad) continue;
                for (int j = 0; j < m_; ++j) {
                    const double gy = I.gy[j](pt);
                    for (int a = 0; a < mesh_.dim; ++a) (*grad)[nodes[a] * m_ + j] += qp.weight * gy * qp.basis[a];
                }
            }
        }
        return total;
    }

    void fill_point(std::vector<double>& pt, const std::array<double, 2>& x, const std::array<int, 3>& nodes,
                    const std::array<double, 3>& basis, const Grads* g, const std::vector<double>& u,
                    int count) const {
        const int n = mesh_.dim;
        std::fill(pt.begin(), pt.end(), 0.0);
        for (int i = 0; i < n; ++i) pt[x_slot_[i]] = x[i];
        for (int a = 0; a < count; ++a) {
            for (int j = 0; j < m_; ++j) {
                const double v = u[nodes[a] * m_ + j];
                pt[y_slot_[j]] += basis[a] * v;
                if (g) {
                    for (int i = 0; i < n; ++i) pt[z_slot_[j * n + i]] += (*g)[a][i] * v;
                }
            }
        }
    }

private:
    const VariationalProblem& problem_;
    const Mesh& mesh_;
    int m_ = 1;
    std::vector<QuadPoint> cell_qp_;
    std::vector<QuadPoint> bnd_qp_;
    std::vector<Grads> grads_;
    std::vector<int> x_slot_, y_slot_, z_slot_;
};

bool pins_zero(const VariationalProblem& problem) {
    const VarLayout L = problem.layout;
    Polynomial sumsq(L);
    for (int j = 0; j < L.m; ++j) sumsq += Polynomial::variable(L, VarId::y(j), 2);
    return problem.d == sumsq;
}

std::vector<ConstraintInfo> classify_constraints(const VariationalProblem& problem) {
    const VarLayout L = problem.layout;
    if (!problem.c.is_zero()) throw std::invalid_argument("pointwise interior constraints are not supported by fem");
    if (problem.bc == BoundaryCondition::Dirichlet && !pins_zero(problem)) {
        throw std::invalid_argument("fem supports homogeneous Dirichlet data only (shift the boundary data first)");
    }
    std::vector<ConstraintInfo> out;
    for (std::size_t k = 0; k < problem.a.size(); ++k) {
        if (k < problem.b.size() && !problem.b[k].is_zero()) {
            throw std::invalid_argument("boundary integral constraints are not supported by fem");
        }
        const Polynomial& a = problem.a[k];
        ConstraintInfo info;
        info.rhs = problem.rhs[k];
        Polynomial sumsq(L);
        for (int j = 0; j < L.m; ++j) sumsq += Polynomial::variable(L, VarId::y(j), 2);
        bool found = false;
        for (int j = 0; j < L.m && !found; ++j) {
            if (a == Polynomial::variable(L, VarId::y(j))) {
                info.kind = ConstraintKind::Mean;
                info.components = {j};
                found = true;
            } else if (a == Polynomial::variable(L, VarId::y(j), 2)) {
                info.kind = ConstraintKind::Sphere;
                info.components = {j};
                found = true;
            }
        }
        if (!found && a == sumsq) {
            info.kind = ConstraintKind::Sphere;
            for (int j = 0; j < L.m; ++j) info.components.push_back(j);
            found = true;
        }
        if (!found) {
            throw std::invalid_argument("fem supports integral constraints int u_j = r and int |u|^2 = r only");
        }
        if (info.kind == ConstraintKind::Sphere && !(info.rhs > 0.0)) {
            throw std::invalid_argument("normalization constraint needs a positive right-hand side");
        }
        out.push_back(info);
    }
    return out;
}

using SpMat = Eigen::SparseMatrix<double>;

// Scalar P1 mass and stiffness matrices.
void assemble_matrices(const Mesh& mesh, SpMat& mass, SpMat& stiff) {
    const int N = mesh.num_nodes();
    const int k = mesh.nodes_per_cell();
    std::vector<Eigen::Triplet<double>> tm, tk;
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
        const double vol = cell_measure(mesh, c);
        const Grads g = cell_gradients(mesh, c);
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
                // int of products of barycentric coordinates: vol (1 + delta_ab) / ((d + 1)(d + 2)).
                const double mab = vol * (a == b ? 2.0 : 1.0) / ((mesh.dim + 1) * (mesh.dim + 2));
                double kab = 0.0;
                for (int i = 0; i < mesh.dim; ++i) kab += g[a][i] * g[b][i];
                tm.emplace_back(mesh.cells[c][a], mesh.cells[c][b], mab);
                tk.emplace_back(mesh.cells[c][a], mesh.cells[c][b], vol * kab);
            }
        }
    }
    mass.resize(N, N);
    stiff.resize(N, N);
    mass.setFromTriplets(tm.begin(), tm.end());
    stiff.setFromTriplets(tk.begin(), tk.end());
}

struct StartOutcome {
    std::vector<double> values;
    double energy = 0.0;
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;
};

class Minimizer {
public:
    Minimizer(const VariationalProblem& problem, const Mesh& mesh, const FeOptions& options)
        : problem_(problem), mesh_(mesh), options_(options), disc_(problem, mesh),
          energy_(problem.f, &problem.g, true), constraints_(classify_constraints(problem)) {
        m_ = problem.layout.m;
        const int N = mesh.num_nodes();
        const bool dirichlet = problem.bc == BoundaryCondition::Dirichlet;
        free_index_.assign(N, -1);
        for (int a = 0; a < N; ++a) {
            if (!(dirichlet && mesh.boundary_node[a])) {
                free_index_[a] = static_cast<int>(free_nodes_.size());
                free_nodes_.push_back(a);
            }
        }
        if (free_nodes_.empty()) throw std::invalid_argument("mesh has no free nodes");
        SpMat stiff;
        assemble_matrices(mesh, mass_, stiff);
        const SpMat S = stiff + mass_;
        std::vector<Eigen::Triplet<double>> t;
        for (int k = 0; k < S.outerSize(); ++k) {
            for (SpMat::InnerIterator it(S, k); it; ++it) {
                const int r = free_index_[it.row()], c = free_index_[it.col()];
                if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
            }
        }
        const int nf = static_cast<int>(free_nodes_.size());
        SpMat Sf(nf, nf);
        Sf.setFromTriplets(t.begin(), t.end());
        solver_.compute(Sf);
        if (solver_.info() != Eigen::Success) throw std::runtime_error("Sobolev matrix factorization failed");
        mass_vector_ = Eigen::VectorXd(mass_ * Eigen::VectorXd::Ones(N));
        for (int a : free_nodes_) free_mass_ += mass_vector_[a];
    }

    StartOutcome run(std::uint64_t seed) const {
        StartOutcome out;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-options_.init_amplitude, options_.init_amplitude);
        std::vector<double> u(mesh_.num_nodes() * m_, 0.0);
        for (int a : free_nodes_) {
            for (int j = 0; j < m_; ++j) u[a * m_ + j] = dist(rng);
        }
        retract(u);
        double E = energy(u);
        out.trace.push_back(E);
        double t = 1.0;
        int quiet = 0;
        for (int it = 0; it < options_.max_iterations; ++it) {
            std::vector<double> grad(u.size(), 0.0);
            disc_.integrate(energy_, u, &grad);
            std::vector<double> d = riesz(grad, -1.0);
            project_tangent(u, d);
            double slope = 0.0;
            for (std::size_t k = 0; k < u.size(); ++k) slope += grad[k] * d[k];
            out.iterations = it + 1;
            if (!(slope < -1e-300) || !std::isfinite(slope)) {
                out.converged = true;
                break;
            }
            t = std::min(t * 2.0, 1e6);
            bool accepted = false;
            std::vector<double> trial(u.size());
            double Et = E;
            for (int bt = 0; bt < 80; ++bt) {
                for (std::size_t k = 0; k < u.size(); ++k) trial[k] = u[k] + t * d[k];
                retract(trial);
                Et = energy(trial);
                if (std::isfinite(Et) && Et <= E + 1e-4 * t * slope) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) {
                out.converged = true;
                break;
            }
            // One parabolic refinement along the step: Armijo alone accepts
            // steps that leave stiff modes undamped.
            const double curv = (Et - E - slope * t) / (t * t);
            if (curv > 0.0) {
                const double tq = -slope / (2.0 * curv);
                if (tq > 0.02 * t && tq < 50.0 * t && std::abs(tq - t) > 1e-3 * t) {
                    std::vector<double> alt(u.size());
                    for (std::size_t k = 0; k < u.size(); ++k) alt[k] = u[k] + tq * d[k];
                    retract(alt);
                    const double Eq = energy(alt);
                    if (std::isfinite(Eq) && Eq < Et) {
                        trial.swap(alt);
                        Et = Eq;
                        t = tq;
                    }
                }
            }
            const double decrease = E - Et;
            u.swap(trial);
            E = Et;
            out.trace.push_back(E);
            quiet = decrease <= options_.tolerance * (1.0 + std::abs(E)) ? quiet + 1 : 0;
            if (quiet >= 3) {
                out.converged = true;
                break;
            }
        }
        out.values = std::move(u);
        out.energy = E;
        return out;
    }

    double energy(const std::vector<double>& u) const { return disc_.integrate(energy_, u, nullptr); }

private:
    // sign * S^{-1} v on the free nodes, componentwise; zero on pinned nodes.
    std::vector<double> riesz(const std::vector<double>& v, double sign) const {
        const int nf = static_cast<int>(free_nodes_.size());
        std::vector<double> out(v.size(), 0.0);
        Eigen::VectorXd rhs(nf);
        for (int j = 0; j < m_; ++j) {
            for (int k = 0; k < nf; ++k) rhs[k] = v[free_nodes_[k] * m_ + j];
            const Eigen::VectorXd sol = solver_.solve(rhs);
            for (int k = 0; k < nf; ++k) out[free_nodes_[k] * m_ + j] = sign * sol[k];
        }
        return out;
    }

    // Removes from d the components normal to the constraint manifold, in the
    // Sobolev inner product.
    void project_tangent(const std::vector<double>& u, std::vector<double>& d) const {
        const int K = static_cast<int>(constraints_.size());
        if (K == 0) return;
        std::vector<std::vector<double>> C(K), W(K);
        for (int k = 0; k < K; ++k) {
            C[k] = constraint_gradient(constraints_[k], u);
            W[k] = riesz(C[k], 1.0);
        }
        Eigen::MatrixXd G(K, K);
        Eigen::VectorXd r(K);
        for (int a = 0; a < K; ++a) {
            r[a] = dot(C[a], d);
            for (int b = 0; b < K; ++b) G(a, b) = dot(C[a], W[b]);
        }
        const Eigen::VectorXd lam = G.completeOrthogonalDecomposition().solve(r);
        for (int k = 0; k < K; ++k) {
            for (std::size_t i = 0; i < d.size(); ++i) d[i] -= lam[k] * W[k][i];
        }
    }

    static double dot(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }

    std::vector<double> constraint_gradient(const ConstraintInfo& c, const std::vector<double>& u) const {
        std::vector<double> g(u.size(), 0.0);
        const int N = mesh_.num_nodes();
        for (int j : c.components) {
            if (c.kind == ConstraintKind::Mean) {
                for (int a = 0; a < N; ++a) g[a * m_ + j] = mass_vector_[a];
            } else {
                Eigen::VectorXd uj(N);
                for (int a = 0; a < N; ++a) uj[a] = u[a * m_ + j];
                const Eigen::VectorXd Mu = mass_ * uj;
                for (int a = 0; a < N; ++a) g[a * m_ + j] = 2.0 * Mu[a];
            }
        }
        return g;
    }

    double constraint_value(const ConstraintInfo& c, const std::vector<double>& u) const {
        const int N = mesh_.num_nodes();
        double s = 0.0;
        for (int j : c.components) {
            Eigen::VectorXd uj(N);
            for (int a = 0; a < N; ++a) uj[a] = u[a * m_ + j];
            s += c.kind == ConstraintKind::Mean ? mass_vector_.dot(uj) : uj.dot(mass_ * uj);
        }
        return s;
    }

    // Mean constraints by constant shifts of the free nodes, normalizations
    // by scaling; alternated until both hold.
    void retract(std::vector<double>& u) const {
        if (constraints_.empty()) return;
        for (int round = 0; round < 100; ++round) {
            double worst = 0.0;
            for (const auto& c : constraints_) {
                const double v = constraint_value(c, u);
                worst = std::max(worst, std::abs(v - c.rhs));
                if (c.kind == ConstraintKind::Mean) {
                    const double shift = (c.rhs - v) / free_mass_;
                    for (int a : free_nodes_) u[a * m_ + c.components[0]] += shift;
                } else {
                    if (!(v > 0.0)) throw std::runtime_error("cannot normalize the zero function");
                    const double scale = std::sqrt(c.rhs / v);
                    for (int a = 0; a < mesh_.num_nodes(); ++a) {
                        for (int j : c.components) u[a * m_ + j] *= scale;
                    }
                }
            }
            if (worst <= 1e-15 * (1.0 + max_rhs())) break;
        }
    }

    double max_rhs() const {
        double r = 0.0;
        for (const auto& c : constraints_) r = std::max(r, std::abs(c.rhs));
        return r;
    }

    const VariationalProblem& problem_;
    const Mesh& mesh_;
    FeOptions options_;
    Discretization disc_;
    Integrand energy_;
    std::vector<ConstraintInfo> constraints_;
    int m_ = 1;
    std::vector<int> free_index_;
    std::vector<int> free_nodes_;
    SpMat mass_;
    Eigen::VectorXd mass_vector_;
    double free_mass_ = 0.0;
    Eigen::SimplicialLDLT<SpMat> solver_;
};

}  // namespace

double fe_energy(const VariationalProblem& problem, const Mesh& mesh, const std::vector<double>& values) {
    const Discretization disc(problem, mesh);
    return disc.integrate(Integrand(problem.f, &problem.g, false), values, nullptr);
}

std::vector<double> fe_constraint_residuals(const VariationalProblem& problem, const Mesh& mesh,
                                            const std::vector<double>& values) {
    const Discretization disc(problem, mesh);
    std::vector<double> out;
    for (std::size_t k = 0; k < problem.a.size(); ++k) {
        const Polynomial* b = k < problem.b.size() ? &problem.b[k] : nullptr;
        out.push_back(disc.integrate(Integrand(problem.a[k], b, false), values, nullptr) - problem.rhs[k]);
    }
    return out;
}

FeSolution minimize_fe(const VariationalProblem& problem, const Mesh& mesh, const FeOptions& options) {
    problem.validate();
    if (options.multistart < 1) throw std::invalid_argument("multistart must be at least 1");
    const Minimizer minimizer(problem, mesh, options);
    std::vector<StartOutcome> outcomes(options.multistart);
    if (options.parallel && options.multistart > 1) {
        std::vector<std::future<StartOutcome>> jobs;
        for (int k = 0; k < options.multistart; ++k) {
            jobs.push_back(std::async(std::launch::async, [&minimizer, &options, k] {
                return minimizer.run(options.seed + static_cast<std::uint64_t>(k));
            }));
        }
        for (int k = 0; k < options.multistart; ++k) outcomes[k] = jobs[k].get();
    } else {
        for (int k = 0; k < options.multistart; ++k) {
            outcomes[k] = minimizer.run(options.seed + static_cast<std::uint64_t>(k));
        }
    }
    FeSolution sol;
    sol.mesh = mesh;
    sol.components = problem.layout.m;
    int best = 0;
    for (int k = 0; k < options.multistart; ++k) {
        sol.starts.push_back({k, options.seed + static_cast<std::uint64_t>(k), outcomes[k].energy,
                              outcomes[k].iterations, outcomes[k].converged});
        if (outcomes[k].energy < outcomes[best].energy) best = k;
    }
    sol.values = std::move(outcomes[best].values);
    sol.energy = outcomes[best].energy;
    sol.trace = std::move(outcomes[best].trace);
    sol.iterations = outcomes[best].iterations;
    sol.converged = outcomes[best].converged;
    sol.constraint_residuals = fe_constraint_residuals(problem, mesh, sol.values);
    sol.message = "best of " + std::to_string(options.multistart) + " starts: start " + std::to_string(best);
    if (!sol.converged) sol.message += " (iteration limit reached)";
    return sol;
}

OptimalityResidual optimality_residual(const VariationalProblem& problem, const FeSolution& u,
                                       const DualCertificate& cert, const std::vector<double>& deltas, double slack) {
    const Mesh& mesh = u.mesh;
    const VarLayout L = problem.layout;
    for (double r : fe_constraint_residuals(problem, mesh, u.values)) {
        if (std::abs(r) > 1e-8) throw std::invalid_argument("u violates an integral constraint");
    }
    if (problem.bc == BoundaryCondition::Dirichlet) {
        for (int a = 0; a < mesh.num_nodes(); ++a) {
            if (!mesh.boundary_node[a]) continue;
            for (int j = 0; j < u.components; ++j) {
                if (std::abs(u.values[a * u.components + j]) > 1e-8) {
                    throw std::invalid_argument("u violates the boundary data");
                }
            }
        }
    }
    const Polynomial F = assemble_F(problem, cert.phi, cert.eta, cert.h);
    const auto facets = problem.omega.facets();
    std::vector<Polynomial> G;
    int gdeg = 2;
    for (std::size_t k = 0; k < facets.size(); ++k) {
        G.push_back(assemble_G(problem, cert.phi, cert.eta, cert.l[k], facets[k]));
        gdeg = std::max(gdeg, composed_degree(G.back()));
    }
    OptimalityResidual out;
    out.sup_bulk = out.sup_boundary = -std::numeric_limits<double>::infinity();
    out.min_bulk = out.min_boundary = std::numeric_limits<double>::infinity();
    std::vector<double> bulk_vals, bulk_w, bnd_vals, bnd_w;
    std::vector<double> pt(L.size()), y, z;
    for (const auto& qp : cell_quadrature(mesh, std::max(2, composed_degree(F)))) {
        u.evaluate(qp.cell, qp.basis, y, z);
        std::fill(pt.begin(), pt.end(), 0.0);
        for (int i = 0; i < L.n; ++i) pt[L.flat(VarId::x(i))] = qp.x[i];
        for (int j = 0; j < L.m; ++j) {
            pt[L.flat(VarId::y(j))] = y[j];
            for (int i = 0; i < L.n; ++i) pt[L.flat(VarId::z(j, i))] = z[j * L.n + i];
        }
        const double v = F.eval_double(pt);
        bulk_vals.push_back(v);
        bulk_w.push_back(qp.weight);
        out.integral_bulk += qp.weight * v;
        out.sup_bulk = std::max(out.sup_bulk, v);
        out.min_bulk = std::min(out.min_bulk, v);
    }
    for (const auto& qp : boundary_quadrature(mesh, gdeg)) {
        const auto& piece = mesh.boundary[qp.cell];
        std::size_t fi = 0;
        while (!(facets[fi].axis == piece.facet.axis && facets[fi].upper == piece.facet.upper)) ++fi;
        std::fill(pt.begin(), pt.end(), 0.0);
        for (int i = 0; i < L.n; ++i) pt[L.flat(VarId::x(i))] = qp.x[i];
        for (int a = 0; a < mesh.dim; ++a) {
            for (int j = 0; j < L.m; ++j) {
                pt[L.flat(VarId::y(j))] += qp.basis[a] * u.values[piece.nodes[a] * u.components + j];
            }
        }
        const double v = G[fi].eval_double(pt);
        bnd_vals.push_back(v);
        bnd_w.push_back(qp.weight);
        out.integral_boundary += qp.weight * v;
        out.sup_boundary = std::max(out.sup_boundary, v);
        out.min_boundary = std::min(out.min_boundary, v);
    }
    out.epsilon = 0.5 * (u.energy - cert.certified_value) + slack;
    for (double delta : deltas) {
        if (!(delta > 0.0)) throw std::invalid_argument("Chebyshev levels must be positive");
        ChebyshevRow row;
        row.delta = delta;
        for (std::size_t k = 0; k < bulk_vals.size(); ++k) {
            if (bulk_vals[k] >= delta) row.lambda += bulk_w[k];
        }
        for (std::size_t k = 0; k < bnd_vals.size(); ++k) {
            if (bnd_vals[k] >= delta) row.sigma += bnd_w[k];
        }
        row.bound = 2.0 * out.epsilon / delta;
        row.holds = row.lambda + row.sigma <= row.bound;
        out.chebyshev.push_back(row);
    }
    return out;
}

}  // namespace varbound
