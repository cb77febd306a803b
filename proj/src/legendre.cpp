#include "varbound/legendre.hpp"

#include "varbound/sampling.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace varbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Slopes between consecutive hull vertices.
std::vector<double> hull_slopes(const SampledFunction& f, const std::vector<std::size_t>& hull) {
    std::vector<double> m;
    for (std::size_t j = 0; j + 1 < hull.size(); ++j) {
        const std::size_t a = hull[j], b = hull[j + 1];
        m.push_back((f.values[b] - f.values[a]) / (f.grid[b] - f.grid[a]));
    }
    return m;
}

}  // namespace

void SampledFunction::validate() const {
    if (grid.empty()) throw std::invalid_argument("sampled function has an empty grid");
    if (grid.size() != values.size()) throw std::invalid_argument("grid and values differ in length");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!std::isfinite(grid[k]) || !std::isfinite(values[k]))
            throw std::invalid_argument("sampled function has non-finite entries");
        if (k > 0 && !(grid[k] > grid[k - 1])) throw std::invalid_argument("grid is not strictly increasing");
    }
}

double SampledFunction::eval(double s) const {
    const double tol = 1e-12 * (1.0 + std::abs(s));
    if (s < lo() - tol || s > hi() + tol) return kInf;
    if (grid.size() == 1) return values[0];
    s = std::clamp(s, lo(), hi());
    auto it = std::upper_bound(grid.begin(), grid.end(), s);
    std::size_t k = it == grid.end() ? grid.size() - 1 : static_cast<std::size_t>(it - grid.begin());
    if (k == 0) k = 1;
    const double t = (s - grid[k - 1]) / (grid[k] - grid[k - 1]);
    return (1.0 - t) * values[k - 1] + t * values[k];
}

double SampledFunction::step() const {
    double h = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) h = std::max(h, grid[k] - grid[k - 1]);
    return h;
}

SampledFunction SampledFunction::sample(const std::function<double(double)>& f, double lo, double hi, int count) {
    SampledFunction s;
    s.grid = count == 1 ? std::vector<double>{lo} : linspace(lo, hi, count);
    for (double z : s.grid) s.values.push_back(f(z));
    s.validate();
    return s;
}

std::vector<std::size_t> lower_hull(const SampledFunction& f) {
    f.validate();
    std::vector<std::size_t> h;
    for (std::size_t k = 0; k < f.grid.size(); ++k) {
        while (h.size() >= 2) {
            const std::size_t o = h[h.size() - 2], a = h.back();
            const double cross = (f.grid[a] - f.grid[o]) * (f.values[k] - f.values[o]) -
                                 (f.values[a] - f.values[o]) * (f.grid[k] - f.grid[o]);
            if (cross > 0.0) break;
            h.pop_back();
        }
        h.push_back(k);
    }
    return h;
}

std::vector<double> conjugate_at(const SampledFunction& f, std::span<const double> s) {
    const auto hull = lower_hull(f);
    const auto m = hull_slopes(f, hull);
    std::vector<double> out;
    out.reserve(s.size());
    for (double v : s) {
        const std::size_t j = static_cast<std::size_t>(std::lower_bound(m.begin(), m.end(), v) - m.begin());
        const std::size_t k = hull[j];
        out.push_back(f.grid[k] * v - f.values[k]);
    }
    return out;
}

SampledFunction conjugate(const SampledFunction& f, int dual_count) {
    const auto hull = lower_hull(f);
    const auto m = hull_slopes(f, hull);
    const int count = dual_count > 0 ? dual_count : static_cast<int>(f.grid.size());
    std::vector<double> grid;
    if (m.empty()) {
        grid = count == 1 ? std::vector<double>{0.0} : linspace(-1.0, 1.0, std::max(2, count));
    } else if (m.back() - m.front() <= 1e-14 * (1.0 + std::abs(m.front()))) {
        grid = {m.front()};
    } else {
        grid = linspace(m.front(), m.back(), std::max(2, count));
        grid.insert(grid.end(), m.begin(), m.end());
        std::sort(grid.begin(), grid.end());
        const double tol = 1e-12 * (m.back() - m.front());
        std::vector<double> merged;
        for (double v : grid) {
            if (merged.empty() || v - merged.back() > tol) merged.push_back(v);
        }
        grid = std::move(merged);
    }
    SampledFunction out;
    out.values = conjugate_at(f, grid);
    out.grid = std::move(grid);
    return out;
}

SampledFunction convexify(const SampledFunction& f) {
    SampledFunction out;
    out.grid = f.grid;
    out.values = conjugate_at(conjugate(f), f.grid);
    return out;
}

SampledFunction2D conjugate_2d(const SampledFunction2D& f, const std::vector<double>& sx, const std::vector<double>& sy) {
    const std::size_t nx = f.gx.size(), ny = f.gy.size();
    if (nx == 0 || ny == 0 || f.values.size() != nx * ny) throw std::invalid_argument("malformed tensor samples");
    // Sweep over the second axis for every first-axis node.
    std::vector<double> partial(nx * sy.size());
    for (std::size_t i = 0; i < nx; ++i) {
        SampledFunction row;
        row.grid = f.gy;
        row.values.assign(f.values.begin() + static_cast<std::ptrdiff_t>(i * ny),
                          f.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * ny));
        const auto c = conjugate_at(row, sy);
        for (std::size_t j = 0; j < sy.size(); ++j) partial[i * sy.size() + j] = c[j];
    }
    // The second sweep needs -partial as the function of the first axis.
    SampledFunction2D out;
    out.gx = sx;
    out.gy = sy;
    out.values.assign(sx.size() * sy.size(), 0.0);
    for (std::size_t j = 0; j < sy.size(); ++j) {
        SampledFunction col;
        col.grid = f.gx;
        for (std::size_t i = 0; i < nx; ++i) col.values.push_back(-partial[i * sy.size() + j]);
        const auto c = conjugate_at(col, sx);
        for (std::size_t i = 0; i < sx.size(); ++i) out.values[i * sy.size() + j] = c[i];
    }
    return out;
}

ConvexAdditiveSplit split_convex_additive(const VariationalProblem& problem) {
    const VarLayout L = problem.layout;
    if (L.n != 1 || L.m != 1) throw std::invalid_argument("the conjugate dual solve needs n = m = 1");
    if (!problem.a.empty()) throw std::invalid_argument("integral constraints are not supported by the dual solve");
    if (!problem.c.is_zero()) throw std::invalid_argument("bulk constraints are not supported by the dual solve");
    if (!problem.g.is_zero()) throw std::invalid_argument("boundary integrands are not supported by the dual solve");
    const Polynomial ysq = Polynomial::variable(L, VarId::y(0), 2);
    if (problem.bc == BoundaryCondition::Dirichlet ? !(problem.d == ysq) : !problem.d.is_zero())
        throw std::invalid_argument("only homogeneous Dirichlet or natural boundaries are supported");
    ConvexAdditiveSplit s{Polynomial(L), Polynomial(L)};
    const int yk = L.flat(VarId::y(0)), zk = L.flat(VarId::z(0, 0));
    for (const auto& [e, c] : problem.f.terms()) {
        if (e[yk] > 0 && e[zk] > 0) throw std::invalid_argument("f mixes u and its gradient; not convex-additive");
        (e[zk] > 0 ? s.f0 : s.f1).add_term(e, c);
    }
    return s;
}

std::vector<double> discrete_derivative(const std::vector<double>& x, const std::vector<double>& v) {
    const std::size_t n = x.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    d[0] = (v[1] - v[0]) / (x[1] - x[0]);
    d[n - 1] = (v[n - 1] - v[n - 2]) / (x[n - 1] - x[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (x[i + 1] - x[i - 1]);
    return d;
}

namespace {

// Per x node, the affine pieces z_k s + a_k whose maximum is the sampled conjugate.
struct ConjugateTable {
    std::vector<double> nodes;            // z_k (or y_k)
    std::vector<std::vector<double>> a;   // a[i][k] = -f(x_i, z_k)

    double exact(std::size_t i, double s) const {
        double best = -kInf;
        for (std::size_t k = 0; k < nodes.size(); ++k) best = std::max(best, nodes[k] * s + a[i][k]);
        return best;
    }

    // tau * log sum exp((z s + a) / tau) with its first two derivatives.
    void smooth(std::size_t i, double s, double tau, double& val, double& d1, double& d2) const {
        const auto& ai = a[i];
        double mx = -kInf;
        for (std::size_t k = 0; k < nodes.size(); ++k) mx = std::max(mx, (nodes[k] * s + ai[k]) / tau);
        double sum = 0.0, m1 = 0.0, m2 = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const double w = std::exp((nodes[k] * s + ai[k]) / tau - mx);
            sum += w;
            m1 += w * nodes[k];
            m2 += w * nodes[k] * nodes[k];
        }
        val = tau * (mx + std::log(sum));
        d1 = m1 / sum;
        d2 = std::max(0.0, m2 / sum - d1 * d1) / tau;
    }
};

ConjugateTable make_table(const Polynomial& f, const std::vector<double>& x, VarId var, double radius, int samples,
                          bool envelope) {
    const VarLayout L = f.layout();
    ConjugateTable t;
    t.nodes = linspace(-radius, radius, std::max(2, samples));
    std::vector<double> p(L.size(), 0.0);
    for (double xi : x) {
        p[0] = xi;
        SampledFunction row;
        row.grid = t.nodes;
        for (double z : t.nodes) {
            p[L.flat(var)] = z;
            row.values.push_back(f.eval_double(p));
        }
        if (envelope) row = convexify(row);
        std::vector<double> a(row.values.size());
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = -row.values[k];
        t.a.push_back(std::move(a));
    }
    return t;
}

std::vector<double> trapezoid_weights(const std::vector<double>& x) {
    std::vector<double> w(x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double h = x[i + 1] - x[i];
        w[i] += h / 2;
        w[i + 1] += h / 2;
    }
    return w;
}

// Sparse derivative operator rows: rho_i = sum_j D(i, j) sigma_j.
Eigen::MatrixXd derivative_matrix(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    if (n < 2) return D;
    D(0, 0) = -1.0 / (x[1] - x[0]);
    D(0, 1) = 1.0 / (x[1] - x[0]);
    D(n - 1, n - 2) = -1.0 / (x[n - 1] - x[n - 2]);
    D(n - 1, n - 1) = 1.0 / (x[n - 1] - x[n - 2]);
    for (int i = 1; i + 1 < n; ++i) {
        D(i, i - 1) = -1.0 / (x[i + 1] - x[i - 1]);
        D(i, i + 1) = 1.0 / (x[i + 1] - x[i - 1]);
    }
    return D;
}

struct DualModel {
    std::vector<double> x, w;
    ConjugateTable t0, t1;
    Eigen::MatrixXd D;

    double exact(const Eigen::VectorXd& sigma) const {
        const Eigen::VectorXd rho = D * sigma;
        double J = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) J -= w[i] * (t0.exact(i, sigma[i]) + t1.exact(i, rho[i]));
        return J;
    }

    double smooth(const Eigen::VectorXd& sigma, double tau, Eigen::VectorXd* grad, Eigen::MatrixXd* neg_hess) const {
        const int n = static_cast<int>(x.size());
        const Eigen::VectorXd rho = D * sigma;
        double J = 0.0;
        Eigen::VectorXd g0(n), g1(n), h0(n), h1(n);
        for (int i = 0; i < n; ++i) {
            double v0, a0, b0, v1, a1, b1;
            t0.smooth(i, sigma[i], tau, v0, a0, b0);
            t1.smooth(i, rho[i], tau, v1, a1, b1);
            J -= w[i] * (v0 + v1);
            g0[i] = w[i] * a0;
            g1[i] = w[i] * a1;
            h0[i] = w[i] * b0;
            h1[i] = w[i] * b1;
        }
        if (grad) *grad = -(g0 + D.transpose() * g1);
        if (neg_hess) *neg_hess = Eigen::MatrixXd(h0.asDiagonal()) + D.transpose() * h1.asDiagonal() * D;
        return J;
    }
};

double growth_ratio_min(const Polynomial& f, const std::vector<double>& x, VarId var, double radius, double p) {
    const VarLayout L = f.layout();
    std::vector<double> pt(L.size(), 0.0);
    double best = kInf;
    for (double xi : x) {
        pt[0] = xi;
        for (double r : linspace(radius / 2, radius, 9)) {
            for (double sgn : {-1.0, 1.0}) {
                pt[L.flat(var)] = sgn * r;
                best = std::min(best, f.eval_double(pt) / std::pow(r, p));
            }
        }
    }
    return best;
}

double golden_max(const std::function<double(double)>& f, double a, double b, int iterations) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < iterations && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? c : d;
}

}  // namespace

double dual_objective(const VariationalProblem& problem, const std::vector<double>& x, const std::vector<double>& sigma,
                      const DualSolveOptions& options) {
    const auto split = split_convex_additive(problem);
    DualModel model;
    model.x = x;
    model.w = trapezoid_weights(x);
    model.t0 = make_table(split.f0, x, VarId::z(0, 0), options.z_radius, options.z_samples, options.convexify);
    model.t1 = make_table(split.f1, x, VarId::y(0), options.y_radius, options.y_samples, false);
    model.D = derivative_matrix(x);
    return model.exact(Eigen::Map<const Eigen::VectorXd>(sigma.data(), static_cast<Eigen::Index>(sigma.size())));
}

DualFieldPair solve_conjugate_dual_1d(const VariationalProblem& problem, const DualSolveOptions& options) {
    const auto split = split_convex_additive(problem);
    const VarLayout L = problem.layout;
    const Box& box = problem.omega;
    DualFieldPair out;
    out.x = linspace(box.lo[0], box.hi[0], std::max(3, options.x_nodes));
    const int n = static_cast<int>(out.x.size());

    const double c1 = growth_ratio_min(split.f0, out.x, VarId::z(0, 0), options.z_radius, problem.p);
    const double c3 = growth_ratio_min(split.f1, out.x, VarId::y(0), options.y_radius, problem.p);
    out.growth_constant = c1;
    out.coercive = c1 > 0.0 && c3 > -0.5 * c1;
    if (!out.coercive) {
        std::ostringstream os;
        os << "growth check failed (f0 >= " << c1 << " |z|^p, f1 >= " << c3
           << " |y|^p on the sampled ranges); result is an uncertified estimate";
        out.warnings.push_back(os.str());
    }

    DualModel model;
    model.x = out.x;
    model.w = trapezoid_weights(out.x);
    model.t0 = make_table(split.f0, out.x, VarId::z(0, 0), options.z_radius, options.z_samples, options.convexify);
    model.t1 = make_table(split.f1, out.x, VarId::y(0), options.y_radius, options.y_samples, false);
    model.D = derivative_matrix(out.x);
    const bool natural = problem.bc == BoundaryCondition::Natural;

    if (split.f1.degree_in(Block::Y) <= 1) {
        // f1 = F(x) y + K(x): f1* is finite only at rho = F, so sigma is F's
        // antiderivative plus one constant.
        out.linear_f1 = true;
        const Polynomial F = split.f1.partial(VarId::y(0));
        std::vector<double> p(L.size(), 0.0);
        auto Fx = [&](double xv) {
            p[0] = xv;
            return F.eval_double(p);
        };
        const GaussRule g = gauss_legendre(8);
        std::vector<double> P(n, 0.0);
        for (int i = 1; i < n; ++i) {
            const double a = out.x[i - 1], b = out.x[i];
            double acc = 0.0;
            for (std::size_t q = 0; q < g.nodes.size(); ++q)
                acc += g.weights[q] * Fx((a + b) / 2 + (b - a) / 2 * g.nodes[q]);
            P[i] = P[i - 1] + acc * (b - a) / 2;
        }
        out.rho.resize(n);
        for (int i = 0; i < n; ++i) out.rho[i] = Fx(out.x[i]);
        auto value = [&](double c) {
            double J = 0.0;
            for (int i = 0; i < n; ++i) J -= model.w[i] * (model.t0.exact(i, c + P[i]) + model.t1.exact(i, out.rho[i]));
            return J;
        };
        double c = 0.0;
        if (natural) {
            if (std::abs(P[n - 1]) > 1e-9 * (1.0 + std::abs(P[n - 1]))) {
                out.warnings.push_back("natural boundary with int F != 0: the problem is unbounded below");
                out.sigma = P;
                out.objective = -kInf;
                return out;
            }
        } else {
            double maxP = 0.0;
            for (double v : P) maxP = std::max(maxP, std::abs(v));
            const double C = options.z_radius * 4.0 + maxP + 1.0;
            c = golden_max(value, -C, C, 200);
        }
        out.sigma.resize(n);
        for (int i = 0; i < n; ++i) out.sigma[i] = c + P[i];
        out.objective = value(c);
        out.converged = true;
        out.iterations = 200;
        return out;
    }

    std::vector<int> free;
    for (int i = 0; i < n; ++i) {
        if (!(natural && (i == 0 || i == n - 1))) free.push_back(i);
    }
    const int nf = static_cast<int>(free.size());
    Eigen::VectorXd sigma = Eigen::VectorXd::Zero(n);
    double decrement = kInf;
    for (double tau : options.smoothing) {
        for (int it = 0; it < options.max_iterations; ++it) {
            Eigen::VectorXd grad;
            Eigen::MatrixXd M;
            const double J = model.smooth(sigma, tau, &grad, &M);
            Eigen::VectorXd gf(nf);
            Eigen::MatrixXd Mf(nf, nf);
            for (int a = 0; a < nf; ++a) {
                gf[a] = grad[free[a]];
                for (int b = 0; b < nf; ++b) Mf(a, b) = M(free[a], free[b]);
            }
            const double reg = 1e-12 * (1.0 + Mf.diagonal().cwiseAbs().maxCoeff());
            Mf.diagonal().array() += reg;
            Eigen::VectorXd step = Mf.ldlt().solve(gf);
            double slope = gf.dot(step);
            if (!step.allFinite() || slope <= 0.0) {
                step = gf;
                slope = gf.squaredNorm();
            }
            decrement = slope;
            ++out.iterations;
            if (slope <= options.tolerance * (1.0 + std::abs(J))) break;
            double t = 1.0;
            bool moved = false;
            while (t > 1e-14) {
                Eigen::VectorXd trial = sigma;
                for (int a = 0; a < nf; ++a) trial[free[a]] += t * step[a];
                if (model.smooth(trial, tau, nullptr, nullptr) >= J + 1e-4 * t * slope) {
                    sigma = trial;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if (!moved) break;
        }
    }
    out.converged = decrement <= 1e3 * options.tolerance * (1.0 + std::abs(model.exact(sigma)));
    if (!out.converged) out.warnings.push_back("dual ascent stopped before convergence; returning the best iterate");
    out.sigma.assign(sigma.data(), sigma.data() + n);
    out.rho = discrete_derivative(out.x, out.sigma);
    out.objective = model.exact(sigma);
    return out;
}

double pointwise_conjugate(const std::function<double(double)>& f, double s, double radius, int samples) {
    const auto z = linspace(-radius, radius, std::max(2, samples));
    std::size_t best = 0;
    double bv = -kInf;
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double v = z[k] * s - f(z[k]);
        if (v > bv) {
            bv = v;
            best = k;
        }
    }
    const double a = z[best == 0 ? 0 : best - 1];
    const double b = z[std::min(best + 1, z.size() - 1)];
    auto g = [&](double t) { return t * s - f(t); };
    const double t = golden_max(g, a, b, 100);
    return std::max(bv, g(t));
}

Polynomial fit_polynomial_x(VarLayout layout, const std::vector<double>& x, const std::vector<double>& v, int degree,
                            double* max_residual) {
    if (x.size() != v.size() || x.empty()) throw std::invalid_argument("fit data mismatch");
    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    const double c = (lo + hi) / 2, r = hi > lo ? (hi - lo) / 2 : 1.0;
    const int deg = std::min<int>(degree, static_cast<int>(x.size()) - 1);
    Eigen::MatrixXd V(x.size(), deg + 1);
    Eigen::VectorXd rhs(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double t = (x[k] - c) / r;
        double pw = 1.0;
        for (int j = 0; j <= deg; ++j) {
            V(k, j) = pw;
            pw *= t;
        }
        rhs[k] = v[k];
    }
    const Eigen::VectorXd a = V.colPivHouseholderQr().solve(rhs);
    const Polynomial T = (Polynomial::variable(layout, VarId::x(0)) - Polynomial::constant(layout, c)) * (1.0 / r);
    Polynomial p(layout);
    for (int j = deg; j >= 0; --j) p = p * T + Polynomial::constant(layout, a[j]);
    if (max_residual) {
        double res = 0.0;
        std::vector<double> pt(layout.size(), 0.0);
        for (std::size_t k = 0; k < x.size(); ++k) {
            pt[0] = x[k];
            res = std::max(res, std::abs(p.eval_double(pt) - v[k]));
        }
        *max_residual = res;
    }
    return p;
}

DualCertificate certificate_from_dual_fields(const DualFieldPair& fields, const VariationalProblem& problem,
                                             const SharpOptions& options) {
    const auto split = split_convex_additive(problem);
    const VarLayout L = problem.layout;
    auto max_abs = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double a : v) m = std::max(m, std::abs(a));
        return m;
    };
    double res = 0.0;
    const Polynomial sigma = fit_polynomial_x(L, fields.x, fields.sigma, options.sigma_degree, &res);
    if (res > options.fit_tolerance * (1.0 + max_abs(fields.sigma))) {
        std::ostringstream os;
        os << "sigma fit residual " << res << " exceeds the tolerance; raise the fit degree above "
           << options.sigma_degree;
        throw FitError(os.str());
    }
    const Polynomial rho = sigma.partial(VarId::x(0));

    const Box& box = problem.omega;
    const auto xs = linspace(box.lo[0], box.hi[0], std::max(2, options.h_fit_nodes));
    std::vector<double> target;
    std::vector<double> p(L.size(), 0.0);
    for (double xv : xs) {
        p.assign(L.size(), 0.0);
        p[0] = xv;
        const double s = sigma.eval_double(p), r = rho.eval_double(p);
        auto f0 = [&](double z) {
            std::vector<double> q(L.size(), 0.0);
            q[0] = xv;
            q[L.flat(VarId::z(0, 0))] = z;
            return split.f0.eval_double(q);
        };
        auto f1 = [&](double y) {
            std::vector<double> q(L.size(), 0.0);
            q[0] = xv;
            q[L.flat(VarId::y(0))] = y;
            return split.f1.eval_double(q);
        };
        const double c0 = pointwise_conjugate(f0, s, options.dual.z_radius, options.dual.z_samples);
        const double c1 = pointwise_conjugate(f1, r, options.dual.y_radius, options.dual.y_samples);
        target.push_back(-c0 - c1);
    }
    const Polynomial h = fit_polynomial_x(L, xs, target, options.h_degree, &res);
    if (res > options.fit_tolerance * (1.0 + max_abs(target))) {
        std::ostringstream os;
        os << "h fit residual " << res << " exceeds the tolerance; raise the fit degree above " << options.h_degree;
        throw FitError(os.str());
    }

    DualCertificate cert = DualCertificate::zero(problem);
    cert.phi[0] = -(sigma * Polynomial::variable(L, VarId::y(0)));
    cert.h = h;
    cert = certify(problem, cert, options.certify);
    if (!fields.coercive) cert.record.note += "; growth check failed: uncertified estimate";
    return cert;
}

}  // namespace varbound
