#include "varbound/lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

namespace varbound {

int LinearProgram::add_variable(double cost, VarBound bound, std::string name) {
    variables.push_back({cost, bound, std::move(name)});
    return num_vars() - 1;
}

int LinearProgram::add_row(std::vector<std::pair<int, double>> coeffs, Relation relation, double rhs,
                           std::string name) {
    rows.push_back({std::move(coeffs), relation, rhs, std::move(name)});
    return num_rows() - 1;
}

void LinearProgram::validate() const {
    for (const auto& v : variables) {
        if (!std::isfinite(v.cost)) throw std::invalid_argument("non-finite cost coefficient");
    }
    for (const auto& r : rows) {
        if (!std::isfinite(r.rhs)) throw std::invalid_argument("non-finite right-hand side");
        for (const auto& [j, a] : r.coeffs) {
            if (j < 0 || j >= num_vars()) throw std::invalid_argument("row references a missing variable");
            if (!std::isfinite(a)) throw std::invalid_argument("non-finite constraint coefficient");
        }
    }
}

void LinearProgram::write_lp_format(std::ostream& os) const {
    auto var_name = [&](int j) {
        return variables[j].name.empty() ? "x" + std::to_string(j) : variables[j].name;
    };
    auto term = [&](double a, int j, bool first) {
        os << (a < 0 ? " - " : (first ? " " : " + ")) << std::abs(a) << ' ' << var_name(j);
    };
    os.precision(17);
    os << (sense == Sense::Minimize ? "Minimize\n" : "Maximize\n") << " obj:";
    bool first = true;
    for (int j = 0; j < num_vars(); ++j) {
        if (variables[j].cost == 0.0) continue;
        term(variables[j].cost, j, first);
        first = false;
    }
    if (first) os << " 0 " << (num_vars() > 0 ? var_name(0) : std::string("x0"));
    os << "\nSubject To\n";
    for (int i = 0; i < num_rows(); ++i) {
        const auto& r = rows[i];
        os << ' ' << (r.name.empty() ? "r" + std::to_string(i) : r.name) << ':';
        first = true;
        for (const auto& [j, a] : r.coeffs) {
            term(a, j, first);
            first = false;
        }
        if (first) os << " 0 " << var_name(0);
        os << (r.relation == Relation::Equal ? " = " : r.relation == Relation::LessEqual ? " <= " : " >= ") << r.rhs
           << '\n';
    }
    os << "Bounds\n";
    for (int j = 0; j < num_vars(); ++j) {
        if (variables[j].bound == VarBound::Free) os << ' ' << var_name(j) << " free\n";
    }
    os << "End\n";
}

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::NumericalFailure: return "numerical-failure";
        case LpStatus::IterationLimit: return "iteration-limit";
    }
    return "?";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// min c^T x, A x = b, x >= 0 with b >= 0.
struct StandardForm {
    MatrixXd A;
    VectorXd b;
    VectorXd c;
    std::vector<int> initial_basis;  // per row: a column with a positive unit-like entry, or -1
    std::vector<int> pos_col;
    std::vector<int> neg_col;
    std::vector<double> row_scale;
    double obj_sign = 1.0;
};

StandardForm to_standard(const LinearProgram& lp) {
    StandardForm sf;
    const int m = lp.num_rows();
    sf.obj_sign = lp.sense == Sense::Minimize ? 1.0 : -1.0;
    int cols = 0;
    for (const auto& v : lp.variables) {
        sf.pos_col.push_back(cols++);
        sf.neg_col.push_back(v.bound == VarBound::Free ? cols++ : -1);
    }
    std::vector<int> slack(m, -1);
    for (int i = 0; i < m; ++i) {
        if (lp.rows[i].relation != Relation::Equal) slack[i] = cols++;
    }
    sf.A = MatrixXd::Zero(m, cols);
    sf.b = VectorXd::Zero(m);
    sf.c = VectorXd::Zero(cols);
    for (int j = 0; j < lp.num_vars(); ++j) {
        sf.c[sf.pos_col[j]] = sf.obj_sign * lp.variables[j].cost;
        if (sf.neg_col[j] >= 0) sf.c[sf.neg_col[j]] = -sf.obj_sign * lp.variables[j].cost;
    }
    sf.row_scale.assign(m, 1.0);
    sf.initial_basis.assign(m, -1);
    for (int i = 0; i < m; ++i) {
        const auto& r = lp.rows[i];
        double big = 0.0;
        for (const auto& [j, a] : r.coeffs) big = std::max(big, std::abs(a));
        double s = big > 0.0 ? 1.0 / big : 1.0;
        if (r.rhs * s < 0.0) s = -s;
        sf.row_scale[i] = s;
        for (const auto& [j, a] : r.coeffs) {
            sf.A(i, sf.pos_col[j]) += s * a;
            if (sf.neg_col[j] >= 0) sf.A(i, sf.neg_col[j]) -= s * a;
        }
        sf.b[i] = s * r.rhs;
        if (slack[i] >= 0) {
            const double sign = (r.relation == Relation::LessEqual ? 1.0 : -1.0) * (s > 0 ? 1.0 : -1.0);
            sf.A(i, slack[i]) = sign;
            if (sign > 0) sf.initial_basis[i] = slack[i];
        }
    }
    return sf;
}

struct StandardResult {
    LpStatus status = LpStatus::NumericalFailure;
    VectorXd x;
    VectorXd y;
    int iterations = 0;
    std::string message;
};

class RevisedSimplex {
public:
    RevisedSimplex(const StandardForm& sf, const LpOptions& opt, LpSolution& trace)
        : opt_(opt), trace_(trace), b_(sf.b), bwork_(sf.b) {
        m_ = static_cast<int>(sf.A.rows());
        n_ = static_cast<int>(sf.A.cols());
        int arts = 0;
        for (int i = 0; i < m_; ++i) arts += sf.initial_basis[i] < 0 ? 1 : 0;
        M_ = MatrixXd::Zero(m_, n_ + arts);
        M_.leftCols(n_) = sf.A;
        basis_.resize(m_);
        int a = n_;
        for (int i = 0; i < m_; ++i) {
            if (sf.initial_basis[i] >= 0) {
                basis_[i] = sf.initial_basis[i];
            } else {
                M_(i, a) = 1.0;
                basis_[i] = a++;
            }
        }
        total_ = n_ + arts;
        is_basic_.assign(total_, false);
        for (int j : basis_) is_basic_[j] = true;
        c_ = VectorXd::Zero(total_);
        c_.head(n_) = sf.c;
    }

    StandardResult run() {
        StandardResult res;
        if (!refactor()) return fail("initial basis is singular");
        // Phase one: drive the artificial variables to zero.
        if (total_ > n_) {
            VectorXd c1 = VectorXd::Zero(total_);
            c1.tail(total_ - n_).setOnes();
            LpStatus s = iterate(c1, false, res.iterations);
            if (s != LpStatus::Optimal) return finish(s == LpStatus::Unbounded ? LpStatus::NumericalFailure : s, res);
            double infeas = 0.0;
            for (int i = 0; i < m_; ++i) {
                if (basis_[i] >= n_) infeas += std::max(0.0, xB_[i]);
            }
            if (infeas > 10.0 * opt_.feasibility_tol * (1.0 + b_.lpNorm<Eigen::Infinity>())) {
                res.status = LpStatus::Infeasible;
                res.message = "phase one ended with artificial mass " + std::to_string(infeas);
                return res;
            }
            drive_out_artificials();
        }
        LpStatus s = iterate(c_, true, res.iterations);
        return finish(s, res);
    }

private:
    StandardResult fail(const std::string& why) {
        StandardResult r;
        r.status = LpStatus::NumericalFailure;
        r.message = why;
        return r;
    }

    StandardResult finish(LpStatus s, StandardResult& res) {
        res.status = s;
        if (s != LpStatus::Optimal) {
            if (res.message.empty()) res.message = std::string("simplex stopped: ") + to_string(s);
            return res;
        }
        if (!refactor()) return fail("final basis is singular");
        res.x = VectorXd::Zero(n_);
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < n_) res.x[basis_[i]] = std::max(0.0, xB_[i]);
        }
        VectorXd cB(m_);
        for (int i = 0; i < m_; ++i) cB[i] = c_[basis_[i]];
        res.y = Binv_.transpose() * cB;
        const double resid = (M_.leftCols(n_) * res.x - b_).lpNorm<Eigen::Infinity>();
        if (resid > 1e-7 * (1.0 + b_.lpNorm<Eigen::Infinity>())) {
            res.status = LpStatus::NumericalFailure;
            res.message = "primal residual " + std::to_string(resid) + " after refactorization";
        }
        return res;
    }

    bool refactor() {
        MatrixXd B(m_, m_);
        for (int i = 0; i < m_; ++i) B.col(i) = M_.col(basis_[i]);
        Eigen::PartialPivLU<MatrixXd> lu(B);
        Binv_ = lu.inverse();
        if (!Binv_.allFinite()) return false;
        const double err = (B * Binv_ - MatrixXd::Identity(m_, m_)).lpNorm<Eigen::Infinity>();
        if (err > 1e-6) return false;
        xB_ = Binv_ * bwork_;
        for (int i = 0; i < m_; ++i) {
            if (xB_[i] < 0.0 && xB_[i] > -1e-9) xB_[i] = 0.0;
        }
        since_refactor_ = 0;
        return true;
    }

    // Primal simplex with bound perturbation against stalling: once a run of
    // degenerate pivots gets long, the basic values are shifted by small
    // random amounts; at the end the shift is removed and any resulting
    // infeasibility is repaired with dual simplex pivots.
    LpStatus iterate(const VectorXd& cost, bool phase_two, int& iterations) {
        for (int round = 0;; ++round) {
            LpStatus s = primal_loop(cost, phase_two, iterations, round < 3);
            if (s != LpStatus::Optimal || !perturbed_) return s;
            perturbed_ = false;
            bwork_ = b_;
            if (!refactor()) return LpStatus::NumericalFailure;
            s = dual_cleanup(cost, phase_two, iterations);
            if (s != LpStatus::Optimal) return s;
            if (round >= 8) return LpStatus::NumericalFailure;
        }
    }

    LpStatus primal_loop(const VectorXd& cost, bool phase_two, int& iterations, bool may_perturb) {
        const double tol = opt_.optimality_tol * std::max(1.0, cost.lpNorm<Eigen::Infinity>());
        int degenerate_run = 0;
        bool bland = false;
        VectorXd cB(m_);
        while (true) {
            if (iterations >= opt_.max_iterations) return LpStatus::IterationLimit;
            for (int i = 0; i < m_; ++i) cB[i] = cost[basis_[i]];
            VectorXd y = Binv_.transpose() * cB;
            VectorXd d = cost - M_.transpose() * y;

            int q = -1;
            double best = -tol;
            for (int j = 0; j < total_; ++j) {
                if (is_basic_[j] || (phase_two && j >= n_)) continue;
                if (d[j] < best) {
                    q = j;
                    if (bland) break;
                    best = d[j];
                }
            }
            if (q < 0) return LpStatus::Optimal;

            VectorXd alpha = Binv_ * M_.col(q);
            const int r = ratio_test(alpha, bland);
            if (r < 0) return LpStatus::Unbounded;

            const double theta = std::max(0.0, xB_[r]) / alpha[r];
            if (theta <= 1e-12) {
                if (++degenerate_run > opt_.degenerate_before_bland) {
                    if (may_perturb && !perturbed_) {
                        perturb();
                        degenerate_run = 0;
                        continue;
                    }
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
            pivot(r, q, alpha, theta);
            ++iterations;
            if (++since_refactor_ >= opt_.refactor_every) {
                if (!refactor()) return LpStatus::NumericalFailure;
            }
        }
    }

    // Two-pass (Harris) ratio test: bound the step with a slightly relaxed
    // feasibility tolerance, then take the largest pivot within that bound.
    int ratio_test(const VectorXd& alpha, bool bland) const {
        const double piv_tol = 1e-9 * std::max(1.0, alpha.lpNorm<Eigen::Infinity>());
        if (bland) {
            // Textbook minimum ratio with lowest-index ties, which cannot cycle.
            int r = -1;
            double best = 0.0;
            for (int i = 0; i < m_; ++i) {
                if (alpha[i] <= piv_tol) continue;
                const double t = std::max(0.0, xB_[i]) / alpha[i];
                if (r < 0 || t < best - 1e-14 || (t <= best + 1e-14 && basis_[i] < basis_[r])) {
                    if (r < 0 || t < best - 1e-14) best = t;
                    r = i;
                }
            }
            return r;
        }
        double bound = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m_; ++i) {
            if (alpha[i] > piv_tol) bound = std::min(bound, (std::max(0.0, xB_[i]) + opt_.feasibility_tol) / alpha[i]);
        }
        int r = -1;
        for (int i = 0; i < m_; ++i) {
            if (alpha[i] <= piv_tol || std::max(0.0, xB_[i]) / alpha[i] > bound) continue;
            if (r < 0) {
                r = i;
            } else if (alpha[i] > alpha[r]) {
                r = i;
            }
        }
        return r;
    }

    void perturb() {
        const double scale = 1e-7 * (1.0 + b_.lpNorm<Eigen::Infinity>());
        std::uniform_real_distribution<double> u(0.5, 1.0);
        VectorXd delta(m_);
        for (int i = 0; i < m_; ++i) delta[i] = u(rng_) * scale;
        MatrixXd B(m_, m_);
        for (int i = 0; i < m_; ++i) B.col(i) = M_.col(basis_[i]);
        bwork_ += B * delta;
        xB_ += delta;
        perturbed_ = true;
    }

    // Dual simplex pivots from a dual feasible basis until xB >= 0.
    LpStatus dual_cleanup(const VectorXd& cost, bool phase_two, int& iterations) {
        VectorXd cB(m_);
        while (true) {
            if (iterations >= opt_.max_iterations) return LpStatus::IterationLimit;
            int r = -1;
            double worst = -opt_.feasibility_tol;
            for (int i = 0; i < m_; ++i) {
                if (xB_[i] < worst) {
                    worst = xB_[i];
                    r = i;
                }
            }
            if (r < 0) {
                for (int i = 0; i < m_; ++i) xB_[i] = std::max(0.0, xB_[i]);
                return LpStatus::Optimal;
            }
            for (int i = 0; i < m_; ++i) cB[i] = cost[basis_[i]];
            const VectorXd y = Binv_.transpose() * cB;
            const VectorXd d = cost - M_.transpose() * y;
            const Eigen::RowVectorXd row = Binv_.row(r) * M_;
            const double piv_tol = 1e-9 * std::max(1.0, row.lpNorm<Eigen::Infinity>());
            int q = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int j = 0; j < total_; ++j) {
                if (is_basic_[j] || (phase_two && j >= n_) || row[j] >= -piv_tol) continue;
                const double t = std::max(0.0, d[j]) / -row[j];
                if (t < best) {
                    best = t;
                    q = j;
                }
            }
            if (q < 0) return LpStatus::Infeasible;
            const VectorXd alpha = Binv_ * M_.col(q);
            pivot(r, q, alpha, xB_[r] / alpha[r]);
            ++iterations;
            trace_.pivots.push_back({q, basis_leaving_});
            if (++since_refactor_ >= opt_.refactor_every) {
                if (!refactor()) return LpStatus::NumericalFailure;
            }
        }
    }

    void pivot(int r, int q, const VectorXd& alpha, double theta) {
        xB_ -= theta * alpha;
        xB_[r] = theta;
        const double piv = alpha[r];
        Binv_.row(r) /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == r || alpha[i] == 0.0) continue;
            Binv_.row(i) -= alpha[i] * Binv_.row(r);
        }
        basis_leaving_ = basis_[r];
        is_basic_[basis_[r]] = false;
        basis_[r] = q;
        is_basic_[q] = true;
    }

    void drive_out_artificials() {
        for (int r = 0; r < m_; ++r) {
            if (basis_[r] < n_) continue;
            Eigen::RowVectorXd row = Binv_.row(r) * M_.leftCols(n_);
            int q = -1;
            double best = 1e-7;
            for (int j = 0; j < n_; ++j) {
                if (is_basic_[j]) continue;
                if (std::abs(row[j]) > best) {
                    best = std::abs(row[j]);
                    q = j;
                }
            }
            if (q < 0) continue;  // redundant row; the artificial stays basic at zero
            VectorXd alpha = Binv_ * M_.col(q);
            pivot(r, q, alpha, std::max(0.0, xB_[r]) / alpha[r]);
        }
        refactor();
    }

    const LpOptions& opt_;
    LpSolution& trace_;
    VectorXd b_;
    VectorXd bwork_;  // b_ plus the current perturbation
    bool perturbed_ = false;
    std::mt19937 rng_{20240917u};
    MatrixXd M_;
    VectorXd c_;
    MatrixXd Binv_;
    VectorXd xB_;
    std::vector<int> basis_;
    std::vector<bool> is_basic_;
    int m_ = 0;
    int n_ = 0;
    int total_ = 0;
    int since_refactor_ = 0;
    int basis_leaving_ = -1;
};

LpSolution solve_direct(const LinearProgram& lp, const LpOptions& opt) {
    LpSolution sol;
    StandardForm sf = to_standard(lp);
    if (lp.num_rows() == 0) {
        // Only sign constraints: optimal at zero unless some cost direction is unbounded.
        for (int j = 0; j < lp.num_vars(); ++j) {
            const double c = sf.c[sf.pos_col[j]];
            if (c < 0 || (sf.neg_col[j] >= 0 && c != 0.0)) {
                sol.status = LpStatus::Unbounded;
                sol.message = "no rows and an improving direction";
                return sol;
            }
        }
        sol.status = LpStatus::Optimal;
        sol.primal.assign(lp.num_vars(), 0.0);
        return sol;
    }
    RevisedSimplex simplex(sf, opt, sol);
    StandardResult res = simplex.run();
    sol.status = res.status;
    sol.iterations = res.iterations;
    sol.message = res.message;
    if (res.status != LpStatus::Optimal) return sol;
    sol.primal.resize(lp.num_vars());
    for (int j = 0; j < lp.num_vars(); ++j) {
        double v = res.x[sf.pos_col[j]];
        if (sf.neg_col[j] >= 0) v -= res.x[sf.neg_col[j]];
        sol.primal[j] = v;
        sol.objective += lp.variables[j].cost * v;
    }
    sol.dual.resize(lp.num_rows());
    for (int i = 0; i < lp.num_rows(); ++i) sol.dual[i] = sf.obj_sign * res.y[i] * sf.row_scale[i];
    return sol;
}

// Dual of the program written as a minimization: max b^T y subject to
// A^T y <= c (nonnegative x) or = c (free x), with y >= 0 on >= rows, y <= 0
// on <= rows (stored negated) and free on equality rows.
LinearProgram dual_program(const LinearProgram& lp, std::vector<double>& y_sign) {
    const double s = lp.sense == Sense::Minimize ? 1.0 : -1.0;
    LinearProgram d;
    d.sense = Sense::Maximize;
    y_sign.assign(lp.num_rows(), 1.0);
    for (int i = 0; i < lp.num_rows(); ++i) {
        const auto& r = lp.rows[i];
        VarBound bound = r.relation == Relation::Equal ? VarBound::Free : VarBound::NonNegative;
        y_sign[i] = r.relation == Relation::LessEqual ? -1.0 : 1.0;
        d.add_variable(y_sign[i] * r.rhs, bound);
    }
    std::vector<std::vector<std::pair<int, double>>> cols(lp.num_vars());
    for (int i = 0; i < lp.num_rows(); ++i) {
        for (const auto& [j, a] : lp.rows[i].coeffs) cols[j].push_back({i, y_sign[i] * a});
    }
    for (int j = 0; j < lp.num_vars(); ++j) {
        Relation rel = lp.variables[j].bound == VarBound::Free ? Relation::Equal : Relation::LessEqual;
        d.add_row(std::move(cols[j]), rel, s * lp.variables[j].cost);
    }
    return d;
}

}  // namespace

LpSolution solve(const LinearProgram& lp, const LpOptions& options) {
    lp.validate();
    const bool tall = options.dualize_ratio > 0 && lp.num_rows() > options.dualize_ratio * std::max(1, lp.num_vars());
    if (!tall) return solve_direct(lp, options);

    std::vector<double> y_sign;
    LinearProgram d = dual_program(lp, y_sign);
    LpOptions inner = options;
    inner.dualize_ratio = 0.0;
    LpSolution ds = solve_direct(d, inner);
    // Reduced-cost tolerances of the dual become row violations of the
    // original; tighten once if the recovered point is visibly infeasible.
    if (ds.optimal()) {
        std::vector<double> x(lp.num_vars());
        for (int j = 0; j < lp.num_vars(); ++j) x[j] = ds.dual[j];
        double bnorm = 0.0;
        for (const auto& r : lp.rows) bnorm = std::max(bnorm, std::abs(r.rhs));
        if (primal_infeasibility(lp, x) > 1e-7 * (1.0 + bnorm)) {
            inner.optimality_tol *= 1e-3;
            ds = solve_direct(d, inner);
        }
    }
    if (ds.status == LpStatus::Infeasible) {
        // The primal is unbounded or infeasible; the direct solve tells which.
        return solve_direct(lp, inner);
    }
    LpSolution sol;
    sol.solved_dual = true;
    sol.iterations = ds.iterations;
    sol.pivots = std::move(ds.pivots);
    sol.objective_trace = std::move(ds.objective_trace);
    sol.message = ds.message;
    if (ds.status == LpStatus::Unbounded) {
        sol.status = LpStatus::Infeasible;
        sol.message = "dual program is unbounded";
        return sol;
    }
    sol.status = ds.status;
    if (!ds.optimal()) return sol;
    const double s = lp.sense == Sense::Minimize ? 1.0 : -1.0;
    sol.primal.resize(lp.num_vars());
    for (int j = 0; j < lp.num_vars(); ++j) {
        sol.primal[j] = ds.dual[j];
        sol.objective += lp.variables[j].cost * sol.primal[j];
    }
    sol.dual.resize(lp.num_rows());
    for (int i = 0; i < lp.num_rows(); ++i) sol.dual[i] = s * y_sign[i] * ds.primal[i];
    return sol;
}

namespace {

std::vector<double> row_activity(const LinearProgram& lp, const std::vector<double>& x) {
    std::vector<double> act(lp.num_rows(), 0.0);
    for (int i = 0; i < lp.num_rows(); ++i) {
        for (const auto& [j, a] : lp.rows[i].coeffs) act[i] += a * x[j];
    }
    return act;
}

std::vector<double> reduced_costs(const LinearProgram& lp, const std::vector<double>& y) {
    std::vector<double> d(lp.num_vars());
    for (int j = 0; j < lp.num_vars(); ++j) d[j] = lp.variables[j].cost;
    for (int i = 0; i < lp.num_rows(); ++i) {
        for (const auto& [j, a] : lp.rows[i].coeffs) d[j] -= a * y[i];
    }
    return d;
}

}  // namespace

double primal_infeasibility(const LinearProgram& lp, const std::vector<double>& x) {
    double worst = 0.0;
    for (int j = 0; j < lp.num_vars(); ++j) {
        if (lp.variables[j].bound == VarBound::NonNegative) worst = std::max(worst, -x[j]);
    }
    auto act = row_activity(lp, x);
    for (int i = 0; i < lp.num_rows(); ++i) {
        const double diff = act[i] - lp.rows[i].rhs;
        switch (lp.rows[i].relation) {
            case Relation::Equal: worst = std::max(worst, std::abs(diff)); break;
            case Relation::LessEqual: worst = std::max(worst, diff); break;
            case Relation::GreaterEqual: worst = std::max(worst, -diff); break;
        }
    }
    return worst;
}

double dual_infeasibility(const LinearProgram& lp, const std::vector<double>& y) {
    // Work in minimization form: flip signs for a maximization.
    const double s = lp.sense == Sense::Minimize ? 1.0 : -1.0;
    double worst = 0.0;
    auto d = reduced_costs(lp, y);
    for (int j = 0; j < lp.num_vars(); ++j) {
        const double dj = s * d[j];
        worst = std::max(worst, lp.variables[j].bound == VarBound::Free ? std::abs(dj) : -dj);
    }
    for (int i = 0; i < lp.num_rows(); ++i) {
        const double yi = s * y[i];
        if (lp.rows[i].relation == Relation::GreaterEqual) worst = std::max(worst, -yi);
        if (lp.rows[i].relation == Relation::LessEqual) worst = std::max(worst, yi);
    }
    return worst;
}

double complementary_slackness(const LinearProgram& lp, const LpSolution& sol) {
    double worst = 0.0;
    auto d = reduced_costs(lp, sol.dual);
    for (int j = 0; j < lp.num_vars(); ++j) worst = std::max(worst, std::abs(sol.primal[j] * d[j]));
    auto act = row_activity(lp, sol.primal);
    for (int i = 0; i < lp.num_rows(); ++i) worst = std::max(worst, std::abs(sol.dual[i] * (act[i] - lp.rows[i].rhs)));
    return worst;
}

double check_duality_gap(const LinearProgram& lp, const LpSolution& sol) {
    if (!sol.optimal()) throw std::logic_error(std::string("duality gap needs an optimal solution, got ") + to_string(sol.status));
    double dual_obj = 0.0;
    for (int i = 0; i < lp.num_rows(); ++i) dual_obj += lp.rows[i].rhs * sol.dual[i];
    return std::abs(sol.objective - dual_obj);
}

}  // namespace varbound
