#pragma once

#include "varbound/legendre.hpp"
#include "varbound/measures.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace varbound::testing {

// Random sampled functions: smooth, kinked and noisy shapes on random grids.
inline SampledFunction random_function(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> count(3, 200);
    const int n = count(rng);
    const double lo = -1.0 - 2.0 * std::abs(U(rng)), hi = 1.0 + 2.0 * std::abs(U(rng));
    const double a = U(rng), b = U(rng), c = U(rng), d = U(rng);
    const int shape = static_cast<int>(rng() % 3);
    return SampledFunction::sample(
        [&](double z) {
            switch (shape) {
                case 0: return a * z * z * z * z + b * z * z * z + c * z * z + d * z;
                case 1: return std::abs(z - a) * 2.0 * b + std::abs(z + c) + d * std::sin(3.0 * z);
                default: return 0.3 * U(rng) + c * z;
            }
        },
        lo, hi, n);
}

// Continuous piecewise polynomial on a tensor grid: multilinear interpolation of
// random nodal values plus a random multiple of each cell's bubble function.
inline PiecewiseFunction<Surd> random_piecewise(VarLayout L, const BasicBox<Surd>& box, int cells, std::mt19937& rng) {
    std::uniform_int_distribution<int> num(-6, 6);
    std::uniform_int_distribution<int> cut(1, 3);
    PiecewiseFunction<Surd> u;
    for (int i = 0; i < L.n; ++i) {
        // Strictly increasing rational breakpoints.
        std::vector<Surd> b{box.lo[i]};
        std::vector<int> gaps;
        int total = 0;
        for (int c = 0; c < cells; ++c) {
            gaps.push_back(cut(rng));
            total += gaps.back();
        }
        Surd acc = box.lo[i];
        for (int c = 0; c < cells; ++c) {
            acc += (box.hi[i] - box.lo[i]) * Surd(mpq_class(gaps[c], total));
            b.push_back(acc);
        }
        b.back() = box.hi[i];
        u.breaks.push_back(b);
    }
    const auto counts = u.cells_per_axis();
    // Nodal values per component on the (cells+1)^n vertex grid.
    int vertices = 1;
    for (int c : counts) vertices *= c + 1;
    std::vector<std::vector<Surd>> nodal(L.m, std::vector<Surd>(vertices));
    for (auto& comp : nodal) {
        for (auto& v : comp) v = Surd(mpq_class(num(rng), 3));
    }
    auto vertex_index = [&](const std::vector<int>& v) {
        int f = 0;
        for (std::size_t a = 0; a < counts.size(); ++a) f = f * (counts[a] + 1) + v[a];
        return f;
    };
    for (int c = 0; c < u.cell_count(); ++c) {
        std::vector<int> idx(L.n);
        int rem = c;
        for (int a = L.n - 1; a >= 0; --a) {
            idx[a] = rem % counts[a];
            rem /= counts[a];
        }
        ExactPolyVector cell = ExactPolyVector::zero(L, L.m);
        ExactPolynomial bubble = ExactPolynomial::constant(L, Surd(1));
        for (int a = 0; a < L.n; ++a) {
            auto xa = ExactPolynomial::variable(L, VarId::x(a));
            bubble = bubble * (xa - ExactPolynomial::constant(L, u.breaks[a][idx[a]])) *
                     (xa - ExactPolynomial::constant(L, u.breaks[a][idx[a] + 1]));
        }
        for (int corner = 0; corner < (1 << L.n); ++corner) {
            ExactPolynomial shape = ExactPolynomial::constant(L, Surd(1));
            std::vector<int> v(L.n);
            for (int a = 0; a < L.n; ++a) {
                const bool up = (corner >> a) & 1;
                v[a] = idx[a] + (up ? 1 : 0);
                const Surd lo = u.breaks[a][idx[a]];
                const Surd hi = u.breaks[a][idx[a] + 1];
                auto xa = ExactPolynomial::variable(L, VarId::x(a));
                auto lin = up ? (xa - ExactPolynomial::constant(L, lo)) : (ExactPolynomial::constant(L, hi) - xa);
                shape = shape * lin * (Surd(1) / (hi - lo));
            }
            for (int j = 0; j < L.m; ++j) cell[j] += shape * nodal[j][vertex_index(v)];
        }
        for (int j = 0; j < L.m; ++j) cell[j] += bubble * Surd(num(rng));
        u.cells.push_back(cell);
    }
    return u;
}

}  // namespace varbound::testing
