#include "varbound/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace varbound {

namespace {
constexpr int kPrimes[32] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43,  47,  53,
                             59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

double radical_inverse(std::uint64_t i, int base) {
    double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}
}  // namespace

HaltonSequence::HaltonSequence(int dim, std::uint64_t skip) : dim_(dim), index_(skip) {
    if (dim < 0 || dim > 32) throw std::invalid_argument("Halton dimension must be in [0, 32]");
}

std::vector<double> HaltonSequence::next() {
    std::vector<double> p(dim_);
    for (int d = 0; d < dim_; ++d) p[d] = radical_inverse(index_, kPrimes[d]);
    ++index_;
    return p;
}

GaussRule gauss_legendre(int npoints) {
    if (npoints < 1) throw std::invalid_argument("Gauss rule needs at least one point");
    GaussRule rule;
    rule.nodes.resize(npoints);
    rule.weights.resize(npoints);
    // Newton iteration on P_n from the Chebyshev initial guesses.
    for (int i = 0; i < npoints; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (npoints + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= npoints; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (npoints == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = npoints * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[npoints - 1 - i] = x;
        rule.weights[npoints - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw std::invalid_argument("linspace needs count >= 1");
    if (count == 1) return {0.5 * (lo + hi)};
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * i / (count - 1);
    v.back() = hi;
    return v;
}

}  // namespace varbound
