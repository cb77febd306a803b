#pragma once

#include <cstdint>
#include <vector>

namespace varbound {

/// Halton low-discrepancy sequence in [0,1)^dim (dim <= 32).
class HaltonSequence {
public:
    explicit HaltonSequence(int dim, std::uint64_t skip = 1);
    std::vector<double> next();
    int dim() const { return dim_; }

private:
    int dim_;
    std::uint64_t index_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule gauss_legendre(int npoints);

/// `count` equally spaced points on [lo, hi] (count >= 2), or the midpoint.
std::vector<double> linspace(double lo, double hi, int count);

}  // namespace varbound
