#pragma once

#include <vector>

namespace fharm {

// Gauss-Legendre nodes/weights on [-1,1]; cached per order.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int n);

} // namespace fharm
