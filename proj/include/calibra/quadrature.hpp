#ifndef CALIBRA_QUADRATURE_HPP
#define CALIBRA_QUADRATURE_HPP

#include "calibra/domain.hpp"

#include <cstdint>

namespace calibra {

// Region classifier for adaptive refinement: returns an id that changes
// whenever the integrand crosses a declared piece boundary.
using Classifier = std::function<std::int64_t(const Vec2&)>;

/// Midpoint nodes refined where `classify` changes across a cell. Cells whose
/// probe points all agree are kept; others are split up to `max_depth` times.
/// Node order is deterministic, so fixed-order summation is reproducible.
std::vector<QuadNode> adaptive_nodes(const Domain& domain, int resolution, int max_depth,
                                     const Classifier& classify);

// Leaf emission shared by the adaptive integrators (tensor Gauss-2 nodes).
void emit_gauss_nodes(const QuadCell& cell, std::vector<QuadNode>& out);

// Custom split predicate variant: `needs_split(cell)` decides refinement.
std::vector<QuadNode> adaptive_nodes_custom(
    const Domain& domain, int resolution, int max_depth,
    const std::function<bool(const QuadCell&)>& needs_split);

inline Scalar integrate(const std::vector<QuadNode>& nodes, const ScalarFn& f) {
    Scalar acc = 0;
    for (const auto& n : nodes) acc += n.w * f(n.x);
    return acc;
}

} // namespace calibra

#endif
