#include "calibra/quadrature.hpp"

#include <cmath>

namespace calibra {

namespace {

} // namespace

// Leaves carry tensor Gauss-2 nodes so the smooth part converges at fourth
// order; weights stay positive and sum exactly to the cell measure.
void emit_gauss_nodes(const QuadCell& c, std::vector<QuadNode>& out) {
    static const Scalar q = 0.5 / std::sqrt(3.0); // Gauss offset on [-1/2, 1/2]
    switch (c.chart) {
        case QuadCell::Chart::Interval: {
            const Scalar m = 0.5 * (c.lo.x() + c.hi.x());
            const Scalar w = c.hi.x() - c.lo.x();
            out.push_back({Vec2(m - q * w, 0), 0.5 * w});
            out.push_back({Vec2(m + q * w, 0), 0.5 * w});
            break;
        }
        case QuadCell::Chart::Rect: {
            const Vec2 m = 0.5 * (c.lo + c.hi);
            const Vec2 w = c.hi - c.lo;
            for (int i : {-1, 1})
                for (int j : {-1, 1})
                    out.push_back({m + Vec2(i * q * w.x(), j * q * w.y()),
                                   0.25 * w.x() * w.y()});
            break;
        }
        case QuadCell::Chart::Polar: {
            // Gauss in the (rho, theta) chart with the exact rho Jacobian
            const Vec2 m = 0.5 * (c.lo + c.hi);
            const Vec2 w = c.hi - c.lo;
            for (int i : {-1, 1})
                for (int j : {-1, 1}) {
                    const Scalar rho = m.x() + i * q * w.x();
                    const Scalar th = m.y() + j * q * w.y();
                    out.push_back({c.v0 + rho * Vec2(std::cos(th), std::sin(th)),
                                   0.25 * w.x() * w.y() * rho});
                }
            break;
        }
        case QuadCell::Chart::Triangle:
            out.push_back({cell_center(c), cell_weight(c)});
            break;
    }
}

namespace {

void refine(const QuadCell& cell, int depth, const Classifier& classify,
            std::vector<QuadNode>& out) {
    bool uniform = true;
    if (depth > 0) {
        const auto probes = cell_probes(cell);
        const std::int64_t id0 = classify(probes.front());
        for (size_t i = 1; i < probes.size() && uniform; ++i)
            uniform = classify(probes[i]) == id0;
    }
    if (uniform || depth <= 0) {
        emit_gauss_nodes(cell, out);
        return;
    }
    for (const auto& child : split_cell(cell)) refine(child, depth - 1, classify, out);
}

void refine_custom(const QuadCell& cell, int depth,
                   const std::function<bool(const QuadCell&)>& needs_split,
                   std::vector<QuadNode>& out) {
    if (depth <= 0 || !needs_split(cell)) {
        emit_gauss_nodes(cell, out);
        return;
    }
    for (const auto& child : split_cell(cell))
        refine_custom(child, depth - 1, needs_split, out);
}

} // namespace

std::vector<QuadNode> adaptive_nodes_custom(
    const Domain& domain, int resolution, int max_depth,
    const std::function<bool(const QuadCell&)>& needs_split) {
    std::vector<QuadNode> nodes;
    for (const auto& cell : domain.base_cells(resolution))
        refine_custom(cell, max_depth, needs_split, nodes);
    return nodes;
}

std::vector<QuadNode> adaptive_nodes(const Domain& domain, int resolution, int max_depth,
                                     const Classifier& classify) {
    std::vector<QuadNode> nodes;
    for (const auto& cell : domain.base_cells(resolution))
        refine(cell, classify ? max_depth : 0, classify, nodes);
    return nodes;
}

} // namespace calibra
