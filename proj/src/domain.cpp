#include "calibra/domain.hpp"

#include <algorithm>
#include <cmath>

namespace calibra {

Domain Domain::interval(Scalar a0, Scalar a1) {
    if (!(a0 < a1)) throw std::invalid_argument("interval: need a0 < a1");
    Domain d;
    d.dim_ = 1;
    d.shape_ = Shape::Interval;
    d.lo_ = Vec2(a0, 0);
    d.hi_ = Vec2(a1, 0);
    return d;
}

Domain Domain::rectangle(const Vec2& lo, const Vec2& hi) {
    if (!(lo.x() < hi.x() && lo.y() < hi.y()))
        throw std::invalid_argument("rectangle: need lo < hi componentwise");
    Domain d;
    d.dim_ = 2;
    d.shape_ = Shape::Rectangle;
    d.lo_ = lo;
    d.hi_ = hi;
    return d;
}

Domain Domain::disk(const Vec2& center, Scalar radius) {
    if (!(radius > 0)) throw std::invalid_argument("disk: radius must be positive");
    Domain d;
    d.dim_ = 2;
    d.shape_ = Shape::Disk;
    d.center_ = center;
    d.radius_ = radius;
    d.lo_ = center - Vec2(radius, radius);
    d.hi_ = center + Vec2(radius, radius);
    return d;
}

Domain Domain::polygon(std::vector<Vec2> vertices) {
    if (vertices.size() < 3) throw std::invalid_argument("polygon: need >= 3 vertices");
    Domain d;
    d.dim_ = 2;
    d.shape_ = Shape::Polygon;
    d.verts_ = std::move(vertices);
    d.lo_ = d.verts_[0];
    d.hi_ = d.verts_[0];
    for (const auto& v : d.verts_) {
        d.lo_ = d.lo_.cwiseMin(v);
        d.hi_ = d.hi_.cwiseMax(v);
    }
    return d;
}

Scalar Domain::measure() const {
    switch (shape_) {
        case Shape::Interval: return hi_.x() - lo_.x();
        case Shape::Rectangle: return (hi_ - lo_).prod();
        case Shape::Disk: return kPi * radius_ * radius_;
        case Shape::Polygon: {
            Scalar twice = 0;
            const int n = static_cast<int>(verts_.size());
            for (int i = 0; i < n; ++i) {
                const Vec2& p = verts_[i];
                const Vec2& q = verts_[(i + 1) % n];
                twice += p.x() * q.y() - q.x() * p.y();
            }
            return 0.5 * std::abs(twice);
        }
    }
    return 0;
}

Scalar Domain::diameter() const {
    switch (shape_) {
        case Shape::Interval: return hi_.x() - lo_.x();
        case Shape::Rectangle: return (hi_ - lo_).norm();
        case Shape::Disk: return 2 * radius_;
        case Shape::Polygon: {
            Scalar best = 0;
            for (size_t i = 0; i < verts_.size(); ++i)
                for (size_t j = i + 1; j < verts_.size(); ++j)
                    best = std::max(best, (verts_[i] - verts_[j]).norm());
            return best;
        }
    }
    return 0;
}

bool Domain::contains(const Vec2& x, Scalar tol) const {
    switch (shape_) {
        case Shape::Interval:
            return x.x() > lo_.x() - tol && x.x() < hi_.x() + tol;
        case Shape::Rectangle:
            return x.x() > lo_.x() - tol && x.x() < hi_.x() + tol &&
                   x.y() > lo_.y() - tol && x.y() < hi_.y() + tol;
        case Shape::Disk:
            return (x - center_).norm() < radius_ + tol;
        case Shape::Polygon: {
            const int n = static_cast<int>(verts_.size());
            for (int i = 0; i < n; ++i) {
                const Vec2& p = verts_[i];
                const Vec2& q = verts_[(i + 1) % n];
                const Vec2 e = q - p;
                const Scalar cross = e.x() * (x.y() - p.y()) - e.y() * (x.x() - p.x());
                if (cross < -tol * e.norm()) return false;
            }
            return true;
        }
    }
    return false;
}

Vec2 cell_center(const QuadCell& c) {
    switch (c.chart) {
        case QuadCell::Chart::Interval:
            return Vec2(0.5 * (c.lo.x() + c.hi.x()), 0);
        case QuadCell::Chart::Rect:
            return 0.5 * (c.lo + c.hi);
        case QuadCell::Chart::Polar: {
            const Scalar rho = 0.5 * (c.lo.x() + c.hi.x());
            const Scalar th = 0.5 * (c.lo.y() + c.hi.y());
            // v0 carries the disk center for polar cells
            return c.v0 + rho * Vec2(std::cos(th), std::sin(th));
        }
        case QuadCell::Chart::Triangle:
            return (c.v0 + c.v1 + c.v2) / 3.0;
    }
    return Vec2::Zero();
}

Scalar cell_weight(const QuadCell& c) {
    switch (c.chart) {
        case QuadCell::Chart::Interval:
            return c.hi.x() - c.lo.x();
        case QuadCell::Chart::Rect:
            return (c.hi - c.lo).prod();
        case QuadCell::Chart::Polar: {
            const Scalar rho = 0.5 * (c.lo.x() + c.hi.x());
            return rho * (c.hi.x() - c.lo.x()) * (c.hi.y() - c.lo.y());
        }
        case QuadCell::Chart::Triangle: {
            const Vec2 e1 = c.v1 - c.v0, e2 = c.v2 - c.v0;
            return 0.5 * std::abs(e1.x() * e2.y() - e1.y() * e2.x());
        }
    }
    return 0;
}

std::vector<QuadCell> split_cell(const QuadCell& c) {
    std::vector<QuadCell> out;
    switch (c.chart) {
        case QuadCell::Chart::Interval: {
            const Scalar m = 0.5 * (c.lo.x() + c.hi.x());
            QuadCell a = c, b = c;
            a.hi.x() = m;
            b.lo.x() = m;
            out = {a, b};
            break;
        }
        case QuadCell::Chart::Rect:
        case QuadCell::Chart::Polar: {
            const Vec2 m = 0.5 * (c.lo + c.hi);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    QuadCell k = c;
                    k.lo = Vec2(i ? m.x() : c.lo.x(), j ? m.y() : c.lo.y());
                    k.hi = Vec2(i ? c.hi.x() : m.x(), j ? c.hi.y() : m.y());
                    out.push_back(k);
                }
            break;
        }
        case QuadCell::Chart::Triangle: {
            const Vec2 m01 = 0.5 * (c.v0 + c.v1);
            const Vec2 m12 = 0.5 * (c.v1 + c.v2);
            const Vec2 m20 = 0.5 * (c.v2 + c.v0);
            auto tri = [&](Vec2 a, Vec2 b, Vec2 cc) {
                QuadCell k = c;
                k.v0 = a; k.v1 = b; k.v2 = cc;
                return k;
            };
            out = {tri(c.v0, m01, m20), tri(m01, c.v1, m12),
                   tri(m20, m12, c.v2), tri(m01, m12, m20)};
            break;
        }
    }
    return out;
}

std::vector<Vec2> cell_probes(const QuadCell& c) {
    std::vector<Vec2> out;
    out.push_back(cell_center(c));
    switch (c.chart) {
        case QuadCell::Chart::Interval:
            out.push_back(Vec2(c.lo.x(), 0));
            out.push_back(Vec2(c.hi.x(), 0));
            break;
        case QuadCell::Chart::Rect:
            out.push_back(c.lo);
            out.push_back(c.hi);
            out.push_back(Vec2(c.lo.x(), c.hi.y()));
            out.push_back(Vec2(c.hi.x(), c.lo.y()));
            break;
        case QuadCell::Chart::Polar: {
            for (Scalar rho : {c.lo.x(), c.hi.x()})
                for (Scalar th : {c.lo.y(), c.hi.y()})
                    out.push_back(c.v0 + rho * Vec2(std::cos(th), std::sin(th)));
            break;
        }
        case QuadCell::Chart::Triangle:
            out.push_back(c.v0);
            out.push_back(c.v1);
            out.push_back(c.v2);
            break;
    }
    return out;
}

std::vector<QuadCell> Domain::base_cells(int resolution) const {
    const int n = std::max(1, resolution);
    std::vector<QuadCell> cells;
    switch (shape_) {
        case Shape::Interval: {
            const Scalar h = (hi_.x() - lo_.x()) / n;
            for (int i = 0; i < n; ++i) {
                QuadCell c;
                c.chart = QuadCell::Chart::Interval;
                c.lo = Vec2(lo_.x() + i * h, 0);
                c.hi = Vec2(lo_.x() + (i + 1) * h, 0);
                cells.push_back(c);
            }
            break;
        }
        case Shape::Rectangle: {
            const Vec2 h = (hi_ - lo_) / n;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    QuadCell c;
                    c.chart = QuadCell::Chart::Rect;
                    c.lo = lo_ + Vec2(i * h.x(), j * h.y());
                    c.hi = lo_ + Vec2((i + 1) * h.x(), (j + 1) * h.y());
                    cells.push_back(c);
                }
            break;
        }
        case Shape::Disk: {
            const int nr = std::max(2, n / 2);
            const int nt = n;
            const Scalar dr = radius_ / nr;
            const Scalar dt = 2 * kPi / nt;
            for (int i = 0; i < nr; ++i)
                for (int j = 0; j < nt; ++j) {
                    QuadCell c;
                    c.chart = QuadCell::Chart::Polar;
                    c.v0 = center_;
                    c.lo = Vec2(i * dr, j * dt);
                    c.hi = Vec2((i + 1) * dr, (j + 1) * dt);
                    cells.push_back(c);
                }
            break;
        }
        case Shape::Polygon: {
            Vec2 centroid = Vec2::Zero();
            for (const auto& v : verts_) centroid += v;
            centroid /= static_cast<Scalar>(verts_.size());
            const int m = static_cast<int>(verts_.size());
            // uniform refinement of each fan triangle
            const int k = std::max(1, n / 8);
            for (int e = 0; e < m; ++e) {
                const Vec2 A = centroid, B = verts_[e], C = verts_[(e + 1) % m];
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j + i < k; ++j) {
                        auto pt = [&](int ii, int jj) {
                            const Scalar u = static_cast<Scalar>(ii) / k;
                            const Scalar v = static_cast<Scalar>(jj) / k;
                            return A + u * (B - A) + v * (C - A);
                        };
                        QuadCell c;
                        c.chart = QuadCell::Chart::Triangle;
                        c.v0 = pt(i, j); c.v1 = pt(i + 1, j); c.v2 = pt(i, j + 1);
                        cells.push_back(c);
                        if (j + i + 1 < k) {
                            QuadCell d;
                            d.chart = QuadCell::Chart::Triangle;
                            d.v0 = pt(i + 1, j); d.v1 = pt(i + 1, j + 1); d.v2 = pt(i, j + 1);
                            cells.push_back(d);
                        }
                    }
            }
            break;
        }
    }
    return cells;
}

std::vector<QuadNode> Domain::interior_nodes(int resolution) const {
    std::vector<QuadNode> nodes;
    for (const auto& c : base_cells(resolution))
        nodes.push_back({cell_center(c), cell_weight(c)});
    return nodes;
}

std::vector<BoundaryNode> Domain::boundary_nodes(int resolution) const {
    std::vector<BoundaryNode> nodes;
    const int n = std::max(1, resolution);
    switch (shape_) {
        case Shape::Interval:
            nodes.push_back({Vec2(lo_.x(), 0), Vec2(1, 0), 1});
            nodes.push_back({Vec2(hi_.x(), 0), Vec2(-1, 0), 1});
            break;
        case Shape::Rectangle: {
            auto edge = [&](Vec2 p, Vec2 q, Vec2 normal) {
                const Scalar len = (q - p).norm();
                const Scalar h = len / n;
                for (int i = 0; i < n; ++i) {
                    const Scalar s = (i + 0.5) / n;
                    nodes.push_back({p + s * (q - p), normal, h});
                }
            };
            edge(lo_, Vec2(hi_.x(), lo_.y()), Vec2(0, 1));
            edge(Vec2(hi_.x(), lo_.y()), hi_, Vec2(-1, 0));
            edge(hi_, Vec2(lo_.x(), hi_.y()), Vec2(0, -1));
            edge(Vec2(lo_.x(), hi_.y()), lo_, Vec2(1, 0));
            break;
        }
        case Shape::Disk: {
            const Scalar h = 2 * kPi * radius_ / n;
            for (int i = 0; i < n; ++i) {
                const Scalar th = 2 * kPi * (i + 0.5) / n;
                const Vec2 dir(std::cos(th), std::sin(th));
                nodes.push_back({center_ + radius_ * dir, -dir, h});
            }
            break;
        }
        case Shape::Polygon: {
            const int m = static_cast<int>(verts_.size());
            for (int e = 0; e < m; ++e) {
                const Vec2 p = verts_[e], q = verts_[(e + 1) % m];
                const Vec2 tan = (q - p).normalized();
                const Vec2 normal(-tan.y(), tan.x()); // inward for ccw order
                const Scalar h = (q - p).norm() / n;
                for (int i = 0; i < n; ++i) {
                    const Scalar s = (i + 0.5) / n;
                    nodes.push_back({p + s * (q - p), normal, h});
                }
            }
            break;
        }
    }
    return nodes;
}

Vec2 Domain::inward_normal(const Vec2& x) const {
    switch (shape_) {
        case Shape::Interval:
            return (std::abs(x.x() - lo_.x()) < std::abs(x.x() - hi_.x()))
                       ? Vec2(1, 0)
                       : Vec2(-1, 0);
        case Shape::Rectangle: {
            const Scalar dl = x.x() - lo_.x(), dr = hi_.x() - x.x();
            const Scalar db = x.y() - lo_.y(), dt = hi_.y() - x.y();
            const Scalar m = std::min({dl, dr, db, dt});
            if (m == dl) return Vec2(1, 0);
            if (m == dr) return Vec2(-1, 0);
            if (m == db) return Vec2(0, 1);
            return Vec2(0, -1);
        }
        case Shape::Disk:
            return (center_ - x).normalized();
        case Shape::Polygon: {
            const int m = static_cast<int>(verts_.size());
            Scalar best = std::numeric_limits<Scalar>::max();
            Vec2 normal = Vec2::Zero();
            for (int e = 0; e < m; ++e) {
                const Vec2 p = verts_[e], q = verts_[(e + 1) % m];
                const Vec2 tan = (q - p).normalized();
                const Scalar s = std::clamp((x - p).dot(tan), Scalar(0), (q - p).norm());
                const Scalar d = (x - (p + s * tan)).norm();
                if (d < best) {
                    best = d;
                    normal = Vec2(-tan.y(), tan.x());
                }
            }
            return normal;
        }
    }
    return Vec2::Zero();
}

} // namespace calibra
