#pragma once

#include "vemstokes/mesh.hpp"
#include "vemstokes/vemspace.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace vstest {

using namespace vemstokes;

inline const std::vector<MeshFamily> all_families = {MeshFamily::Tri,         MeshFamily::Quad,
                                                     MeshFamily::Hex,         MeshFamily::DeformedHex,
                                                     MeshFamily::Voronoi,     MeshFamily::DeformedQuad};

inline PolygonalMesh make_mesh(std::vector<Point> xs, std::vector<std::vector<int>> cells,
                               BoundaryLabel label = BoundaryLabel::Dirichlet)
{
    PolygonalMesh raw(xs, cells, {});
    return raw.relabeled([label](const Edge&) { return label; });
}

inline PolygonalMesh unit_square_cell(BoundaryLabel label = BoundaryLabel::Dirichlet)
{
    return make_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}}, label);
}

inline PolygonalMesh two_squares()
{
    return make_mesh({{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {2, 1}}, {{0, 1, 4, 3}, {1, 2, 5, 4}});
}

inline PolygonalMesh regular_polygon(int sides, double radius, double phase = 0.0)
{
    std::vector<Point> xs;
    std::vector<int> cell;
    for (int i = 0; i < sides; ++i) {
        const double t = phase + 2.0 * M_PI * i / sides;
        xs.emplace_back(radius * std::cos(t), radius * std::sin(t));
        cell.push_back(i);
    }
    return make_mesh(xs, {cell});
}

/// Random convex polygon: sorted angles on a jittered circle.
inline std::vector<Point> random_convex_polygon(std::mt19937_64& rng, int sides)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> t;
    for (int i = 0; i < sides; ++i) t.push_back(2.0 * M_PI * (i + 0.2 + 0.6 * u(rng)) / sides);
    const Point c(u(rng) - 0.5, u(rng) - 0.5);
    const double r = 0.5 + u(rng);
    std::vector<Point> xs;
    for (double a : t) xs.push_back(c + r * Point(std::cos(a), std::sin(a)));
    return xs;
}

/// A smooth non-polynomial tensor field and its row divergence.
inline Tensor smooth_field(const Point& p)
{
    const double x = p.x(), y = p.y();
    Tensor t;
    t << std::sin(1.3 * x + 0.4) * std::cos(0.7 * y), std::exp(0.5 * x - 0.3 * y),
        x * x * y + std::cos(2.0 * y), std::sin(x * y) + 0.5 * y;
    return t;
}

inline Eigen::Vector2d smooth_field_div(const Point& p)
{
    const double x = p.x(), y = p.y();
    const double d0 = 1.3 * std::cos(1.3 * x + 0.4) * std::cos(0.7 * y) - 0.3 * std::exp(0.5 * x - 0.3 * y);
    const double d1 = 2.0 * x * y + x * std::cos(x * y) + 0.5;
    return {d0, d1};
}

/// Rows a_i + b_i (x - c): the lowest-order Raviart-Thomas fields, members of
/// every k = 0 local space.
struct Rt0Tensor {
    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    Point c = Point::Zero();

    [[nodiscard]] Tensor operator()(const Point& x) const
    {
        Tensor t = a;
        t.row(0) += b(0) * (x - c).transpose();
        t.row(1) += b(1) * (x - c).transpose();
        return t;
    }
};

inline Rt0Tensor random_rt0(std::mt19937_64& rng, const Point& c)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Rt0Tensor r;
    r.a << n(rng), n(rng), n(rng), n(rng);
    r.b << n(rng), n(rng);
    r.c = c;
    return r;
}

} // namespace vstest
