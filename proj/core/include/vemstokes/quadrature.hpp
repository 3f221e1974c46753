#pragma once

#include "vemstokes/mesh.hpp"

#include <Eigen/Core>

#include <span>
#include <utility>
#include <vector>

namespace vemstokes {

struct QuadratureRule {
    std::vector<Point> points;
    std::vector<double> weights;
    int degree = 0;  // polynomial exactness

    [[nodiscard]] std::size_t size() const { return points.size(); }
    [[nodiscard]] double total_weight() const;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int npoints);

/// Collapsed (Duffy) Gauss product rule on a triangle, exact to `degree`.
QuadratureRule triangle_quadrature(const Point& a, const Point& b, const Point& c, int degree);

/// Fan sub-triangulation from `center`; throws MeshError when a sub-triangle
/// has non-positive area (polygon not star-shaped w.r.t. `center`).
QuadratureRule polygon_quadrature(std::span<const Point> polygon, const Point& center, int degree);
QuadratureRule polygon_quadrature(const PolygonalMesh& mesh, int cell, int degree);

/// Gauss-Legendre on the segment [a, b]; weights carry the segment length.
QuadratureRule edge_quadrature(const Point& a, const Point& b, int degree);

} // namespace vemstokes
