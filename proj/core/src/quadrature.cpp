#include "vemstokes/quadrature.hpp"

#include "vemstokes/error.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace vemstokes {

double QuadratureRule::total_weight() const
{
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int npoints)
{
    Eigen::VectorXd x(npoints), w(npoints);
    const int half = (npoints + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (npoints + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= npoints; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = npoints * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= npoints; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = npoints * (z * p0 - p1) / (z * z - 1.0);
        x(i) = -z;
        x(npoints - 1 - i) = z;
        w(i) = w(npoints - 1 - i) = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

QuadratureRule triangle_quadrature(const Point& a, const Point& b, const Point& c, int degree)
{
    const int n = std::max(1, (degree + 3) / 2);
    const auto [x, w] = gauss_legendre(n);
    const double jac = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();

    QuadratureRule rule;
    rule.degree = degree;
    rule.points.reserve(static_cast<std::size_t>(n * n));
    rule.weights.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
        const double u = 0.5 * (x(i) + 1.0);
        for (int j = 0; j < n; ++j) {
            const double v = 0.5 * (x(j) + 1.0) * (1.0 - u);
            rule.points.push_back(a + u * (b - a) + v * (c - a));
            rule.weights.push_back(0.25 * w(i) * w(j) * (1.0 - u) * jac);
        }
    }
    return rule;
}

QuadratureRule polygon_quadrature(std::span<const Point> polygon, const Point& center, int degree)
{
    QuadratureRule rule;
    rule.degree = degree;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = polygon[i];
        const Point& q = polygon[(i + 1) % n];
        const double area2 = (p - center).x() * (q - center).y() - (p - center).y() * (q - center).x();
        if (!(area2 > 0.0))
            throw MeshError("negative sub-triangle area in centroid fan (cell not star-shaped w.r.t. its centroid)");
        QuadratureRule t = triangle_quadrature(center, p, q, degree);
        rule.points.insert(rule.points.end(), t.points.begin(), t.points.end());
        rule.weights.insert(rule.weights.end(), t.weights.begin(), t.weights.end());
    }
    return rule;
}

QuadratureRule polygon_quadrature(const PolygonalMesh& mesh, int cell, int degree)
{
    std::vector<Point> poly;
    for (int v : mesh.cell(cell)) poly.push_back(mesh.vertex(v));
    return polygon_quadrature(poly, mesh.cell_centroid(cell), degree);
}

QuadratureRule edge_quadrature(const Point& a, const Point& b, int degree)
{
    const int n = std::max(1, (degree + 2) / 2);
    const auto [x, w] = gauss_legendre(n);
    const double len = (b - a).norm();
    QuadratureRule rule;
    rule.degree = degree;
    for (int i = 0; i < n; ++i) {
        rule.points.push_back(a + 0.5 * (x(i) + 1.0) * (b - a));
        rule.weights.push_back(0.5 * w(i) * len);
    }
    return rule;
}

} // namespace vemstokes
