#pragma once

#include "support.hpp"

#include "vemstokes/quadrature.hpp"

#include <Eigen/Cholesky>

namespace vstest {

double integrate(const QuadratureRule& q, auto&& f)
{
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * f(q.points[i]);
    return s;
}

inline VemParams params_k(int k)
{
    VemParams p;
    p.k = k;
    return p;
}

/// L2(E) projection onto P_k tensors, straight from quadrature.
inline Eigen::VectorXd l2_projection(const LocalSpace& space, const TensorField& f)
{
    const ScaledMonomials& pk = space.pk();
    const int nk = pk.size();
    const QuadratureRule q = polygon_quadrature(space.polygon(), space.centroid(), 2 * space.params().k + 10);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nk, nk);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nk, 4);
    for (std::size_t i = 0; i < q.size(); ++i) {
        const Eigen::VectorXd v = pk.evaluate(q.points[i]);
        const Tensor t = f(q.points[i]);
        m += q.weights[i] * v * v.transpose();
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) rhs.col(2 * r + c) += q.weights[i] * t(r, c) * v;
    }
    const Eigen::MatrixXd sol = m.ldlt().solve(rhs);
    Eigen::VectorXd out(4 * nk);
    for (int j = 0; j < 4; ++j) out.segment(j * nk, nk) = sol.col(j);
    return out;
}

/// P_k coefficients (row 0 then row 1) of the projection of a vector field.
inline Eigen::VectorXd l2_projection_vector(const LocalSpace& space, const VectorField& f, int degree)
{
    const int nk = space.pk().size();
    const QuadratureRule q = polygon_quadrature(space.polygon(), space.centroid(), degree);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nk, nk);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nk, 2);
    for (std::size_t i = 0; i < q.size(); ++i) {
        const Eigen::VectorXd v = space.pk().evaluate(q.points[i]);
        const Eigen::Vector2d fv = f(q.points[i]);
        m += q.weights[i] * v * v.transpose();
        rhs.col(0) += q.weights[i] * fv(0) * v;
        rhs.col(1) += q.weights[i] * fv(1) * v;
    }
    const Eigen::MatrixXd sol = m.ldlt().solve(rhs);
    Eigen::VectorXd out(2 * nk);
    out << sol.col(0), sol.col(1);
    return out;
}

/// int_E rho^D : tau^D over the P_k tensor monomial basis.
inline Eigen::MatrixXd exact_deviatoric_gram(const LocalSpace& s)
{
    const int nk = s.pk().size();
    const QuadratureRule q = polygon_quadrature(s.polygon(), s.centroid(), 2 * s.params().k + 2);
    Eigen::MatrixXd exact = Eigen::MatrixXd::Zero(4 * nk, 4 * nk);
    for (std::size_t i = 0; i < q.size(); ++i) {
        const Eigen::VectorXd m = s.pk().evaluate(q.points[i]);
        for (int a = 0; a < 4 * nk; ++a)
            for (int b = 0; b < 4 * nk; ++b) {
                Tensor ta = Tensor::Zero(), tb = Tensor::Zero();
                ta((a / nk) / 2, (a / nk) % 2) = m(a % nk);
                tb((b / nk) / 2, (b / nk) % 2) = m(b % nk);
                exact(a, b) += q.weights[i] * deviatoric(ta).cwiseProduct(deviatoric(tb)).sum();
            }
    }
    return exact;
}

/// A few cells of every generated family plus two regular polygons.
inline std::vector<std::pair<PolygonalMesh, int>> sample_cells()
{
    std::vector<std::pair<PolygonalMesh, int>> out;
    for (MeshFamily f : all_families) {
        const PolygonalMesh mesh = generate_mesh(f, 3, DomainTag::UnitSquare, 21);
        for (int c : {0, static_cast<int>(mesh.num_cells()) / 2, static_cast<int>(mesh.num_cells()) - 1})
            out.emplace_back(mesh, c);
    }
    out.emplace_back(regular_polygon(6, 0.3, 0.1), 0);
    out.emplace_back(regular_polygon(9, 0.2, 0.0), 0);
    return out;
}

} // namespace vstest
