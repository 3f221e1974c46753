#include "vemstokes/polybasis.hpp"

#include "vemstokes/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>

namespace vemstokes {

ScaledMonomials::ScaledMonomials(const Point& center, double diameter, int degree)
    : center_(center), diameter_(diameter), degree_(degree)
{
    for (int d = 0; d <= degree; ++d)
        for (int py = 0; py <= d; ++py) exponents_.push_back({d - py, py});
}

int ScaledMonomials::index(int px, int py) const
{
    const int d = px + py;
    if (px < 0 || py < 0 || d > degree_) return -1;
    return dimension(d - 1) + py;
}

Eigen::VectorXd ScaledMonomials::evaluate(const Point& x) const
{
    const double sx = (x.x() - center_.x()) / diameter_;
    const double sy = (x.y() - center_.y()) / diameter_;
    Eigen::VectorXd v(size());
    for (int a = 0; a < size(); ++a) {
        const auto [px, py] = exponents_[static_cast<std::size_t>(a)];
        v(a) = std::pow(sx, px) * std::pow(sy, py);
    }
    return v;
}

Eigen::MatrixX2d ScaledMonomials::gradient(const Point& x) const
{
    const double sx = (x.x() - center_.x()) / diameter_;
    const double sy = (x.y() - center_.y()) / diameter_;
    Eigen::MatrixX2d g(size(), 2);
    for (int a = 0; a < size(); ++a) {
        const auto [px, py] = exponents_[static_cast<std::size_t>(a)];
        g(a, 0) = px == 0 ? 0.0 : px * std::pow(sx, px - 1) * std::pow(sy, py) / diameter_;
        g(a, 1) = py == 0 ? 0.0 : py * std::pow(sx, px) * std::pow(sy, py - 1) / diameter_;
    }
    return g;
}

Eigen::MatrixXd ScaledMonomials::derivative(int axis, int target_degree) const
{
    const ScaledMonomials target(center_, diameter_, target_degree);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(target.size(), size());
    for (int a = 0; a < size(); ++a) {
        const auto [px, py] = exponents_[static_cast<std::size_t>(a)];
        const int p = axis == 0 ? px : py;
        if (p == 0) continue;
        const int row = axis == 0 ? target.index(px - 1, py) : target.index(px, py - 1);
        if (row < 0) throw std::logic_error("derivative target degree too small");
        d(row, a) = p / diameter_;
    }
    return d;
}

Eigen::MatrixXd mass_matrix(const ScaledMonomials& rows, const ScaledMonomials& cols, const QuadratureRule& rule)
{
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows.size(), cols.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Eigen::VectorXd r = rows.evaluate(rule.points[q]);
        const Eigen::VectorXd c = cols.evaluate(rule.points[q]);
        m.noalias() += rule.weights[q] * r * c.transpose();
    }
    return m;
}

Eigen::MatrixXd mass_matrix(const ScaledMonomials& basis, const QuadratureRule& rule)
{
    Eigen::MatrixXd m = mass_matrix(basis, basis, rule);
    return 0.5 * (m + m.transpose());
}

int grad_part_dimension(int k)
{
    return ScaledMonomials::dimension(k + 1) - 1;
}

int complement_dimension(int k)
{
    return 2 * ScaledMonomials::dimension(k) - grad_part_dimension(k);
}

GradDecomposition build_grad_decomposition(const ScaledMonomials& pk1, const QuadratureRule& rule, double area, int k)
{
    if (k < 0) throw std::invalid_argument("polynomial degree must be non-negative");
    if (pk1.degree() != k + 1) throw std::invalid_argument("grad decomposition needs the degree k+1 basis");

    const ScaledMonomials pk(pk1.center(), pk1.diameter(), k);
    const int nk = pk.size();
    const int n = 2 * nk;

    GradDecomposition out;
    out.k = k;
    out.area = area;
    const Eigen::MatrixXd mk = mass_matrix(pk, rule);
    out.vector_mass = Eigen::MatrixXd::Zero(n, n);
    out.vector_mass.topLeftCorner(nk, nk) = mk;
    out.vector_mass.bottomRightCorner(nk, nk) = mk;

    // grad m_b for b != 0, expressed in the P_k vector basis.
    const Eigen::MatrixXd dx = pk1.derivative(0, k);
    const Eigen::MatrixXd dy = pk1.derivative(1, k);
    const int ng = pk1.size() - 1;
    out.grad_basis.resize(n, ng);
    out.grad_basis.topRows(nk) = dx.rightCols(ng);
    out.grad_basis.bottomRows(nk) = dy.rightCols(ng);

    // Complement: null space of G^T M, orthonormalised in (1/|E|) L2(E).
    const Eigen::MatrixXd mg = out.vector_mass * out.grad_basis;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(mg);
    if (qr.rank() != ng) throw MeshError("rank-deficient gradient basis (degenerate cell)");
    const int np = n - ng;
    if (np > 0) {
        Eigen::HouseholderQR<Eigen::MatrixXd> hqr(mg);
        const Eigen::MatrixXd q = hqr.householderQ() * Eigen::MatrixXd::Identity(n, n);
        const Eigen::MatrixXd r = q.rightCols(np);
        const Eigen::MatrixXd gram = r.transpose() * out.vector_mass * r / area;
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) throw MeshError("complement space orthogonalization failed (degenerate cell)");
        out.complement_basis = llt.matrixU().solve<Eigen::OnTheRight>(r);
    } else {
        out.complement_basis.resize(n, 0);
    }

    Eigen::MatrixXd full(n, n);
    full << out.grad_basis, out.complement_basis;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(full);
    if (!lu.isInvertible()) throw MeshError("P_k^2 splitting is singular (degenerate cell)");
    out.split = lu.inverse();
    return out;
}

GradDecomposition build_grad_decomposition(const PolygonalMesh& mesh, int cell, int k)
{
    const ScaledMonomials pk1(mesh.cell_centroid(cell), mesh.cell_diameter(cell), k + 1);
    const QuadratureRule rule = polygon_quadrature(mesh, cell, 2 * k + 2);
    return build_grad_decomposition(pk1, rule, mesh.cell_area(cell), k);
}

} // namespace vemstokes
