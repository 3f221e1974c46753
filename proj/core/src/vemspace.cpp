#include "vemstokes/vemspace.hpp"

#include "vemstokes/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>

namespace vemstokes {

void VemParams::validate() const
{
    if (k < 0) throw ConfigError("polynomial degree k must be >= 0 (got " + std::to_string(k) + ")");
    if (!(stab_scale > 0.0)) throw ConfigError("stab_scale must be positive");
}

namespace {

double condition_estimate(const Eigen::MatrixXd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

Eigen::MatrixXd blockdiag2(const Eigen::MatrixXd& m)
{
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * m.rows(), 2 * m.cols());
    out.topLeftCorner(m.rows(), m.cols()) = m;
    out.bottomRightCorner(m.rows(), m.cols()) = m;
    return out;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m)
{
    return 0.5 * (m + m.transpose());
}

// Functionals v -> int_E v . grad m_b for the non-constant degree-(k+1)
// monomials, via  -int_E m_b div v + int_dE v.n m_b.
Eigen::MatrixXd grad_moment_functionals(const LocalSpace& space, const Eigen::MatrixXd& div_row)
{
    const Eigen::MatrixXd mk1k = mass_matrix(space.pk1(), space.pk(), space.quadrature());
    const Eigen::MatrixXd bnd = space.boundary_functionals(space.pk1());
    const Eigen::MatrixXd full = -mk1k * div_row + bnd;
    return full.bottomRows(full.rows() - 1);
}

} // namespace

LocalSpace::LocalSpace(const PolygonalMesh& mesh, int cell, const VemParams& params)
    : params_(params), cell_(cell)
{
    params_.validate();
    const int k = params_.k;
    area_ = mesh.cell_area(cell);
    diameter_ = mesh.cell_diameter(cell);
    centroid_ = mesh.cell_centroid(cell);
    if (!(area_ > 0.0)) throw MeshError("cell " + std::to_string(cell) + " has non-positive area");

    for (int v : mesh.cell(cell)) polygon_.push_back(mesh.vertex(v));
    for (const CellEdge& ce : mesh.cell_edges(cell)) {
        const Edge& e = mesh.edge(ce.edge);
        LocalEdge le;
        le.a = mesh.vertex(e.v[0]);
        le.b = mesh.vertex(e.v[1]);
        le.length = e.length;
        le.midpoint = e.midpoint;
        le.tangent = e.tangent;
        le.outward = ce.sign * e.normal;
        le.sign = ce.sign;
        le.global = ce.edge;
        edges_.push_back(le);
    }

    layout_.k = k;
    layout_.num_edges = static_cast<int>(edges_.size());
    layout_.num_grad = ScaledMonomials::dimension(k) - 1;
    layout_.num_complement = complement_dimension(k);

    pk_ = ScaledMonomials(centroid_, diameter_, k);
    pk1_ = ScaledMonomials(centroid_, diameter_, k + 1);
    quad_ = polygon_quadrature(polygon_, centroid_, 2 * k + 2);
    decomp_ = build_grad_decomposition(pk1_, quad_, area_, k);
    mk_ = mass_matrix(pk_, quad_);
    mass_condition_ = condition_estimate(mk_);

    for (int l = 0; l < layout_.num_edges; ++l) {
        const LocalEdge& e = edges_[static_cast<std::size_t>(l)];
        const QuadratureRule rule = edge_quadrature(e.a, e.b, 2 * k);
        Eigen::MatrixXd me = Eigen::MatrixXd::Zero(k + 1, k + 1);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Eigen::VectorXd m = edge_monomials(l, rule.points[q]);
            me.noalias() += rule.weights[q] * m * m.transpose();
        }
        mass_condition_ = std::max(mass_condition_, condition_estimate(me));
        edge_mass_inv_.push_back(me.ldlt().solve(Eigen::MatrixXd::Identity(k + 1, k + 1)));
    }
}

Eigen::VectorXd LocalSpace::edge_monomials(int local_edge, const Point& x) const
{
    const LocalEdge& e = edges_[static_cast<std::size_t>(local_edge)];
    const double s = (x - e.midpoint).dot(e.tangent) / e.length;
    Eigen::VectorXd v(params_.k + 1);
    double p = 1.0;
    for (int j = 0; j <= params_.k; ++j) {
        v(j) = p;
        p *= s;
    }
    return v;
}

Eigen::MatrixXd LocalSpace::boundary_functionals(const ScaledMonomials& basis) const
{
    const int k = params_.k;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(basis.size(), layout_.scalar_size());
    for (int l = 0; l < layout_.num_edges; ++l) {
        const LocalEdge& e = edges_[static_cast<std::size_t>(l)];
        const QuadratureRule rule = edge_quadrature(e.a, e.b, k + basis.degree());
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k + 1, basis.size());
        for (std::size_t q = 0; q < rule.size(); ++q)
            w.noalias() += rule.weights[q] * edge_monomials(l, rule.points[q]) * basis.evaluate(rule.points[q]).transpose();
        // v.n_out = sum_j c_j q_j with c = |e| Me^{-1} dofs.
        const Eigen::MatrixXd f = e.length * (edge_mass_inv_[static_cast<std::size_t>(l)] * w);
        for (int j = 0; j <= k; ++j) out.col(layout_.edge_dof(l, j)) += f.row(j).transpose();
    }
    return out;
}

Eigen::VectorXd LocalSpace::dofs_of_vector_field(const VectorField& f, int degree) const
{
    const int k = params_.k;
    Eigen::VectorXd dofs = Eigen::VectorXd::Zero(layout_.scalar_size());
    for (int l = 0; l < layout_.num_edges; ++l) {
        const LocalEdge& e = edges_[static_cast<std::size_t>(l)];
        const QuadratureRule rule = edge_quadrature(e.a, e.b, degree);
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(k + 1);
        for (std::size_t q = 0; q < rule.size(); ++q)
            acc += rule.weights[q] * f(rule.points[q]).dot(e.outward) * edge_monomials(l, rule.points[q]);
        dofs.segment(layout_.edge_dof(l, 0), k + 1) = acc / e.length;
    }
    if (layout_.num_interior() == 0) return dofs;

    const QuadratureRule rule = degree == quad_.degree ? quad_ : polygon_quadrature(polygon_, centroid_, degree);
    const int nk = pk_.size();
    const Eigen::MatrixXd& comp = decomp_.complement_basis;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout_.num_grad);
    Eigen::VectorXd perp = Eigen::VectorXd::Zero(layout_.num_complement);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point& x = rule.points[q];
        const Eigen::Vector2d fx = f(x);
        const Eigen::MatrixX2d g = pk_.gradient(x);
        for (int a = 1; a < nk; ++a) grad(a - 1) += rule.weights[q] * fx.dot(g.row(a));
        if (layout_.num_complement > 0) {
            const Eigen::VectorXd m = pk_.evaluate(x);
            for (int j = 0; j < layout_.num_complement; ++j) {
                const double rx = comp.col(j).head(nk).dot(m);
                const double ry = comp.col(j).tail(nk).dot(m);
                perp(j) += rule.weights[q] * (fx.x() * rx + fx.y() * ry);
            }
        }
    }
    dofs.segment(layout_.grad_dof(0), layout_.num_grad) = grad / area_;
    dofs.segment(layout_.complement_dof(0), layout_.num_complement) = perp / area_;
    return dofs;
}

Eigen::VectorXd dofs_of_tensor_field(const LocalSpace& space, const TensorField& field, int degree)
{
    if (degree < 0) degree = std::max(2 * space.params().k + 6, 10);
    const int s = space.layout().scalar_size();
    Eigen::VectorXd dofs(2 * s);
    for (int r = 0; r < 2; ++r) {
        const VectorField row = [&field, r](const Point& x) -> Eigen::Vector2d {
            return field(x).row(r).transpose();
        };
        dofs.segment(r * s, s) = space.dofs_of_vector_field(row, degree);
    }
    return dofs;
}

Eigen::MatrixXd scalar_div_matrix(const LocalSpace& space)
{
    const LocalDofLayout& layout = space.layout();
    const int nk = space.pk().size();
    Eigen::MatrixXd rhs = space.boundary_functionals(space.pk());
    for (int a = 1; a < nk; ++a) rhs(a, layout.grad_dof(a - 1)) -= space.area();
    return space.scalar_mass().ldlt().solve(rhs);
}

Eigen::VectorXd div_from_dofs(const LocalSpace& space, const Eigen::VectorXd& dofs)
{
    const int s = space.layout().scalar_size();
    if (dofs.size() != 2 * s) throw std::invalid_argument("DOF vector length does not match the local layout");
    const Eigen::MatrixXd d = scalar_div_matrix(space);
    Eigen::VectorXd out(2 * d.rows());
    out.head(d.rows()) = d * dofs.head(s);
    out.tail(d.rows()) = d * dofs.tail(s);
    return out;
}

namespace {

Eigen::MatrixXd row_projector(const LocalSpace& space, const Eigen::MatrixXd& div_row)
{
    const LocalDofLayout& layout = space.layout();
    const GradDecomposition& dec = space.decomposition();
    const int ng = dec.num_grad();
    const int np = dec.num_complement();

    const Eigen::MatrixXd gm = grad_moment_functionals(space, div_row);
    Eigen::MatrixXd moments = dec.split.topRows(ng).transpose() * gm;
    for (int j = 0; j < np; ++j)
        moments.col(layout.complement_dof(j)) += space.area() * dec.split.row(ng + j).transpose();
    return dec.vector_mass.ldlt().solve(moments);
}

} // namespace

Eigen::MatrixXd build_projector(const LocalSpace& space)
{
    return blockdiag2(row_projector(space, scalar_div_matrix(space)));
}

Eigen::MatrixXd polynomial_dofs(const LocalSpace& space)
{
    const int nk = space.pk().size();
    const int s = space.layout().scalar_size();
    const int degree = 2 * space.params().k + 2;
    const ScaledMonomials& pk = space.pk();
    Eigen::MatrixXd row_block(s, 2 * nk);
    for (int c = 0; c < 2; ++c)
        for (int a = 0; a < nk; ++a) {
            const VectorField f = [&pk, a, c](const Point& x) -> Eigen::Vector2d {
                Eigen::Vector2d v = Eigen::Vector2d::Zero();
                v(c) = pk.evaluate(x)(a);
                return v;
            };
            row_block.col(c * nk + a) = space.dofs_of_vector_field(f, degree);
        }
    return blockdiag2(row_block);
}

Eigen::MatrixXd tensor_mass_matrix(const LocalSpace& space)
{
    return blockdiag2(space.decomposition().vector_mass);
}

Eigen::MatrixXd deviatoric_mass_matrix(const LocalSpace& space)
{
    const Eigen::MatrixXd& mk = space.scalar_mass();
    const int nk = static_cast<int>(mk.rows());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(4 * nk, 4 * nk);
    // (E_rc)^D : (E_st)^D = d_rs d_ct - d_rc d_st / 2
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            for (int s = 0; s < 2; ++s)
                for (int t = 0; t < 2; ++t) {
                    const double w = (r == s && c == t ? 1.0 : 0.0) - (r == c && s == t ? 0.5 : 0.0);
                    if (w == 0.0) continue;
                    out.block((2 * r + c) * nk, (2 * s + t) * nk, nk, nk) = w * mk;
                }
    return out;
}

LocalElementOperators build_local_operators(const LocalSpace& space)
{
    const LocalDofLayout& layout = space.layout();
    const int n = layout.tensor_size();

    LocalElementOperators ops;
    const Eigen::MatrixXd div_row = scalar_div_matrix(space);
    ops.div_coeff = blockdiag2(div_row);
    ops.divdiv = symmetrized(ops.div_coeff.transpose() * blockdiag2(space.scalar_mass()) * ops.div_coeff);

    ops.projector = blockdiag2(row_projector(space, div_row));
    ops.tensor_mass = tensor_mass_matrix(space);
    ops.consistency = symmetrized(ops.projector.transpose() * deviatoric_mass_matrix(space) * ops.projector);

    ops.poly_dofs = polynomial_dofs(space);
    const Eigen::MatrixXd slack = Eigen::MatrixXd::Identity(n, n) - ops.poly_dofs * ops.projector;
    ops.stabilization = symmetrized(space.params().stab_scale * space.area() * slack.transpose() * slack);

    // int_E tr(xi) = sum_r int_E xi_r . grad (x_r - xE_r); x_r - xE_r = h m_{e_r}.
    const Eigen::MatrixXd gm = grad_moment_functionals(space, div_row);
    const int ix = space.pk1().index(1, 0) - 1;
    const int iy = space.pk1().index(0, 1) - 1;
    const int s = layout.scalar_size();
    ops.trace = Eigen::VectorXd::Zero(n);
    ops.trace.head(s) = space.diameter() * gm.row(ix).transpose();
    ops.trace.tail(s) = space.diameter() * gm.row(iy).transpose();
    ops.mass_condition = space.mass_condition();
    return ops;
}

LocalElementOperators build_local_operators(const PolygonalMesh& mesh, int cell, const VemParams& params)
{
    return build_local_operators(LocalSpace(mesh, cell, params));
}

Tensor evaluate_tensor(const ScaledMonomials& pk, const Eigen::VectorXd& coeffs, const Point& x)
{
    const int nk = pk.size();
    const Eigen::VectorXd m = pk.evaluate(x);
    Tensor t;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) t(r, c) = coeffs.segment((2 * r + c) * nk, nk).dot(m);
    return t;
}

} // namespace vemstokes
