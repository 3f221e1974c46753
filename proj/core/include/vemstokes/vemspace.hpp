#pragma once

#include "vemstokes/mesh.hpp"
#include "vemstokes/polybasis.hpp"
#include "vemstokes/quadrature.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace vemstokes {

struct VemParams {
    int k = 0;
    double stab_scale = 1.0;

    /// Throws ConfigError on k < 0 or stab_scale <= 0.
    void validate() const;
};

using Tensor = Eigen::Matrix2d;
using TensorField = std::function<Tensor(const Point&)>;
using VectorField = std::function<Eigen::Vector2d(const Point&)>;

/// Per-row DOF ordering: (k+1) normal moments on each edge in cell-boundary
/// order, then dim P_k - 1 gradient moments, then the complement moments.
/// The tensor layout stacks row 1 after row 0.
struct LocalDofLayout {
    int k = 0;
    int num_edges = 0;
    int num_grad = 0;
    int num_complement = 0;

    [[nodiscard]] int moments_per_edge() const { return k + 1; }
    [[nodiscard]] int num_edge_dofs() const { return num_edges * (k + 1); }
    [[nodiscard]] int num_interior() const { return num_grad + num_complement; }
    [[nodiscard]] int scalar_size() const { return num_edge_dofs() + num_interior(); }
    [[nodiscard]] int tensor_size() const { return 2 * scalar_size(); }

    [[nodiscard]] int edge_dof(int local_edge, int moment) const { return local_edge * (k + 1) + moment; }
    [[nodiscard]] int grad_dof(int i) const { return num_edge_dofs() + i; }
    [[nodiscard]] int complement_dof(int i) const { return num_edge_dofs() + num_grad + i; }
    [[nodiscard]] int tensor_dof(int row, int scalar_dof) const { return row * scalar_size() + scalar_dof; }
};

struct LocalEdge {
    Point a = Point::Zero();  // endpoints in global edge orientation
    Point b = Point::Zero();
    double length = 0.0;
    Point midpoint = Point::Zero();
    Point tangent = Point::Zero();  // global edge tangent
    Point outward = Point::Zero();  // cell outward unit normal
    int sign = 1;
    int global = -1;
};

/// Geometry, bases and DOF functionals of one cell's local virtual space.
/// Edge moments use the scaled edge monomials ((x - mid).t / |e|)^j built on
/// the global edge orientation, so neighbouring cells share them.
class LocalSpace {
public:
    LocalSpace(const PolygonalMesh& mesh, int cell, const VemParams& params);

    [[nodiscard]] const VemParams& params() const { return params_; }
    [[nodiscard]] const LocalDofLayout& layout() const { return layout_; }
    [[nodiscard]] int cell() const { return cell_; }
    [[nodiscard]] double area() const { return area_; }
    [[nodiscard]] double diameter() const { return diameter_; }
    [[nodiscard]] const Point& centroid() const { return centroid_; }
    [[nodiscard]] const std::vector<LocalEdge>& edges() const { return edges_; }
    [[nodiscard]] const std::vector<Point>& polygon() const { return polygon_; }

    [[nodiscard]] const ScaledMonomials& pk() const { return pk_; }
    [[nodiscard]] const ScaledMonomials& pk1() const { return pk1_; }
    [[nodiscard]] const QuadratureRule& quadrature() const { return quad_; }
    [[nodiscard]] const GradDecomposition& decomposition() const { return decomp_; }
    [[nodiscard]] const Eigen::MatrixXd& scalar_mass() const { return mk_; }

    /// Edge monomial values ((x - mid).t / |e|)^j, j = 0..k.
    [[nodiscard]] Eigen::VectorXd edge_monomials(int local_edge, const Point& x) const;

    /// Row functional (over one row's scalar DOFs) of  v -> int_dE v.n p  for
    /// every monomial p of `basis`: one row per monomial.
    [[nodiscard]] Eigen::MatrixXd boundary_functionals(const ScaledMonomials& basis) const;

    /// Normalised DOFs of a smooth vector field (one tensor row).
    [[nodiscard]] Eigen::VectorXd dofs_of_vector_field(const VectorField& f, int degree) const;

    /// Largest condition-number estimate among the local mass matrices.
    [[nodiscard]] double mass_condition() const { return mass_condition_; }

private:
    VemParams params_;
    LocalDofLayout layout_;
    int cell_ = -1;
    double area_ = 0.0;
    double diameter_ = 0.0;
    Point centroid_ = Point::Zero();
    std::vector<LocalEdge> edges_;
    std::vector<Point> polygon_;
    ScaledMonomials pk_;
    ScaledMonomials pk1_;
    QuadratureRule quad_;
    GradDecomposition decomp_;
    Eigen::MatrixXd mk_;
    std::vector<Eigen::MatrixXd> edge_mass_inv_;
    double mass_condition_ = 1.0;
};

/// Local operators of one cell. Tensor P_k coefficients are indexed
/// (row, component, monomial) -> row * 2 n_k + component * n_k + monomial.
struct LocalElementOperators {
    Eigen::MatrixXd projector;      // Pi: tensor DOFs -> P_k tensor coefficients of the L2 projection
    Eigen::MatrixXd div_coeff;      // tensor DOFs -> P_k coefficients of div (row 0 then row 1)
    Eigen::MatrixXd poly_dofs;      // DOFs of the P_k tensor basis (columns)
    Eigen::MatrixXd tensor_mass;    // L2(E) Gram matrix of the P_k tensor basis
    Eigen::MatrixXd divdiv;         // int_E div s . div t
    Eigen::MatrixXd consistency;    // int_E (Pi s)^D : (Pi t)^D
    Eigen::MatrixXd stabilization;  // stab_scale |E| (I - D Pi)^T (I - D Pi)
    Eigen::VectorXd trace;          // int_E tr(phi_i)
    double mass_condition = 1.0;
};

/// Interpolant I_k^h of a smooth tensor field: all normalised DOF moments.
/// `degree` < 0 picks a rule exact to max(2k + 6, 10).
Eigen::VectorXd dofs_of_tensor_field(const LocalSpace& space, const TensorField& field, int degree = -1);

/// Row functional matrix (n_k x scalar DOFs) giving the P_k coefficients of
/// div v for one tensor row.
Eigen::MatrixXd scalar_div_matrix(const LocalSpace& space);

/// P_k coefficients of div tau (2 n_k entries: row 0 then row 1).
Eigen::VectorXd div_from_dofs(const LocalSpace& space, const Eigen::VectorXd& dofs);

/// Tensor DOFs -> coefficients of the L2(E) projection onto P_k tensors.
Eigen::MatrixXd build_projector(const LocalSpace& space);

/// DOFs of each P_k tensor basis function (columns).
Eigen::MatrixXd polynomial_dofs(const LocalSpace& space);

/// Gram matrices of the P_k tensor basis: plain and deviatoric.
Eigen::MatrixXd tensor_mass_matrix(const LocalSpace& space);
Eigen::MatrixXd deviatoric_mass_matrix(const LocalSpace& space);

LocalElementOperators build_local_operators(const LocalSpace& space);
LocalElementOperators build_local_operators(const PolygonalMesh& mesh, int cell, const VemParams& params);

/// Evaluates a P_k tensor given by its coefficients at x.
Tensor evaluate_tensor(const ScaledMonomials& pk, const Eigen::VectorXd& coeffs, const Point& x);

/// Deviatoric part  t - tr(t)/2 I.
inline Tensor deviatoric(const Tensor& t)
{
    return t - 0.5 * t.trace() * Tensor::Identity();
}

} // namespace vemstokes
