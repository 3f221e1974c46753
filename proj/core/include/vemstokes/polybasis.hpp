#pragma once

#include "vemstokes/mesh.hpp"
#include "vemstokes/quadrature.hpp"

#include <Eigen/Core>

#include <vector>

namespace vemstokes {

struct Exponent {
    int px = 0;
    int py = 0;
    [[nodiscard]] int degree() const { return px + py; }
};

/// m_a(x) = ((x - center) / diameter)^a for |a| <= degree, graded
/// lexicographic order: 1, x, y, x^2, xy, y^2, ...
class ScaledMonomials {
public:
    ScaledMonomials() = default;
    ScaledMonomials(const Point& center, double diameter, int degree);

    static int dimension(int degree) { return degree < 0 ? 0 : (degree + 1) * (degree + 2) / 2; }

    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] int size() const { return static_cast<int>(exponents_.size()); }
    [[nodiscard]] const Point& center() const { return center_; }
    [[nodiscard]] double diameter() const { return diameter_; }
    [[nodiscard]] const std::vector<Exponent>& exponents() const { return exponents_; }
    [[nodiscard]] int index(int px, int py) const;

    [[nodiscard]] Eigen::VectorXd evaluate(const Point& x) const;
    /// Row a holds the gradient of m_a.
    [[nodiscard]] Eigen::MatrixX2d gradient(const Point& x) const;

    /// Coefficients of d m_a / d x_axis in the basis of degree `target_degree`
    /// (column a), exact for target_degree >= degree - 1.
    [[nodiscard]] Eigen::MatrixXd derivative(int axis, int target_degree) const;

private:
    Point center_ = Point::Zero();
    double diameter_ = 1.0;
    int degree_ = 0;
    std::vector<Exponent> exponents_;
};

/// Gram matrix of two scaled monomial bases under a quadrature rule.
Eigen::MatrixXd mass_matrix(const ScaledMonomials& rows, const ScaledMonomials& cols, const QuadratureRule& rule);
Eigen::MatrixXd mass_matrix(const ScaledMonomials& basis, const QuadratureRule& rule);

/// P_k(E)^2 = grad P_{k+1}(E) (+) H_k^perp(E), with vector fields stored as
/// coefficients in the basis [(m_a, 0) ..., (0, m_a) ...] of length 2 dim P_k.
struct GradDecomposition {
    int k = 0;
    double area = 0.0;
    Eigen::MatrixXd vector_mass;       // L2(E) Gram matrix of the vector basis
    Eigen::MatrixXd grad_basis;        // columns: grad m_b, 1 <= |b| <= k+1 (degree-(k+1) basis order)
    Eigen::MatrixXd complement_basis;  // columns orthonormal under (1/|E|) L2(E)
    Eigen::MatrixXd split;             // q -> [grad coefficients; complement coefficients]

    [[nodiscard]] int num_grad() const { return static_cast<int>(grad_basis.cols()); }
    [[nodiscard]] int num_complement() const { return static_cast<int>(complement_basis.cols()); }
};

/// Sizes of the two parts for degree k.
int grad_part_dimension(int k);
int complement_dimension(int k);

GradDecomposition build_grad_decomposition(const ScaledMonomials& pk1, const QuadratureRule& rule, double area,
                                           int k);
GradDecomposition build_grad_decomposition(const PolygonalMesh& mesh, int cell, int k);

} // namespace vemstokes
