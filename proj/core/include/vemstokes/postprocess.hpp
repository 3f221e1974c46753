#pragma once

#include "vemstokes/assembly.hpp"
#include "vemstokes/mesh.hpp"
#include "vemstokes/polybasis.hpp"
#include "vemstokes/vemspace.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace vemstokes {

/// Per-cell P_k data of a discrete pseudostress: coefficients of the L2
/// projection (4 n_k, layout as LocalElementOperators::projector) and of div
/// (2 n_k, row 0 then row 1).
struct PkTensorField {
    int k = 0;
    std::vector<ScaledMonomials> basis;
    std::vector<Eigen::MatrixXd> mass;  // scalar Gram matrix of each cell's basis
    std::vector<Eigen::VectorXd> projection;
    std::vector<Eigen::VectorXd> divergence;

    [[nodiscard]] std::size_t num_cells() const { return basis.size(); }
    [[nodiscard]] Tensor value(int cell, const Point& x) const;
    [[nodiscard]] Eigen::Vector2d div(int cell, const Point& x) const;
};

/// `dofs` holds every global DOF (constrained entries included).
PkTensorField build_tensor_field(const PolygonalMesh& mesh, const VemParams& params, const DofMap& map,
                                 const Eigen::VectorXd& dofs);

struct PkVectorField {
    std::vector<ScaledMonomials> basis;
    std::vector<Eigen::VectorXd> coeffs;  // 2 n_k per cell: x component then y
    [[nodiscard]] Eigen::Vector2d value(int cell, const Point& x) const;
};

struct PkScalarField {
    std::vector<ScaledMonomials> basis;
    std::vector<Eigen::VectorXd> coeffs;
    double integral = 0.0;  // int_Omega p
    double l2_norm = 0.0;
    [[nodiscard]] double value(int cell, const Point& x) const;
};

/// u_h = -div(sigma_h) / lambda_hat. Throws ConfigError when lambda_hat <= tol.
PkVectorField recover_velocity(const PkTensorField& sigma, double lambda_hat, double tol = 1e-8);

/// p_h = -tr(Pi sigma_h) / 2 with its global integral and L2 norm.
PkScalarField recover_pressure(const PkTensorField& sigma);

/// int_Omega |u_h|^2.
double velocity_l2_squared(const PkVectorField& u, const PkTensorField& sigma);

struct ConvergenceFit {
    double order = 0.0;  // NaN when the series is constant
    double extrapolated = 0.0;
    double constant = 0.0;
    double residual = 0.0;  // sqrt of the sum of squared misfits
    bool order_defined = true;
};

/// Least-squares fit of value = V + C h^t over t in [0.5, 4]. Needs at least
/// three distinct h (ConfigError otherwise).
ConvergenceFit fit_convergence(const std::vector<std::pair<double, double>>& series);

struct CellField {
    std::string name;
    int components = 1;  // 1 (SCALARS) or 3 (VECTORS)
    std::vector<double> values;  // cell-major
};

/// Centroid values of |u|, u and p for plotting.
std::vector<CellField> cell_fields(const PolygonalMesh& mesh, const PkVectorField& u, const PkScalarField& p);

/// Legacy ASCII VTK, polygons as cells, CELL_DATA arrays.
void export_vtk(const PolygonalMesh& mesh, const std::vector<CellField>& fields, const std::string& path);
std::string format_vtk(const PolygonalMesh& mesh, const std::vector<CellField>& fields);

struct TableLevel {
    int n = 0;
    double h = 0.0;
    std::vector<double> values;  // eigenvalues at this mesh level
};

struct TableInput {
    std::string title;
    int rows = 0;  // eigenvalues per level to tabulate
    std::vector<TableLevel> levels;
    std::vector<double> reference;  // optional last column
};

struct TableRow {
    std::vector<double> values;  // one per level
    ConvergenceFit fit;
};

struct Table {
    std::vector<int> n;
    std::vector<double> h;
    std::vector<TableRow> rows;
    std::vector<double> reference;
    std::string csv;
    std::string text;
};

/// Fits every row and renders CSV and aligned text. Throws ConfigError on an
/// empty input or a level with fewer than `rows` values.
Table make_table(const TableInput& input);

} // namespace vemstokes
