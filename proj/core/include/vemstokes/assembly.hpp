#pragma once

#include "vemstokes/mesh.hpp"
#include "vemstokes/vemspace.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>
#include <vector>

namespace vemstokes {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class BcMode { Mixed, Rigid };

std::string_view to_string(BcMode mode);
BcMode parse_bc_mode(std::string_view name);

/// Global numbering. Edge DOFs come first, ordered (edge, moment, row); then
/// interior DOFs ordered (cell, moment, row). Edge moments are taken against
/// the global normal; a cell whose outward normal opposes it sees every
/// moment of that edge with sign -1.
struct DofMap {
    struct Entry {
        int global = -1;
        int sign = 1;
    };

    int k = 0;
    BcMode bc_mode = BcMode::Mixed;
    int num_global = 0;
    int num_free = 0;
    std::vector<std::vector<Entry>> gather;  // per cell, indexed by local tensor DOF
    std::vector<int> free_index;             // global -> free (or -1 when constrained)
    std::vector<int> constrained;            // sorted global ids on Neumann edges

    [[nodiscard]] bool is_constrained(int global) const { return free_index[static_cast<std::size_t>(global)] < 0; }
    [[nodiscard]] int edge_dof(int edge, int moment, int row) const { return (edge * (k + 1) + moment) * 2 + row; }

    /// Expands a free-DOF vector to all global DOFs (constrained entries zero).
    [[nodiscard]] Eigen::VectorXd expand(const Eigen::VectorXd& free_values) const;
    /// Restricts a global vector to the free DOFs.
    [[nodiscard]] Eigen::VectorXd restrict_to_free(const Eigen::VectorXd& global_values) const;
    /// Local (cell-oriented) DOF vector from a global vector.
    [[nodiscard]] Eigen::VectorXd local(int cell, const Eigen::VectorXd& global_values) const;
};

DofMap build_dof_map(const PolygonalMesh& mesh, const VemParams& params, BcMode bc_mode);

struct GlobalSystem {
    SparseMatrix A;       // a_h = divdiv + b_h, on free DOFs
    SparseMatrix B;       // b_h = consistency + stabilization
    SparseMatrix divdiv;  // div-div part alone (A = B + divdiv)
    Eigen::VectorXd trace;  // rigid mode: int_Omega tr(phi_i); empty otherwise
    Eigen::VectorXd kernel; // rigid mode: DOFs of the identity tensor, spanning ker A
    int n_free = 0;
    BcMode bc_mode = BcMode::Mixed;
    DofMap dofs;
    VemParams params;
    double max_mass_condition = 1.0;
    std::vector<std::string> diagnostics;
};

/// Builds the local operators of every cell (in parallel when threads > 1)
/// and sums them into A and B in cell order.
GlobalSystem assemble_system(const PolygonalMesh& mesh, const VemParams& params, BcMode bc_mode, int threads = 0);

/// Rigid-mode pencil with the zero-mean-trace Lagrange multiplier appended:
/// [[A, c], [c^T, 0]] and B extended by a zero row and column.
struct AugmentedSystem {
    SparseMatrix A;
    SparseMatrix B;
    int n = 0;  // size of the unaugmented system
};

AugmentedSystem apply_constraint(const GlobalSystem& system);

/// Map from free DOFs to the per-cell P_k coefficients of div (2 n_k rows per
/// cell); its kernel is the discrete divergence-free space.
SparseMatrix assemble_divergence(const PolygonalMesh& mesh, const VemParams& params, const DofMap& dofs);

/// Global interpolant of a smooth tensor field (all global DOFs).
Eigen::VectorXd interpolate(const PolygonalMesh& mesh, const VemParams& params, const DofMap& dofs,
                            const TensorField& field);

/// Writes a matrix in Matrix Market coordinate format (general, 1-based).
void write_matrix_market(const SparseMatrix& m, const std::string& path);

/// Worker count from VEMSTOKES_NUM_THREADS (default: hardware concurrency).
int default_thread_count();

} // namespace vemstokes
