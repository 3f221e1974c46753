#pragma once

#include "vemstokes/assembly.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace vemstokes {

enum class SolveStrategy { Dense, ShiftInvert, Auto };

std::string_view to_string(SolveStrategy s);
SolveStrategy parse_strategy(std::string_view name);

struct SolveOptions {
    int m = 6;
    double tol_one = 1e-6;
    double lambda_cap = 1e8;
    double residual_tol = 1e-8;
    SolveStrategy strategy = SolveStrategy::Auto;
    double shift = 1.2;
    std::uint64_t seed = 12345;
    int max_basis = 0;          // Lanczos basis cap; 0 picks max(2m + 40, 120)
    int max_restarts = 12;      // deflation passes before giving up
    int dense_limit = 6000;     // largest pencil the dense path accepts
    int auto_dense_below = 1500;  // Auto picks dense below this size

    /// Throws ConfigError on m < 1, tol_one <= 0, shift <= 1, lambda_cap <= 1.
    void validate() const;
};

struct SpectrumResult {
    std::vector<double> eigenvalues;  // shifted values lambda - 1, ascending
    std::vector<double> lambdas;      // unshifted lambda
    std::vector<double> mu;           // 1 / lambda
    Eigen::MatrixXd vectors;          // global DOF vectors (columns), a_h-norm 1
    std::vector<double> residuals;
    int cluster_count = 0;               // lambda ~ 1 values seen
    std::vector<double> cluster_values;  // filled by the dense path
    int infinite_count = 0;              // values above lambda_cap (or mu ~ 0)
    SolveStrategy strategy = SolveStrategy::Dense;
    double shift_used = 0.0;
    int iterations = 0;
    std::vector<std::string> diagnostics;
};

/// Smallest m physical eigenpairs of A x = lambda B x (lambda > 1 + tol_one,
/// lambda < lambda_cap). Rigid systems carry the trace constraint c^T x = 0.
SpectrumResult solve_spectrum(const GlobalSystem& system, const SolveOptions& options);

struct ResidualReport {
    std::vector<double> residuals;
    std::vector<double> constraint;  // rigid mode: |c^T x| / ||x||
    std::vector<int> failed;         // residual above tol, or |c^T x| > 1e-10 ||x||
    [[nodiscard]] bool ok() const { return failed.empty(); }
};

/// Recomputes ||A x - lambda B x|| / (||A x|| + |lambda| ||B x||) per pair. In
/// rigid mode the multiplier component along c is removed by least squares
/// first.
ResidualReport verify_residuals(const GlobalSystem& system, const SpectrumResult& result, double tol);

/// Results as JSON text (eigenvalues, residuals, cluster report, options).
std::string spectrum_to_json(const SpectrumResult& result, const SolveOptions& options);

/// Binary sidecar: uint64 DOF count, uint64 vector count, then the vectors
/// column by column as little-endian doubles.
void write_eigenvectors(const SpectrumResult& result, const std::string& path);
Eigen::MatrixXd read_eigenvectors(const std::string& path);

} // namespace vemstokes
