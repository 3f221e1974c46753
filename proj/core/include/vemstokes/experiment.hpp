#pragma once

#include "vemstokes/assembly.hpp"
#include "vemstokes/eigensolve.hpp"
#include "vemstokes/mesh.hpp"
#include "vemstokes/postprocess.hpp"

#include <string>
#include <vector>

namespace vemstokes {

/// Experiment description. Config files are flat TOML:
///
///   title = "..."            family = "tri"       domain = "unit-square"
///   bc = "mixed"             n = [30, 40, 50, 60] k = 0
///   m = 6                    seed = 0             stab_scale = 1.0
///   strategy = "auto"        shift = 1.2          tol_one = 1e-6
///   lambda_cap = 1e8         residual_tol = 1e-8  solver_seed = 12345
///   reference = [...]        output_dir = "..."   threads = 0
///
/// Only title, family, domain, bc and n are required. Unknown keys and
/// mistyped values are errors.
struct ExperimentConfig {
    std::string title;
    MeshFamily family = MeshFamily::Tri;
    DomainTag domain = DomainTag::UnitSquare;
    BcMode bc_mode = BcMode::Mixed;
    std::vector<int> n;
    VemParams params;
    SolveOptions solver;
    std::uint64_t mesh_seed = 0;
    std::vector<double> reference;
    std::string output_dir;
    int threads = 0;

    /// Throws ConfigError on repeated or out-of-range N, m < 1 and the like.
    void validate() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);

struct RunResult {
    int n = 0;
    MeshQualityReport quality;
    int num_dofs = 0;
    SpectrumResult spectrum;
    ResidualReport check;
    double seconds = 0.0;
};

/// Assembles and solves one mesh. Does not throw on residual failures; the
/// caller inspects `check`.
RunResult solve_mesh(const PolygonalMesh& mesh, const VemParams& params, BcMode bc_mode,
                     const SolveOptions& options, int threads = 0);

/// Generates the level-n mesh of the config and solves it.
RunResult run_level(const ExperimentConfig& config, int n);

struct TableResult {
    std::vector<RunResult> levels;  // ordered as config.n
    Table table;
};

/// Runs every level (at least three) and fits the convergence table.
TableResult run_table(const ExperimentConfig& config);

/// JSON bundle of a table run: config echo, per-level spectra and the fits.
std::string table_to_json(const ExperimentConfig& config, const TableResult& result);

} // namespace vemstokes
