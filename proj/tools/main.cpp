// vemstokes: mesh generation, single solves and convergence tables.
//
// Exit codes: 0 success, 1 usage or config, 2 mesh, 3 assembly, 4 solver,
// 5 residual check failed, 6 I/O.

#include "vemstokes/assembly.hpp"
#include "vemstokes/eigensolve.hpp"
#include "vemstokes/error.hpp"
#include "vemstokes/experiment.hpp"
#include "vemstokes/mesh.hpp"
#include "vemstokes/mesh_io.hpp"
#include "vemstokes/postprocess.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace vemstokes;

namespace {

enum Exit { Ok = 0, Usage = 1, MeshFail = 2, AssemblyFail = 3, SolverFail = 4, ResidualFail = 5, IoFail = 6 };

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Config: return Usage;
    case ErrorKind::Mesh: return MeshFail;
    case ErrorKind::Assembly: return AssemblyFail;
    case ErrorKind::Solver: return SolverFail;
    case ErrorKind::Io: return IoFail;
    }
    return Usage;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir)
{
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void print_quality(const MeshQualityReport& q)
{
    std::printf("cells %zu  edges %zu  vertices %zu\n", q.num_cells, q.num_edges, q.num_vertices);
    std::printf("boundary edges %zu (dirichlet %zu, neumann %zu)\n", q.num_boundary_edges, q.num_dirichlet_edges,
                q.num_neumann_edges);
    std::printf("h %.6g  min edge ratio %.4g  area %.12g\n", q.h, q.min_edge_ratio, q.total_area);
}

struct MeshFlags {
    std::string family = "tri";
    int n = 0;
    std::string domain = "unit-square";
    std::uint64_t seed = 0;
    std::string boundary = "default";

    void add(CLI::App& app, bool require_n)
    {
        app.add_option("--family", family, "tri, quad, hex, deformed-hex, voronoi, deformed-quad");
        auto* opt = app.add_option("--N", n, "mesh level (subdivisions per side)");
        if (require_n) opt->required();
        app.add_option("--domain", domain, "unit-square, sym-square, lshape");
        app.add_option("--seed", seed, "seed for the randomised families");
        app.add_option("--boundary", boundary, "default, all-dirichlet, bottom-dirichlet");
    }

    [[nodiscard]] GenerateOptions options() const
    {
        GenerateOptions g;
        g.family = parse_family(family);
        g.domain = parse_domain(domain);
        g.n = n;
        g.seed = seed;
        if (boundary == "default") g.boundary = BoundaryPreset::DomainDefault;
        else if (boundary == "all-dirichlet") g.boundary = BoundaryPreset::AllDirichlet;
        else if (boundary == "bottom-dirichlet") g.boundary = BoundaryPreset::BottomDirichlet;
        else throw ConfigError("unknown boundary preset '" + boundary + "'");
        return g;
    }
};

int cmd_generate(const MeshFlags& flags, const std::string& out)
{
    const PolygonalMesh mesh = generate_mesh(flags.options());
    const MeshQualityReport q = validate_mesh(mesh);
    write_mesh(mesh, out);
    print_quality(q);
    return Ok;
}

struct SolveFlags {
    std::string mesh_path;
    std::string bc = "mixed";
    int k = 0;
    double stab_scale = 1.0;
    SolveOptions solver;
    std::string strategy = "auto";
    std::string out;
    std::string out_dir = ".";
    std::string eigenvectors;
    std::vector<int> vtk_modes;
    bool export_matrices = false;
    int threads = 0;
};

int cmd_solve(const MeshFlags& mflags, const SolveFlags& f)
{
    VemParams params;
    params.k = f.k;
    params.stab_scale = f.stab_scale;
    params.validate();
    SolveOptions options = f.solver;
    options.strategy = parse_strategy(f.strategy);
    options.validate();
    const BcMode bc = parse_bc_mode(f.bc);

    PolygonalMesh mesh;
    if (!f.mesh_path.empty()) {
        mesh = read_mesh(f.mesh_path);
    } else {
        if (mflags.n < 1) throw ConfigError("solve needs --mesh or --N");
        mesh = generate_mesh(mflags.options());
    }
    const MeshQualityReport q = validate_mesh(mesh);
    const GlobalSystem sys = assemble_system(mesh, params, bc, f.threads);
    for (const auto& d : sys.diagnostics) std::fprintf(stderr, "assembly: %s\n", d.c_str());

    const fs::path dir(f.out_dir);
    if (f.export_matrices) {
        ensure_dir(dir);
        write_matrix_market(sys.A, (dir / "A.mtx").string());
        write_matrix_market(sys.B, (dir / "B.mtx").string());
    }

    const SpectrumResult res = solve_spectrum(sys, options);
    for (const auto& d : res.diagnostics) std::fprintf(stderr, "solver: %s\n", d.c_str());
    const ResidualReport check = verify_residuals(sys, res, options.residual_tol);

    const std::string json = spectrum_to_json(res, options);
    if (f.out.empty()) {
        std::fputs(json.c_str(), stdout);
    } else {
        ensure_dir(fs::path(f.out).parent_path());
        write_text(f.out, json);
        std::printf("h %.6g  dofs %d  strategy %s\n", q.h, sys.n_free, std::string(to_string(res.strategy)).c_str());
        for (std::size_t i = 0; i < res.eigenvalues.size(); ++i)
            std::printf("%3zu  %.10f  residual %.2e\n", i + 1, res.eigenvalues[i], check.residuals[i]);
    }
    if (!f.eigenvectors.empty()) write_eigenvectors(res, f.eigenvectors);

    if (!f.vtk_modes.empty()) {
        ensure_dir(dir);
        for (int mode : f.vtk_modes) {
            if (mode < 1 || mode > static_cast<int>(res.eigenvalues.size()))
                throw ConfigError("--export-vtk mode " + std::to_string(mode) + " not among the computed ones");
            const auto i = static_cast<std::size_t>(mode - 1);
            const PkTensorField sigma = build_tensor_field(mesh, params, sys.dofs, res.vectors.col(mode - 1));
            const PkVectorField u = recover_velocity(sigma, res.eigenvalues[i]);
            const PkScalarField p = recover_pressure(sigma);
            export_vtk(mesh, cell_fields(mesh, u, p), (dir / ("mode_" + std::to_string(mode) + ".vtk")).string());
        }
    }

    if (!check.ok()) {
        std::fprintf(stderr, "residual check failed for %zu eigenpairs\n", check.failed.size());
        return ResidualFail;
    }
    return Ok;
}

int cmd_table(const std::string& config_path, const std::string& out_dir_flag)
{
    ExperimentConfig config = load_config(config_path);
    if (!out_dir_flag.empty()) config.output_dir = out_dir_flag;
    const TableResult result = run_table(config);
    std::fputs(result.table.text.c_str(), stdout);
    if (!config.output_dir.empty()) {
        const fs::path dir(config.output_dir);
        ensure_dir(dir);
        write_text(dir / "table.csv", result.table.csv);
        write_text(dir / "table.txt", result.table.text);
        write_text(dir / "results.json", table_to_json(config, result));
    }
    return Ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Virtual element solver for the pseudostress Stokes eigenvalue problem"};
    app.require_subcommand(1);

    MeshFlags gen_mesh;
    std::string gen_out;
    auto* gen = app.add_subcommand("generate-mesh", "write a generated mesh as JSON");
    gen_mesh.add(*gen, true);
    gen->add_option("--out", gen_out, "output mesh file")->required();

    MeshFlags solve_mesh;
    SolveFlags sf;
    auto* solve = app.add_subcommand("solve", "assemble and solve one mesh");
    solve_mesh.add(*solve, false);
    solve->add_option("--mesh", sf.mesh_path, "read the mesh from a JSON file instead of generating it");
    solve->add_option("--bc", sf.bc, "mixed or rigid");
    solve->add_option("--k", sf.k, "polynomial degree");
    solve->add_option("--stab-scale", sf.stab_scale, "stabilization scaling");
    solve->add_option("--m", sf.solver.m, "number of eigenvalues");
    solve->add_option("--strategy", sf.strategy, "dense, shift-invert or auto");
    solve->add_option("--shift", sf.solver.shift, "shift for shift-invert (> 1)");
    solve->add_option("--tol-one", sf.solver.tol_one, "half-width of the lambda = 1 cluster");
    solve->add_option("--lambda-cap", sf.solver.lambda_cap, "values above this are treated as infinite");
    solve->add_option("--residual-tol", sf.solver.residual_tol, "residual check tolerance");
    solve->add_option("--solver-seed", sf.solver.seed, "seed for iterative start vectors");
    solve->add_option("--out", sf.out, "results JSON (default: stdout)");
    solve->add_option("--out-dir", sf.out_dir, "directory for VTK and matrix files");
    solve->add_option("--eigenvectors", sf.eigenvectors, "binary eigenvector sidecar");
    solve->add_option("--export-vtk", sf.vtk_modes, "1-based mode indices to export")->delimiter(',');
    solve->add_flag("--export-matrices", sf.export_matrices, "write A.mtx and B.mtx");
    solve->add_option("--threads", sf.threads, "assembly threads (default from VEMSTOKES_NUM_THREADS)");

    std::string config_path, table_out;
    auto* table = app.add_subcommand("table", "run a mesh sequence and fit convergence orders");
    table->add_option("config", config_path, "experiment config (TOML)")->required();
    table->add_option("--out-dir", table_out, "output directory (overrides output_dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Ok : Usage;
    }

    try {
        if (*gen) return cmd_generate(gen_mesh, gen_out);
        if (*solve) return cmd_solve(solve_mesh, sf);
        if (*table) return cmd_table(config_path, table_out);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return Usage;
    }
    return Usage;
}
