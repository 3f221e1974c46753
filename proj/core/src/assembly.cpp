#include "vemstokes/assembly.hpp"

#include "vemstokes/error.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace vemstokes {

std::string_view to_string(BcMode mode)
{
    return mode == BcMode::Mixed ? "mixed" : "rigid";
}

BcMode parse_bc_mode(std::string_view name)
{
    if (name == "mixed") return BcMode::Mixed;
    if (name == "rigid") return BcMode::Rigid;
    throw ConfigError("unknown boundary-condition mode '" + std::string(name) + "' (expected mixed or rigid)");
}

int default_thread_count()
{
    if (const char* env = std::getenv("VEMSTOKES_NUM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

Eigen::VectorXd DofMap::expand(const Eigen::VectorXd& free_values) const
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_global);
    for (int g = 0; g < num_global; ++g) {
        const int f = free_index[static_cast<std::size_t>(g)];
        if (f >= 0) out(g) = free_values(f);
    }
    return out;
}

Eigen::VectorXd DofMap::restrict_to_free(const Eigen::VectorXd& global_values) const
{
    Eigen::VectorXd out(num_free);
    for (int g = 0; g < num_global; ++g) {
        const int f = free_index[static_cast<std::size_t>(g)];
        if (f >= 0) out(f) = global_values(g);
    }
    return out;
}

Eigen::VectorXd DofMap::local(int cell, const Eigen::VectorXd& global_values) const
{
    const auto& g = gather[static_cast<std::size_t>(cell)];
    Eigen::VectorXd out(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) out(static_cast<Eigen::Index>(i)) = g[i].sign * global_values(g[i].global);
    return out;
}

DofMap build_dof_map(const PolygonalMesh& mesh, const VemParams& params, BcMode bc_mode)
{
    params.validate();
    DofMap map;
    map.k = params.k;
    map.bc_mode = bc_mode;
    const int k = params.k;
    const int per_edge = k + 1;
    const int n_interior = (ScaledMonomials::dimension(k) - 1) + complement_dimension(k);
    const int n_edges = static_cast<int>(mesh.num_edges());
    const int edge_block = 2 * per_edge * n_edges;
    map.num_global = edge_block + 2 * n_interior * static_cast<int>(mesh.num_cells());

    map.gather.resize(mesh.num_cells());
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const auto edges = mesh.cell_edges(c);
        const int scalar = static_cast<int>(edges.size()) * per_edge + n_interior;
        auto& g = map.gather[static_cast<std::size_t>(c)];
        g.resize(static_cast<std::size_t>(2 * scalar));
        for (int r = 0; r < 2; ++r) {
            for (int l = 0; l < static_cast<int>(edges.size()); ++l)
                for (int j = 0; j < per_edge; ++j)
                    g[static_cast<std::size_t>(r * scalar + l * per_edge + j)] = {
                        map.edge_dof(edges[static_cast<std::size_t>(l)].edge, j, r),
                        edges[static_cast<std::size_t>(l)].sign};
            for (int i = 0; i < n_interior; ++i)
                g[static_cast<std::size_t>(r * scalar + static_cast<int>(edges.size()) * per_edge + i)] = {
                    edge_block + (c * n_interior + i) * 2 + r, 1};
        }
    }

    map.free_index.assign(static_cast<std::size_t>(map.num_global), 0);
    for (int e = 0; e < n_edges; ++e) {
        const auto label = mesh.boundary_label(e);
        if (!label || *label != BoundaryLabel::Neumann) continue;
        for (int j = 0; j < per_edge; ++j)
            for (int r = 0; r < 2; ++r) map.constrained.push_back(map.edge_dof(e, j, r));
    }
    std::sort(map.constrained.begin(), map.constrained.end());
    for (int g : map.constrained) map.free_index[static_cast<std::size_t>(g)] = -1;
    int next = 0;
    for (int& f : map.free_index)
        if (f >= 0) f = next++;
    map.num_free = next;
    return map;
}

namespace {

struct CellMatrices {
    Eigen::MatrixXd divdiv;
    Eigen::MatrixXd b;
    Eigen::VectorXd trace;
    Eigen::VectorXd identity;
    double mass_condition = 1.0;
};

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn)
{
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = n;
                    }
                }
            });
    }
    if (error) std::rethrow_exception(error);
}

} // namespace

GlobalSystem assemble_system(const PolygonalMesh& mesh, const VemParams& params, BcMode bc_mode, int threads)
{
    params.validate();
    std::size_t n_neumann = 0;
    for (int e = 0; e < static_cast<int>(mesh.num_edges()); ++e)
        if (mesh.boundary_label(e) == BoundaryLabel::Neumann) ++n_neumann;
    if (bc_mode == BcMode::Rigid && n_neumann > 0)
        throw AssemblyError("rigid mode requires all-Dirichlet boundary (mesh has " + std::to_string(n_neumann) +
                            " Neumann edges)");
    if (bc_mode == BcMode::Mixed && n_neumann == 0)
        throw AssemblyError("mixed mode needs at least one Neumann edge; use rigid mode for an all-Dirichlet boundary");

    GlobalSystem sys;
    sys.bc_mode = bc_mode;
    sys.params = params;
    sys.dofs = build_dof_map(mesh, params, bc_mode);
    const DofMap& map = sys.dofs;
    sys.n_free = map.num_free;

    const int ncells = static_cast<int>(mesh.num_cells());
    std::vector<CellMatrices> local(static_cast<std::size_t>(ncells));
    parallel_for(ncells, threads > 0 ? threads : default_thread_count(), [&](int c) {
        const LocalElementOperators ops = build_local_operators(mesh, c, params);
        auto& out = local[static_cast<std::size_t>(c)];
        out.divdiv = ops.divdiv;
        out.b = ops.consistency + ops.stabilization;
        out.trace = ops.trace;
        if (bc_mode == BcMode::Rigid) {
            const Eigen::Index nk = ScaledMonomials::dimension(params.k);
            out.identity = ops.poly_dofs.col(0) + ops.poly_dofs.col(3 * nk);
        }
        out.mass_condition = ops.mass_condition;
    });

    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> ta, tb, td;
    if (bc_mode == BcMode::Rigid) {
        sys.trace = Eigen::VectorXd::Zero(map.num_free);
        sys.kernel = Eigen::VectorXd::Zero(map.num_free);
    }
    for (int c = 0; c < ncells; ++c) {
        const auto& g = map.gather[static_cast<std::size_t>(c)];
        const CellMatrices& m = local[static_cast<std::size_t>(c)];
        sys.max_mass_condition = std::max(sys.max_mass_condition, m.mass_condition);
        const int n = static_cast<int>(g.size());
        for (int i = 0; i < n; ++i) {
            const int fi = map.free_index[static_cast<std::size_t>(g[static_cast<std::size_t>(i)].global)];
            if (fi < 0) continue;
            const double si = g[static_cast<std::size_t>(i)].sign;
            if (bc_mode == BcMode::Rigid) {
                sys.trace(fi) += si * m.trace(i);
                sys.kernel(fi) = si * m.identity(i);
            }
            for (int j = 0; j < n; ++j) {
                const int fj = map.free_index[static_cast<std::size_t>(g[static_cast<std::size_t>(j)].global)];
                if (fj < 0) continue;
                const double s = si * g[static_cast<std::size_t>(j)].sign;
                const double d = s * m.divdiv(i, j);
                const double b = s * m.b(i, j);
                td.emplace_back(fi, fj, d);
                tb.emplace_back(fi, fj, b);
                ta.emplace_back(fi, fj, d + b);
            }
        }
    }
    sys.A.resize(map.num_free, map.num_free);
    sys.B.resize(map.num_free, map.num_free);
    sys.divdiv.resize(map.num_free, map.num_free);
    sys.A.setFromTriplets(ta.begin(), ta.end());
    sys.B.setFromTriplets(tb.begin(), tb.end());
    sys.divdiv.setFromTriplets(td.begin(), td.end());

    if (sys.max_mass_condition > 1e12) {
        std::ostringstream os;
        os << "local mass matrix condition number " << sys.max_mass_condition << " exceeds 1e12";
        sys.diagnostics.push_back(os.str());
    }
    return sys;
}

AugmentedSystem apply_constraint(const GlobalSystem& system)
{
    if (system.bc_mode != BcMode::Rigid) throw AssemblyError("apply_constraint is only defined in rigid mode");
    const int n = system.n_free;
    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> ta;
    ta.reserve(static_cast<std::size_t>(system.A.nonZeros() + 2 * n));
    for (int col = 0; col < system.A.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(system.A, col); it; ++it) ta.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < n; ++i) {
        if (system.trace(i) == 0.0) continue;
        ta.emplace_back(i, n, system.trace(i));
        ta.emplace_back(n, i, system.trace(i));
    }
    AugmentedSystem out;
    out.n = n;
    out.A.resize(n + 1, n + 1);
    out.A.setFromTriplets(ta.begin(), ta.end());
    out.B = system.B;
    out.B.conservativeResize(n + 1, n + 1);
    return out;
}

SparseMatrix assemble_divergence(const PolygonalMesh& mesh, const VemParams& params, const DofMap& dofs)
{
    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> t;
    const int nk = ScaledMonomials::dimension(params.k);
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const LocalSpace space(mesh, c, params);
        const Eigen::MatrixXd d = scalar_div_matrix(space);
        const int s = space.layout().scalar_size();
        const auto& g = dofs.gather[static_cast<std::size_t>(c)];
        for (int r = 0; r < 2; ++r)
            for (int a = 0; a < nk; ++a)
                for (int i = 0; i < s; ++i) {
                    const auto& entry = g[static_cast<std::size_t>(r * s + i)];
                    const int f = dofs.free_index[static_cast<std::size_t>(entry.global)];
                    if (f < 0 || d(a, i) == 0.0) continue;
                    t.emplace_back((c * 2 + r) * nk + a, f, entry.sign * d(a, i));
                }
    }
    SparseMatrix out(static_cast<Eigen::Index>(mesh.num_cells()) * 2 * nk, dofs.num_free);
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

Eigen::VectorXd interpolate(const PolygonalMesh& mesh, const VemParams& params, const DofMap& dofs,
                            const TensorField& field)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs.num_global);
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const LocalSpace space(mesh, c, params);
        const Eigen::VectorXd loc = dofs_of_tensor_field(space, field);
        const auto& g = dofs.gather[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < g.size(); ++i) out(g[i].global) = g[i].sign * loc(static_cast<Eigen::Index>(i));
    }
    return out;
}

void write_matrix_market(const SparseMatrix& m, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
    char buf[64];
    for (int col = 0; col < m.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
            std::snprintf(buf, sizeof buf, "%.17g", it.value());
            os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << buf << '\n';
        }
    if (!os) throw IoError("failed writing '" + path + "'");
}

} // namespace vemstokes
