#include "vemstokes/mesh.hpp"

#include "vemstokes/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vemstokes {

namespace {

double signed_area(const std::vector<Point>& xs, std::span<const int> cell)
{
    double a = 0.0;
    const std::size_t n = cell.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = xs[static_cast<std::size_t>(cell[i])];
        const Point& q = xs[static_cast<std::size_t>(cell[(i + 1) % n])];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

} // namespace

PolygonalMesh::PolygonalMesh(std::vector<Point> vertices,
                             std::vector<std::vector<int>> cells,
                             std::map<EdgeKey, BoundaryLabel> boundary_labels,
                             DomainTag domain)
    : vertices_(std::move(vertices)),
      cells_(std::move(cells)),
      labels_(std::move(boundary_labels)),
      domain_(domain)
{
    const int nv = static_cast<int>(vertices_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const auto& cell = cells_[c];
        if (cell.size() < 3)
            throw MeshError("cell " + std::to_string(c) + " has fewer than 3 vertices");
        for (int v : cell)
            if (v < 0 || v >= nv)
                throw MeshError("cell " + std::to_string(c) + " references vertex " + std::to_string(v) +
                                " out of range [0, " + std::to_string(nv) + ")");
    }

    // Edges sorted by (min vertex, max vertex) give a deterministic numbering.
    std::vector<EdgeKey> keys;
    for (const auto& cell : cells_)
        for (std::size_t i = 0; i < cell.size(); ++i) {
            const int a = cell[i];
            const int b = cell[(i + 1) % cell.size()];
            keys.emplace_back(std::min(a, b), std::max(a, b));
        }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    edges_.reserve(keys.size());
    for (const auto& [a, b] : keys) {
        Edge e;
        e.v = {a, b};
        const Point d = vertices_[static_cast<std::size_t>(b)] - vertices_[static_cast<std::size_t>(a)];
        e.length = d.norm();
        e.midpoint = 0.5 * (vertices_[static_cast<std::size_t>(a)] + vertices_[static_cast<std::size_t>(b)]);
        e.tangent = e.length > 0.0 ? Point(d / e.length) : Point::Zero();
        e.normal = Point(e.tangent.y(), -e.tangent.x());
        edge_index_.emplace(EdgeKey{a, b}, static_cast<int>(edges_.size()));
        edges_.push_back(std::move(e));
    }

    cell_edges_.resize(cells_.size());
    areas_.resize(cells_.size());
    centroids_.resize(cells_.size());
    diameters_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const auto& cell = cells_[c];
        const std::size_t n = cell.size();
        auto& ce = cell_edges_[c];
        ce.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const int a = cell[i];
            const int b = cell[(i + 1) % n];
            const int id = edge_index_.at({std::min(a, b), std::max(a, b)});
            ce[i] = CellEdge{id, a < b ? 1 : -1};
            edges_[static_cast<std::size_t>(id)].cells.push_back(static_cast<int>(c));
        }

        const double area = signed_area(vertices_, cell);
        areas_[c] = area;
        Point centroid = Point::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const Point& p = vertices_[static_cast<std::size_t>(cell[i])];
            const Point& q = vertices_[static_cast<std::size_t>(cell[(i + 1) % n])];
            const double w = p.x() * q.y() - q.x() * p.y();
            centroid += w * (p + q);
        }
        if (std::abs(area) > 0.0) {
            centroid /= 6.0 * area;
        } else {
            centroid.setZero();
            for (int v : cell) centroid += vertices_[static_cast<std::size_t>(v)];
            centroid /= static_cast<double>(n);
        }
        centroids_[c] = centroid;

        double diam = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                diam = std::max(diam, (vertices_[static_cast<std::size_t>(cell[i])] -
                                       vertices_[static_cast<std::size_t>(cell[j])]).norm());
        diameters_[c] = diam;
    }
}

std::optional<BoundaryLabel> PolygonalMesh::boundary_label(int e) const
{
    const Edge& ed = edge(e);
    auto it = labels_.find({ed.v[0], ed.v[1]});
    if (it == labels_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> PolygonalMesh::find_edge(int a, int b) const
{
    auto it = edge_index_.find({std::min(a, b), std::max(a, b)});
    if (it == edge_index_.end()) return std::nullopt;
    return it->second;
}

bool operator==(const PolygonalMesh& a, const PolygonalMesh& b)
{
    return a.vertices_ == b.vertices_ && a.cells_ == b.cells_ && a.labels_ == b.labels_;
}

MeshQualityReport validate_mesh(const PolygonalMesh& mesh)
{
    std::vector<std::string> problems;
    auto note = [&](std::string msg) { problems.push_back(std::move(msg)); };

    MeshQualityReport report;
    report.num_cells = mesh.num_cells();
    report.num_edges = mesh.num_edges();
    report.num_vertices = mesh.num_vertices();
    report.min_edge_ratio = 1.0;

    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
        const auto cell = mesh.cell(c);
        const double area = mesh.cell_area(c);
        if (!(area > 0.0)) {
            std::ostringstream os;
            os << "cell " << c << ": negative cell area " << area << " (vertices must be counter-clockwise)";
            note(os.str());
        }
        for (std::size_t i = 0; i < cell.size(); ++i)
            for (std::size_t j = i + 1; j < cell.size(); ++j)
                if (cell[i] == cell[j])
                    note("cell " + std::to_string(c) + ": repeated vertex " + std::to_string(cell[i]));
        report.total_area += area;
        const double hE = mesh.cell_diameter(c);
        report.h = std::max(report.h, hE);
        double emin = hE;
        for (const CellEdge& ce : mesh.cell_edges(c)) emin = std::min(emin, mesh.edge(ce.edge).length);
        if (hE > 0.0) report.min_edge_ratio = std::min(report.min_edge_ratio, emin / hE);
    }

    for (int e = 0; e < static_cast<int>(mesh.num_edges()); ++e) {
        const Edge& ed = mesh.edge(e);
        if (!(ed.length > 0.0))
            note("edge " + std::to_string(e) + " (" + std::to_string(ed.v[0]) + "," + std::to_string(ed.v[1]) +
                 "): zero length");
        if (ed.cells.size() > 2) {
            note("edge " + std::to_string(e) + " (" + std::to_string(ed.v[0]) + "," + std::to_string(ed.v[1]) +
                 "): shared by " + std::to_string(ed.cells.size()) + " cells");
        } else if (ed.cells.size() == 2) {
            // Both neighbours must traverse the edge in opposite directions.
            int s0 = 0;
            int s1 = 0;
            for (const CellEdge& ce : mesh.cell_edges(ed.cells[0]))
                if (ce.edge == e) s0 = ce.sign;
            for (const CellEdge& ce : mesh.cell_edges(ed.cells[1]))
                if (ce.edge == e) s1 = ce.sign;
            if (s0 == s1)
                note("edge " + std::to_string(e) + ": adjacent cells " + std::to_string(ed.cells[0]) + " and " +
                     std::to_string(ed.cells[1]) + " have inconsistent orientation");
            if (mesh.boundary_label(e))
                note("edge " + std::to_string(e) + " (" + std::to_string(ed.v[0]) + "," + std::to_string(ed.v[1]) +
                     "): interior edge carries a boundary label");
        } else {
            ++report.num_boundary_edges;
            const auto label = mesh.boundary_label(e);
            if (!label) {
                note("edge " + std::to_string(e) + " (" + std::to_string(ed.v[0]) + "," + std::to_string(ed.v[1]) +
                     "): unlabeled boundary edge");
            } else if (*label == BoundaryLabel::Dirichlet) {
                ++report.num_dirichlet_edges;
            } else {
                ++report.num_neumann_edges;
            }
        }
    }

    for (const auto& [key, label] : mesh.boundary_labels())
        if (!mesh.find_edge(key.first, key.second))
            note("boundary label for (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                 ") does not match any edge");

    if (!problems.empty()) {
        std::ostringstream os;
        os << "mesh validation failed with " << problems.size() << " problem(s):";
        for (const auto& p : problems) os << "\n  " << p;
        throw MeshError(os.str());
    }
    return report;
}

double domain_area(DomainTag domain)
{
    switch (domain) {
    case DomainTag::UnitSquare: return 1.0;
    case DomainTag::SymSquare: return 4.0;
    case DomainTag::LShape: return 3.0;
    case DomainTag::Custom: break;
    }
    throw MeshError("custom domains have no predefined area");
}

std::string_view to_string(MeshFamily family)
{
    switch (family) {
    case MeshFamily::Tri: return "tri";
    case MeshFamily::Quad: return "quad";
    case MeshFamily::Hex: return "hex";
    case MeshFamily::DeformedHex: return "deformed-hex";
    case MeshFamily::Voronoi: return "voronoi";
    case MeshFamily::DeformedQuad: return "deformed-quad";
    }
    return "?";
}

std::string_view to_string(DomainTag domain)
{
    switch (domain) {
    case DomainTag::UnitSquare: return "unit-square";
    case DomainTag::SymSquare: return "sym-square";
    case DomainTag::LShape: return "lshape";
    case DomainTag::Custom: return "custom";
    }
    return "?";
}

std::string_view to_string(BoundaryLabel label)
{
    return label == BoundaryLabel::Dirichlet ? "dirichlet" : "neumann";
}

namespace {

std::string normalized(std::string_view name)
{
    std::string s(name);
    for (char& ch : s) {
        if (ch == '_') ch = '-';
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    return s;
}

} // namespace

MeshFamily parse_family(std::string_view name)
{
    const std::string s = normalized(name);
    if (s == "tri") return MeshFamily::Tri;
    if (s == "quad") return MeshFamily::Quad;
    if (s == "hex") return MeshFamily::Hex;
    if (s == "deformed-hex") return MeshFamily::DeformedHex;
    if (s == "voronoi") return MeshFamily::Voronoi;
    if (s == "deformed-quad") return MeshFamily::DeformedQuad;
    throw ConfigError("unknown mesh family '" + std::string(name) +
                      "' (expected tri, quad, hex, deformed-hex, voronoi, deformed-quad)");
}

DomainTag parse_domain(std::string_view name)
{
    const std::string s = normalized(name);
    if (s == "unit-square") return DomainTag::UnitSquare;
    if (s == "sym-square") return DomainTag::SymSquare;
    if (s == "lshape" || s == "l-shape") return DomainTag::LShape;
    throw ConfigError("unknown domain '" + std::string(name) + "' (expected unit-square, sym-square, lshape)");
}

BoundaryLabel parse_label(std::string_view name)
{
    const std::string s = normalized(name);
    if (s == "dirichlet") return BoundaryLabel::Dirichlet;
    if (s == "neumann") return BoundaryLabel::Neumann;
    throw MeshError("unknown boundary label '" + std::string(name) + "' (expected dirichlet or neumann)");
}

} // namespace vemstokes
