#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vemstokes {

using Point = Eigen::Vector2d;

enum class BoundaryLabel { Dirichlet, Neumann };
enum class DomainTag { UnitSquare, SymSquare, LShape, Custom };
enum class MeshFamily { Tri, Quad, Hex, DeformedHex, Voronoi, DeformedQuad };

/// Unique mesh edge. Vertices are stored with v[0] < v[1]; the global normal is
/// the unit tangent (x[v1] - x[v0]) rotated by -90 degrees.
struct Edge {
    std::array<int, 2> v{};
    double length = 0.0;
    Point midpoint = Point::Zero();
    Point tangent = Point::Zero();
    Point normal = Point::Zero();
    std::vector<int> cells;  // adjacent cells in increasing order

    [[nodiscard]] bool is_boundary() const { return cells.size() == 1; }
};

/// Edge as seen from one cell: local edge i joins cell vertex i to vertex i+1.
struct CellEdge {
    int edge = -1;
    int sign = 1;  // +1 when the cell's outward normal equals the global edge normal
};

/// Immutable polygonal mesh. Construction derives edges and cell geometry but
/// does not enforce topological validity; see validate_mesh().
class PolygonalMesh {
public:
    using EdgeKey = std::pair<int, int>;

    PolygonalMesh() = default;
    PolygonalMesh(std::vector<Point> vertices,
                  std::vector<std::vector<int>> cells,
                  std::map<EdgeKey, BoundaryLabel> boundary_labels,
                  DomainTag domain = DomainTag::Custom);

    [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
    [[nodiscard]] std::size_t num_cells() const { return cells_.size(); }
    [[nodiscard]] std::size_t num_edges() const { return edges_.size(); }

    [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
    [[nodiscard]] const Point& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] const std::vector<std::vector<int>>& cells() const { return cells_; }
    [[nodiscard]] std::span<const int> cell(int c) const { return cells_[static_cast<std::size_t>(c)]; }
    [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
    [[nodiscard]] const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
    [[nodiscard]] std::span<const CellEdge> cell_edges(int c) const { return cell_edges_[static_cast<std::size_t>(c)]; }

    [[nodiscard]] double cell_area(int c) const { return areas_[static_cast<std::size_t>(c)]; }
    [[nodiscard]] const Point& cell_centroid(int c) const { return centroids_[static_cast<std::size_t>(c)]; }
    [[nodiscard]] double cell_diameter(int c) const { return diameters_[static_cast<std::size_t>(c)]; }

    [[nodiscard]] std::optional<BoundaryLabel> boundary_label(int e) const;
    [[nodiscard]] const std::map<EdgeKey, BoundaryLabel>& boundary_labels() const { return labels_; }
    [[nodiscard]] DomainTag domain() const { return domain_; }

    /// Id of the edge joining two vertices, if it exists.
    [[nodiscard]] std::optional<int> find_edge(int a, int b) const;

    /// Copy of this mesh with every boundary edge relabeled by `rule(edge)`.
    template <class Rule>
    [[nodiscard]] PolygonalMesh relabeled(Rule&& rule) const
    {
        std::map<EdgeKey, BoundaryLabel> labels;
        for (const Edge& e : edges_)
            if (e.is_boundary()) labels[{e.v[0], e.v[1]}] = rule(e);
        return PolygonalMesh(vertices_, cells_, std::move(labels), domain_);
    }

    friend bool operator==(const PolygonalMesh& a, const PolygonalMesh& b);

private:
    std::vector<Point> vertices_;
    std::vector<std::vector<int>> cells_;
    std::map<EdgeKey, BoundaryLabel> labels_;
    DomainTag domain_ = DomainTag::Custom;

    std::vector<Edge> edges_;
    std::vector<std::vector<CellEdge>> cell_edges_;
    std::map<EdgeKey, int> edge_index_;
    std::vector<double> areas_;
    std::vector<Point> centroids_;
    std::vector<double> diameters_;
};

struct MeshQualityReport {
    double h = 0.0;               // max cell diameter
    double min_edge_ratio = 0.0;  // min over cells of (shortest edge / diameter)
    double total_area = 0.0;
    std::size_t num_cells = 0;
    std::size_t num_edges = 0;
    std::size_t num_vertices = 0;
    std::size_t num_boundary_edges = 0;
    std::size_t num_dirichlet_edges = 0;
    std::size_t num_neumann_edges = 0;
};

/// Checks orientation, edge sharing and boundary labelling. Throws MeshError
/// listing every violation; poor quality alone is only reported.
MeshQualityReport validate_mesh(const PolygonalMesh& mesh);

enum class BoundaryPreset {
    DomainDefault,    // unit square -> BottomDirichlet, other domains -> AllDirichlet
    AllDirichlet,
    BottomDirichlet,  // y = ymin Dirichlet, rest Neumann
};

struct GenerateOptions {
    MeshFamily family = MeshFamily::Tri;
    int n = 8;
    DomainTag domain = DomainTag::UnitSquare;
    std::uint64_t seed = 0;
    BoundaryPreset boundary = BoundaryPreset::DomainDefault;
};

/// Lattice behind the structured families. N counts subdivisions per side of
/// the domain's bounding box; the hexagonal families instead place 2N
/// hexagons per unit length, each spanning two columns and one row.
struct LatticeSize {
    int nx = 0;
    int ny = 0;
};
LatticeSize lattice_size(MeshFamily family, DomainTag domain, int n);

PolygonalMesh generate_mesh(const GenerateOptions& options);
PolygonalMesh generate_mesh(MeshFamily family, int n, DomainTag domain, std::uint64_t seed = 0);

double domain_area(DomainTag domain);

std::string_view to_string(MeshFamily family);
std::string_view to_string(DomainTag domain);
std::string_view to_string(BoundaryLabel label);
MeshFamily parse_family(std::string_view name);
DomainTag parse_domain(std::string_view name);
BoundaryLabel parse_label(std::string_view name);

} // namespace vemstokes
