#include "vemstokes/error.hpp"
#include "vemstokes/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

namespace vemstokes {

namespace {

struct Box {
    double x0, y0, x1, y1;
};

Box bounding_box(DomainTag domain)
{
    switch (domain) {
    case DomainTag::UnitSquare: return {0.0, 0.0, 1.0, 1.0};
    case DomainTag::SymSquare:
    case DomainTag::LShape: return {-1.0, -1.0, 1.0, 1.0};
    case DomainTag::Custom: break;
    }
    throw MeshError("mesh generation needs a predefined domain");
}

bool inside_domain(DomainTag domain, const Point& p)
{
    if (domain == DomainTag::LShape) return !(p.x() < 0.0 && p.y() < 0.0);
    return true;
}

std::map<PolygonalMesh::EdgeKey, BoundaryLabel> label_boundary(const std::vector<Point>& xs,
                                                               const std::vector<std::vector<int>>& cells,
                                                               DomainTag domain, BoundaryPreset preset)
{
    if (preset == BoundaryPreset::DomainDefault)
        preset = domain == DomainTag::UnitSquare ? BoundaryPreset::BottomDirichlet : BoundaryPreset::AllDirichlet;

    std::map<PolygonalMesh::EdgeKey, int> count;
    for (const auto& cell : cells)
        for (std::size_t i = 0; i < cell.size(); ++i) {
            const int a = cell[i];
            const int b = cell[(i + 1) % cell.size()];
            ++count[{std::min(a, b), std::max(a, b)}];
        }

    const Box box = bounding_box(domain);
    const double tol = 1e-12 * (box.x1 - box.x0);
    std::map<PolygonalMesh::EdgeKey, BoundaryLabel> labels;
    for (const auto& [key, n] : count) {
        if (n != 1) continue;
        BoundaryLabel label = BoundaryLabel::Dirichlet;
        if (preset == BoundaryPreset::BottomDirichlet) {
            const bool bottom = std::abs(xs[static_cast<std::size_t>(key.first)].y() - box.y0) <= tol &&
                                std::abs(xs[static_cast<std::size_t>(key.second)].y() - box.y0) <= tol;
            label = bottom ? BoundaryLabel::Dirichlet : BoundaryLabel::Neumann;
        }
        labels.emplace(key, label);
    }
    return labels;
}

/// Structured lattice of (mx+1) x (my+1) points over the bounding box, with the
/// subset of lattice rectangles whose centres lie inside the domain.
class Lattice {
public:
    Lattice(DomainTag domain, int mx, int my) : domain_(domain), mx_(mx), my_(my), box_(bounding_box(domain))
    {
        hx_ = (box_.x1 - box_.x0) / mx;
        hy_ = (box_.y1 - box_.y0) / my;
        points_.resize(static_cast<std::size_t>((mx + 1) * (my + 1)));
        for (int j = 0; j <= my; ++j)
            for (int i = 0; i <= mx; ++i) {
                // Exact coordinates on the domain's cut lines.
                const double x = (i == mx) ? box_.x1 : box_.x0 + i * hx_;
                const double y = (j == my) ? box_.y1 : box_.y0 + j * hy_;
                points_[static_cast<std::size_t>(id(i, j))] = Point(x, y);
            }
    }

    [[nodiscard]] int id(int i, int j) const { return i + j * (mx_ + 1); }
    [[nodiscard]] int mx() const { return mx_; }
    [[nodiscard]] int my() const { return my_; }
    [[nodiscard]] double hx() const { return hx_; }
    [[nodiscard]] double hy() const { return hy_; }

    [[nodiscard]] bool kept(int i, int j) const
    {
        if (i < 0 || j < 0 || i >= mx_ || j >= my_) return false;
        const Point c(box_.x0 + (i + 0.5) * hx_, box_.y0 + (j + 0.5) * hy_);
        return inside_domain(domain_, c);
    }

    [[nodiscard]] bool on_boundary(int i, int j) const
    {
        const bool a = kept(i - 1, j - 1), b = kept(i, j - 1), c = kept(i - 1, j), d = kept(i, j);
        return !(a && b && c && d);
    }

    std::vector<Point>& points() { return points_; }

private:
    DomainTag domain_;
    int mx_;
    int my_;
    Box box_;
    double hx_ = 0.0;
    double hy_ = 0.0;
    std::vector<Point> points_;
};

/// Drops unreferenced vertices and renumbers cells.
void compact(std::vector<Point>& xs, std::vector<std::vector<int>>& cells)
{
    std::vector<int> remap(xs.size(), -1);
    std::vector<Point> out;
    for (auto& cell : cells)
        for (int& v : cell) {
            auto& r = remap[static_cast<std::size_t>(v)];
            if (r < 0) {
                r = static_cast<int>(out.size());
                out.push_back(xs[static_cast<std::size_t>(v)]);
            }
            v = r;
        }
    xs = std::move(out);
}

void jitter_interior(Lattice& lat, double amplitude, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    for (int j = 0; j <= lat.my(); ++j)
        for (int i = 0; i <= lat.mx(); ++i) {
            const double dx = u(rng);
            const double dy = u(rng);
            if (lat.on_boundary(i, j)) continue;
            lat.points()[static_cast<std::size_t>(lat.id(i, j))] += Point(dx, dy);
        }
}

std::vector<std::vector<int>> quad_cells(const Lattice& lat)
{
    std::vector<std::vector<int>> cells;
    for (int j = 0; j < lat.my(); ++j)
        for (int i = 0; i < lat.mx(); ++i)
            if (lat.kept(i, j))
                cells.push_back({lat.id(i, j), lat.id(i + 1, j), lat.id(i + 1, j + 1), lat.id(i, j + 1)});
    return cells;
}

std::vector<std::vector<int>> tri_cells(const Lattice& lat)
{
    std::vector<std::vector<int>> cells;
    for (int j = 0; j < lat.my(); ++j)
        for (int i = 0; i < lat.mx(); ++i)
            if (lat.kept(i, j)) {
                const int a = lat.id(i, j), b = lat.id(i + 1, j), c = lat.id(i + 1, j + 1), d = lat.id(i, j + 1);
                cells.push_back({a, b, c});
                cells.push_back({a, c, d});
            }
    return cells;
}

// Brick pattern: in row j, vertical walls sit at lattice columns with (i + j)
// even, so every interior lattice point meets exactly three edges.
std::vector<std::vector<int>> brick_cells(const Lattice& lat)
{
    std::vector<std::vector<int>> cells;
    const int m = lat.mx();
    for (int j = 0; j < lat.my(); ++j) {
        int i = 0;
        while (i < m) {
            if (!lat.kept(i, j)) {
                ++i;
                continue;
            }
            int run_end = i;
            while (run_end < m && lat.kept(run_end, j)) ++run_end;
            std::vector<int> walls{i};
            for (int w = i + 1; w < run_end; ++w)
                if ((w + j) % 2 == 0) walls.push_back(w);
            walls.push_back(run_end);
            for (std::size_t s = 0; s + 1 < walls.size(); ++s) {
                const int a = walls[s], b = walls[s + 1];
                std::vector<int> poly;
                for (int t = a; t <= b; ++t) poly.push_back(lat.id(t, j));
                for (int t = b; t >= a; --t) poly.push_back(lat.id(t, j + 1));
                cells.push_back(std::move(poly));
            }
            i = run_end;
        }
    }
    return cells;
}

// Moving the wall feet by hy/6 turns each brick into a hexagon (regular when
// hy = sqrt(3) hx).
void shape_hexagons(Lattice& lat)
{
    const double delta = lat.hy() / 6.0;
    for (int j = 0; j <= lat.my(); ++j)
        for (int i = 0; i <= lat.mx(); ++i) {
            if (lat.on_boundary(i, j)) continue;
            const bool wall_up = (i + j) % 2 == 0;
            lat.points()[static_cast<std::size_t>(lat.id(i, j))].y() += wall_up ? delta : -delta;
        }
}

// --- Voronoi ---------------------------------------------------------------

using Polygon = std::vector<Point>;

Polygon clip_halfplane(const Polygon& poly, const Point& normal, double offset)
{
    // Keeps {x : normal . x <= offset}.
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % n];
        const double fp = normal.dot(p) - offset;
        const double fq = normal.dot(q) - offset;
        if (fp <= 0.0) out.push_back(p);
        if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
            const double t = fp / (fp - fq);
            out.push_back(p + t * (q - p));
        }
    }
    return out;
}

double polygon_area(const Polygon& poly, Point* centroid)
{
    double a = 0.0;
    Point c = Point::Zero();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % poly.size()];
        const double w = p.x() * q.y() - q.x() * p.y();
        a += w;
        c += w * (p + q);
    }
    a *= 0.5;
    if (centroid && a != 0.0) *centroid = c / (6.0 * a);
    return a;
}

class VoronoiBuilder {
public:
    VoronoiBuilder(const Box& box, int buckets) : box_(box), nb_(std::max(1, buckets))
    {
        bw_ = (box_.x1 - box_.x0) / nb_;
        bh_ = (box_.y1 - box_.y0) / nb_;
    }

    std::vector<Polygon> cells(const std::vector<Point>& gens)
    {
        std::vector<std::vector<int>> bucket(static_cast<std::size_t>(nb_ * nb_));
        for (int g = 0; g < static_cast<int>(gens.size()); ++g)
            bucket[static_cast<std::size_t>(bucket_of(gens[static_cast<std::size_t>(g)]))].push_back(g);

        std::vector<Polygon> out(gens.size());
        std::vector<std::pair<double, int>> cand;
        for (int g = 0; g < static_cast<int>(gens.size()); ++g) {
            const Point& p = gens[static_cast<std::size_t>(g)];
            Polygon poly{{box_.x0, box_.y0}, {box_.x1, box_.y0}, {box_.x1, box_.y1}, {box_.x0, box_.y1}};
            const int bi = std::clamp(static_cast<int>((p.x() - box_.x0) / bw_), 0, nb_ - 1);
            const int bj = std::clamp(static_cast<int>((p.y() - box_.y0) / bh_), 0, nb_ - 1);
            for (int ring = 0; ring <= nb_; ++ring) {
                cand.clear();
                for (int j = bj - ring; j <= bj + ring; ++j)
                    for (int i = bi - ring; i <= bi + ring; ++i) {
                        if (std::max(std::abs(i - bi), std::abs(j - bj)) != ring) continue;
                        if (i < 0 || j < 0 || i >= nb_ || j >= nb_) continue;
                        for (int o : bucket[static_cast<std::size_t>(i + j * nb_)])
                            if (o != g) cand.emplace_back((gens[static_cast<std::size_t>(o)] - p).squaredNorm(), o);
                    }
                std::sort(cand.begin(), cand.end());
                for (const auto& [d2, o] : cand) {
                    const Point& q = gens[static_cast<std::size_t>(o)];
                    const Point nrm = q - p;
                    poly = clip_halfplane(poly, nrm, nrm.dot(0.5 * (p + q)));
                }
                double r = 0.0;
                for (const Point& v : poly) r = std::max(r, (v - p).norm());
                if (ring * std::min(bw_, bh_) > 2.0 * r) break;
            }
            out[static_cast<std::size_t>(g)] = std::move(poly);
        }
        return out;
    }

private:
    int bucket_of(const Point& p) const
    {
        const int i = std::clamp(static_cast<int>((p.x() - box_.x0) / bw_), 0, nb_ - 1);
        const int j = std::clamp(static_cast<int>((p.y() - box_.y0) / bh_), 0, nb_ - 1);
        return i + j * nb_;
    }

    Box box_;
    int nb_;
    double bw_ = 0.0;
    double bh_ = 0.0;
};

/// Merges coincident polygon vertices into a shared vertex list.
class VertexWelder {
public:
    explicit VertexWelder(double tol) : tol_(tol) {}

    int insert(const Point& p)
    {
        const auto ix = static_cast<long long>(std::floor(p.x() / tol_));
        const auto iy = static_cast<long long>(std::floor(p.y() / tol_));
        for (long long dy = -1; dy <= 1; ++dy)
            for (long long dx = -1; dx <= 1; ++dx) {
                auto it = grid_.find(key(ix + dx, iy + dy));
                if (it == grid_.end()) continue;
                for (int v : it->second)
                    if ((points_[static_cast<std::size_t>(v)] - p).norm() <= tol_) return v;
            }
        const int id = static_cast<int>(points_.size());
        points_.push_back(p);
        grid_[key(ix, iy)].push_back(id);
        return id;
    }

    std::vector<Point>& points() { return points_; }

private:
    static std::uint64_t key(long long i, long long j)
    {
        return (static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ULL) ^ static_cast<std::uint64_t>(j);
    }

    double tol_;
    std::vector<Point> points_;
    std::unordered_map<std::uint64_t, std::vector<int>> grid_;
};

PolygonalMesh voronoi_mesh(int n, DomainTag domain, std::uint64_t seed, BoundaryPreset preset)
{
    const Box box = bounding_box(domain);
    const double side = box.x1 - box.x0;
    const int m = n;
    const int ngen = m * m;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(box.x0, box.x1);
    std::uniform_real_distribution<double> uy(box.y0, box.y1);
    std::vector<Point> gens(static_cast<std::size_t>(ngen));
    for (auto& g : gens) {
        const double x = ux(rng);
        const double y = uy(rng);
        g = Point(x, y);
    }

    VoronoiBuilder builder(box, m);
    constexpr int lloyd_iterations = 40;
    for (int it = 0; it < lloyd_iterations; ++it) {
        const auto polys = builder.cells(gens);
        for (std::size_t g = 0; g < gens.size(); ++g) {
            Point c = gens[g];
            if (polygon_area(polys[g], &c) > 0.0) gens[g] = c;
        }
    }

    const auto polys = builder.cells(gens);
    VertexWelder welder(1e-10 * side);
    std::vector<std::vector<int>> cells;
    cells.reserve(polys.size());
    for (const auto& poly : polys) {
        std::vector<int> cell;
        for (const Point& p : poly) {
            const int v = welder.insert(p);
            if (cell.empty() || cell.back() != v) cell.push_back(v);
        }
        while (cell.size() > 1 && cell.front() == cell.back()) cell.pop_back();
        if (cell.size() < 3) throw MeshError("degenerate Voronoi cell; try another seed");
        cells.push_back(std::move(cell));
    }
    std::vector<Point> xs = std::move(welder.points());
    auto labels = label_boundary(xs, cells, domain, preset);
    return PolygonalMesh(std::move(xs), std::move(cells), std::move(labels), domain);
}

} // namespace

LatticeSize lattice_size(MeshFamily family, DomainTag domain, int n)
{
    if (family == MeshFamily::Hex || family == MeshFamily::DeformedHex) {
        // 2n hexagons per unit length, each two columns wide and one row tall.
        const Box box = bounding_box(domain);
        const int across = static_cast<int>(std::lround(2.0 * n * (box.x1 - box.x0)));
        return {2 * across, across};
    }
    return {n, n};
}

PolygonalMesh generate_mesh(const GenerateOptions& opt)
{
    if (opt.n < 1) throw MeshError("N = " + std::to_string(opt.n) + " is too small to tile the domain (need N >= 1)");
    if (opt.domain == DomainTag::Custom) throw MeshError("cannot generate a mesh for a custom domain");
    if (opt.family == MeshFamily::Voronoi) {
        if (opt.domain == DomainTag::LShape)
            throw MeshError("family voronoi does not support domain lshape (supported: unit-square, sym-square)");
        return voronoi_mesh(opt.n, opt.domain, opt.seed, opt.boundary);
    }

    const LatticeSize size = lattice_size(opt.family, opt.domain, opt.n);
    if (opt.domain == DomainTag::LShape && (size.nx % 2 != 0 || size.ny % 2 != 0))
        throw MeshError("family " + std::string(to_string(opt.family)) + " on lshape needs an even N (got " +
                        std::to_string(opt.n) + ")");
    Lattice lat(opt.domain, size.nx, size.ny);
    std::vector<std::vector<int>> cells;
    switch (opt.family) {
    case MeshFamily::Tri: cells = tri_cells(lat); break;
    case MeshFamily::Quad: cells = quad_cells(lat); break;
    case MeshFamily::DeformedQuad:
        jitter_interior(lat, 0.2 * std::min(lat.hx(), lat.hy()), opt.seed);
        cells = quad_cells(lat);
        break;
    case MeshFamily::Hex:
        shape_hexagons(lat);
        cells = brick_cells(lat);
        break;
    case MeshFamily::DeformedHex:
        shape_hexagons(lat);
        jitter_interior(lat, 0.1 * std::min(lat.hx(), lat.hy()), opt.seed);
        cells = brick_cells(lat);
        break;
    case MeshFamily::Voronoi: break;
    }

    std::vector<Point> xs = std::move(lat.points());
    compact(xs, cells);
    auto labels = label_boundary(xs, cells, opt.domain, opt.boundary);
    return PolygonalMesh(std::move(xs), std::move(cells), std::move(labels), opt.domain);
}

PolygonalMesh generate_mesh(MeshFamily family, int n, DomainTag domain, std::uint64_t seed)
{
    GenerateOptions opt;
    opt.family = family;
    opt.n = n;
    opt.domain = domain;
    opt.seed = seed;
    return generate_mesh(opt);
}

} // namespace vemstokes
