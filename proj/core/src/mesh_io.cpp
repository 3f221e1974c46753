#include "vemstokes/mesh_io.hpp"

#include "vemstokes/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace vemstokes {

namespace {

using nlohmann::json;

int line_of(const std::string& text, std::size_t byte)
{
    const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size()));
    return 1 + static_cast<int>(std::count(text.begin(), end, '\n'));
}

const json& member(const json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end()) throw MeshError(where + ": missing field '" + key + "'");
    return *it;
}

double number(const json& v, const std::string& where)
{
    if (!v.is_number()) throw MeshError(where + ": expected a number");
    return v.get<double>();
}

int index(const json& v, const std::string& where)
{
    if (!v.is_number_integer()) throw MeshError(where + ": expected an integer index");
    const auto i = v.get<long long>();
    if (i < 0 || i > std::numeric_limits<int>::max()) throw MeshError(where + ": index out of range");
    return static_cast<int>(i);
}

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

PolygonalMesh parse_mesh(const std::string& text, DomainTag domain)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw MeshError("mesh JSON parse error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
    }
    if (!doc.is_object()) throw MeshError("mesh file: top level must be an object");
    for (const auto& [key, value] : doc.items())
        if (key != "vertices" && key != "cells" && key != "boundary")
            throw MeshError("mesh file: unknown field '" + key + "'");

    const json& jv = member(doc, "vertices", "mesh file");
    if (!jv.is_array()) throw MeshError("vertices: expected an array");
    std::vector<Point> vertices;
    vertices.reserve(jv.size());
    for (std::size_t i = 0; i < jv.size(); ++i) {
        const std::string where = "vertices[" + std::to_string(i) + "]";
        if (!jv[i].is_array() || jv[i].size() != 2) throw MeshError(where + ": expected [x, y]");
        vertices.emplace_back(number(jv[i][0], where), number(jv[i][1], where));
    }

    const json& jc = member(doc, "cells", "mesh file");
    if (!jc.is_array()) throw MeshError("cells: expected an array");
    std::vector<std::vector<int>> cells(jc.size());
    for (std::size_t c = 0; c < jc.size(); ++c) {
        const std::string where = "cells[" + std::to_string(c) + "]";
        if (!jc[c].is_array()) throw MeshError(where + ": expected an array of vertex indices");
        for (std::size_t j = 0; j < jc[c].size(); ++j) {
            const std::string at = where + "[" + std::to_string(j) + "]";
            const int v = index(jc[c][j], at);
            if (static_cast<std::size_t>(v) >= vertices.size())
                throw MeshError(at + ": vertex " + std::to_string(v) + " out of range");
            cells[c].push_back(v);
        }
    }

    const json& jb = member(doc, "boundary", "mesh file");
    if (!jb.is_array()) throw MeshError("boundary: expected an array");
    std::map<PolygonalMesh::EdgeKey, BoundaryLabel> labels;
    for (std::size_t i = 0; i < jb.size(); ++i) {
        const std::string where = "boundary[" + std::to_string(i) + "]";
        if (!jb[i].is_object()) throw MeshError(where + ": expected an object");
        const int a = index(member(jb[i], "v0", where), where + ".v0");
        const int b = index(member(jb[i], "v1", where), where + ".v1");
        const json& jl = member(jb[i], "label", where);
        if (!jl.is_string()) throw MeshError(where + ".label: expected a string");
        BoundaryLabel label{};
        try {
            label = parse_label(jl.get<std::string>());
        } catch (const Error& e) {
            throw MeshError(where + ".label: " + e.what());
        }
        if (!labels.emplace(PolygonalMesh::EdgeKey{std::min(a, b), std::max(a, b)}, label).second)
            throw MeshError(where + ": duplicate boundary edge");
    }

    PolygonalMesh mesh(std::move(vertices), std::move(cells), std::move(labels), domain);
    validate_mesh(mesh);
    return mesh;
}

PolygonalMesh read_mesh(const std::string& path, DomainTag domain)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open mesh file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_mesh(ss.str(), domain);
    } catch (const MeshError& e) {
        throw MeshError(path + ": " + e.what());
    }
}

std::string format_mesh(const PolygonalMesh& mesh)
{
    std::string out = "{\n  \"vertices\": [";
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        const Point& p = mesh.vertices()[i];
        out += (i ? ",\n    [" : "\n    [") + fmt(p.x()) + ", " + fmt(p.y()) + "]";
    }
    out += "\n  ],\n  \"cells\": [";
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        out += c ? ",\n    [" : "\n    [";
        const auto& cell = mesh.cells()[c];
        for (std::size_t j = 0; j < cell.size(); ++j) out += (j ? ", " : "") + std::to_string(cell[j]);
        out += "]";
    }
    out += "\n  ],\n  \"boundary\": [";
    bool first = true;
    for (const auto& [key, label] : mesh.boundary_labels()) {
        out += first ? "\n    " : ",\n    ";
        first = false;
        out += "{\"v0\": " + std::to_string(key.first) + ", \"v1\": " + std::to_string(key.second) +
               ", \"label\": \"" + std::string(to_string(label)) + "\"}";
    }
    out += "\n  ]\n}\n";
    return out;
}

void write_mesh(const PolygonalMesh& mesh, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write mesh file '" + path + "'");
    out << format_mesh(mesh);
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace vemstokes
