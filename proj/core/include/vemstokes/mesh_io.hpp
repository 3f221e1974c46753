#pragma once

#include "vemstokes/mesh.hpp"

#include <string>

namespace vemstokes {

/// JSON mesh file: {"vertices": [[x, y], ...], "cells": [[i, j, k, ...], ...],
/// "boundary": [{"v0": a, "v1": b, "label": "dirichlet"|"neumann"}, ...]}.
/// Cells are 0-based and counter-clockwise.

/// Parses and validates. Throws IoError when the file cannot be read and
/// MeshError on malformed content (with line or field context) or on a
/// mesh that fails validate_mesh().
PolygonalMesh read_mesh(const std::string& path, DomainTag domain = DomainTag::Custom);
PolygonalMesh parse_mesh(const std::string& text, DomainTag domain = DomainTag::Custom);

/// Keys in the order vertices, cells, boundary; floats with 17 significant
/// digits so a round trip is exact.
std::string format_mesh(const PolygonalMesh& mesh);
void write_mesh(const PolygonalMesh& mesh, const std::string& path);

} // namespace vemstokes
