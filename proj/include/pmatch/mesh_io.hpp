#pragma once

#include <string>

#include "pmatch/mesh.hpp"

namespace pmatch {

// Reads an ASCII OFF or PLY file; the format is sniffed from the header, so
// the extension is advisory. Throws InputError on malformed content and
// GeometryError on out-of-range indices. Non-triangular faces are rejected.
Mesh load_mesh(const std::string& path);

// Writes ASCII OFF or PLY depending on the extension (.off / .ply).
// Coordinates are written with shortest round-trip precision, so
// save -> load reproduces the mesh bit for bit.
void save_mesh(const std::string& path, const Mesh& mesh);

}  // namespace pmatch
