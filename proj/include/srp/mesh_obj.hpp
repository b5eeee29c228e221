// Triangulated ASCII OBJ subset: `v` and `f` records only.
#pragma once

#include <istream>
#include <string>

#include "srp/geometry.hpp"

namespace srp::geom {

TriMesh load_mesh(const std::string& path);
TriMesh parse_obj(std::istream& in, const std::string& name = "<stream>");

void save_mesh(const TriMesh& mesh, const std::string& path);

}  // namespace srp::geom
