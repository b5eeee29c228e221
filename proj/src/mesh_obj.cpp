#include "srp/mesh_obj.hpp"

#include <fstream>
#include <sstream>

namespace srp::geom {

namespace {

[[noreturn]] void fail(const std::string& name, int line, const std::string& what) {
    throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
}

// Face tokens may carry /vt/vn suffixes; only the vertex index is used.
int face_index(const std::string& token, const std::string& name, int line) {
    std::string head = token.substr(0, token.find('/'));
    try {
        size_t used = 0;
        int idx = std::stoi(head, &used);
        if (used != head.size()) throw std::invalid_argument(head);
        return idx;
    } catch (const std::exception&) {
        fail(name, line, "bad face index '" + token + "'");
    }
}

}  // namespace

TriMesh parse_obj(std::istream& in, const std::string& name) {
    TriMesh mesh;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) fail(name, lineno, "vertex needs three coordinates");
            mesh.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) idx.push_back(face_index(tok, name, lineno));
            if (idx.size() != 3) fail(name, lineno, "non-triangular face with " + std::to_string(idx.size()) + " vertices");
            Eigen::Vector3i tri;
            for (int k = 0; k < 3; ++k) {
                int i = idx[k];
                if (i < 0) i = static_cast<int>(mesh.vertices.size()) + 1 + i;  // OBJ relative indexing
                if (i < 1 || i > static_cast<int>(mesh.vertices.size()))
                    fail(name, lineno, "vertex index " + std::to_string(idx[k]) + " out of range");
                tri[k] = i - 1;
            }
            mesh.triangles.push_back(tri);
        }
        // vn/vt/o/g/s/usemtl/mtllib are ignored
    }
    if (mesh.triangles.empty()) fail(name, lineno, "mesh has no faces");
    mesh.validate();
    return mesh;
}

TriMesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file: " + path);
    return parse_obj(in, path);
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write mesh file: " + path);
    out.precision(9);
    for (const auto& v : mesh.vertices) out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
    for (const auto& t : mesh.triangles)
        out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace srp::geom
