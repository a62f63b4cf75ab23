#include "volex/mesh.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "volex/error.hpp"

namespace volex {

void validate_mesh(const Mesh& mesh) {
  if (mesh.faces.empty()) throw Error(ErrorCode::kEmptyMesh, "mesh has zero faces");
  const int n = static_cast<int>(mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= n) {
        throw Error(ErrorCode::kIndexOutOfRange, "face index out of range");
      }
    }
  }
}

namespace {

int parse_face_index(const std::string& token, int vertex_count, int line_no) {
  const std::string head = token.substr(0, token.find('/'));
  int raw = 0;
  try {
    std::size_t used = 0;
    raw = std::stoi(head, &used);
    if (used != head.size()) throw std::invalid_argument(head);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse,
                "line " + std::to_string(line_no) + ": bad face index '" + token + "'");
  }
  const int idx = raw > 0 ? raw - 1 : vertex_count + raw;
  if (raw == 0 || idx < 0 || idx >= vertex_count) {
    throw Error(ErrorCode::kIndexOutOfRange, "line " + std::to_string(line_no) +
                                                 ": face index out of range");
  }
  return idx;
}

}  // namespace

Mesh parse_mesh_obj(std::istream& in) {
  Mesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": bad vertex");
      }
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      const int n = static_cast<int>(mesh.vertices.size());
      while (ls >> tok) poly.push_back(parse_face_index(tok, n, line_no));
      if (poly.size() < 3) {
        throw Error(ErrorCode::kParse,
                    "line " + std::to_string(line_no) + ": face with fewer than 3 vertices");
      }
      for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        mesh.faces.push_back({poly[0], poly[i], poly[i + 1]});
      }
    }
  }
  validate_mesh(mesh);
  return mesh;
}

Mesh read_mesh_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return parse_mesh_obj(in);
}

void write_mesh_obj(const Mesh& mesh, const std::filesystem::path& path) {
  validate_mesh(mesh);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

}  // namespace volex
