#include "meshblend/obj_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace meshblend {

ObjError::ObjError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

double parse_coord(const std::string& tok, const std::string& source, std::size_t line) {
  double x = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last) throw ObjError(source, line, "bad coordinate '" + tok + "'");
  return x;
}

std::size_t parse_index(const std::string& tok, const std::string& source, std::size_t line) {
  const std::string head = tok.substr(0, tok.find('/'));
  long long idx = 0;
  auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
  if (ec != std::errc() || ptr != head.data() + head.size() || head.empty()) {
    throw ObjError(source, line, "bad face index '" + tok + "'");
  }
  if (idx < 1) throw ObjError(source, line, "face index " + head + " out of range");
  return static_cast<std::size_t>(idx - 1);
}

}  // namespace

TriMesh parse_obj(std::istream& in, const std::string& source) {
  std::vector<double> coords;
  std::vector<Face> faces;
  std::vector<std::size_t> face_lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (tag == "v") {
      if (toks.size() != 3 && toks.size() != 4) {
        throw ObjError(source, lineno, "vertex record needs 3 coordinates");
      }
      for (int k = 0; k < 3; ++k) coords.push_back(parse_coord(toks[k], source, lineno));
    } else if (tag == "f") {
      if (toks.size() != 3) {
        throw ObjError(source, lineno,
                       "non-triangular face with " + std::to_string(toks.size()) + " vertices");
      }
      faces.push_back({parse_index(toks[0], source, lineno), parse_index(toks[1], source, lineno),
                       parse_index(toks[2], source, lineno)});
      face_lines.push_back(lineno);
    }
  }
  const std::size_t n = coords.size() / 3;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (std::size_t v : faces[i]) {
      if (v >= n) {
        throw ObjError(source, face_lines[i],
                       "face index " + std::to_string(v + 1) + " out of range (" +
                           std::to_string(n) + " vertices)");
      }
    }
    const Face& f = faces[i];
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      throw ObjError(source, face_lines[i], "degenerate face");
    }
  }
  return TriMesh(Matrix(n, 3, std::move(coords)), std::move(faces));
}

TriMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_obj(in, path.string());
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

void write_obj(std::ostream& out, const TriMesh& mesh) {
  const Matrix& v = mesh.vertices();
  for (std::size_t i = 0; i < v.rows(); ++i) {
    out << "v " << format_double(v(i, 0)) << ' ' << format_double(v(i, 1)) << ' '
        << format_double(v(i, 2)) << '\n';
  }
  for (const Face& f : mesh.faces()) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_obj(out, mesh);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace meshblend
