#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "meshblend/mesh.hpp"

namespace meshblend {

class ObjError : public std::runtime_error {
 public:
  ObjError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Reads `v x y z` and triangular `f a b c` records (1-based; `/`-suffixed
// texture/normal indices are ignored). Other record types are skipped.
TriMesh parse_obj(std::istream& in, const std::string& source = "<stream>");
TriMesh load_obj(const std::filesystem::path& path);

// Coordinates are written in shortest round-trip form, so output is lossless
// and byte-stable for identical input.
void write_obj(std::ostream& out, const TriMesh& mesh);
void save_obj(const TriMesh& mesh, const std::filesystem::path& path);

std::string format_double(double x);

}  // namespace meshblend
