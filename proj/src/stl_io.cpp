#include "tmsnav/stl_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>
#include <vector>

#include "tmsnav/error.hpp"

namespace tmsnav {

namespace {

class Tokenizer {
 public:
  explicit Tokenizer(std::istream& in) : in_(in) {}

  bool next(std::string& token) {
    if (!(in_ >> token)) return false;
    ++count_;
    return true;
  }

  std::string expect_any() {
    std::string token;
    if (!next(token)) fail("unexpected end of file");
    return token;
  }

  void expect(const std::string& keyword) {
    const std::string token = expect_any();
    if (token != keyword) fail("expected '" + keyword + "', found '" + token + "'");
  }

  double number() {
    const std::string token = expect_any();
    double value = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) fail("invalid number '" + token + "'");
    return value;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::ParseError, "STL token " + std::to_string(count_) + ": " + what);
  }

 private:
  std::istream& in_;
  std::size_t count_ = 0;
};

}  // namespace

TriangleMesh parse_ascii_stl(std::istream& in) {
  Tokenizer tok(in);
  tok.expect("solid");

  std::vector<Vec3> vertices;
  std::vector<TriangleIndices> triangles;
  std::map<std::tuple<double, double, double>, std::uint32_t> welded;

  std::string token;
  // The solid name is optional free text up to the first "facet" or "endsolid".
  while (true) {
    token = tok.expect_any();
    if (token == "facet" || token == "endsolid") break;
  }

  while (token == "facet") {
    tok.expect("normal");
    for (int i = 0; i < 3; ++i) tok.number();
    tok.expect("outer");
    tok.expect("loop");
    TriangleIndices tri{};
    for (auto& index : tri) {
      tok.expect("vertex");
      const double x = tok.number();
      const double y = tok.number();
      const double z = tok.number();
      const auto [it, inserted] =
          welded.try_emplace({x, y, z}, static_cast<std::uint32_t>(vertices.size()));
      if (inserted) vertices.emplace_back(x, y, z);
      index = it->second;
    }
    tok.expect("endloop");
    tok.expect("endfacet");
    triangles.push_back(tri);
    token = tok.expect_any();
  }
  if (token != "endsolid") tok.fail("expected 'facet' or 'endsolid', found '" + token + "'");

  return TriangleMesh(std::move(vertices), std::move(triangles));
}

TriangleMesh load_ascii_stl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open mesh file " + path.string());
  return parse_ascii_stl(in);
}

void write_ascii_stl(const TriangleMesh& mesh, std::ostream& out, const std::string& solid_name) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "solid " << solid_name << '\n';
  for (std::uint32_t i = 0; i < mesh.size(); ++i) {
    const Vec3 n = triangle_normal(mesh, i);
    buf << "  facet normal " << n.x() << ' ' << n.y() << ' ' << n.z() << '\n';
    buf << "    outer loop\n";
    for (const auto& v : mesh.triangle_vertices(i)) {
      buf << "      vertex " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    }
    buf << "    endloop\n  endfacet\n";
  }
  buf << "endsolid " << solid_name << '\n';
  out << buf.str();
}

void save_ascii_stl(const TriangleMesh& mesh, const std::filesystem::path& path,
                    const std::string& solid_name) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write mesh file " + path.string());
  write_ascii_stl(mesh, out, solid_name);
}

}  // namespace tmsnav
