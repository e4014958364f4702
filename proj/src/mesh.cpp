#include "magshape/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace magshape {

namespace {

constexpr double kMinArea = 1e-16;  // m^2

struct LineReader {
  std::istringstream stream;
  int line_no = 0;

  explicit LineReader(const std::string& text) : stream(text) {}

  // Next non-empty, non-comment line; false at end of input.
  bool next(std::string& out) {
    std::string line;
    while (std::getline(stream, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto is_space = [](unsigned char ch) { return std::isspace(ch) != 0; };
      if (std::all_of(line.begin(), line.end(), is_space)) continue;
      out = line;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("mesh parse error at line " +
                             std::to_string(line_no) + ": " + what);
  }
};

}  // namespace

int TriMesh::region_index(const std::string& tag) const {
  for (int i = 0; i < static_cast<int>(region_tags.size()); ++i)
    if (region_tags[i] == tag) return i;
  return -1;
}

TriangleGeometry triangle_geometry(const Matrix& nodes, const Eigen::Vector3i& tri) {
  const double x1 = nodes(tri[0], 0), y1 = nodes(tri[0], 1);
  const double x2 = nodes(tri[1], 0), y2 = nodes(tri[1], 1);
  const double x3 = nodes(tri[2], 0), y3 = nodes(tri[2], 1);
  TriangleGeometry g;
  g.b << y2 - y3, y3 - y1, y1 - y2;
  g.c << x3 - x2, x1 - x3, x2 - x1;
  g.area = 0.5 * (x1 * g.b[0] + x2 * g.b[1] + x3 * g.b[2]);
  return g;
}

TriangleGeometry triangle_geometry(const TriMesh& mesh, int t) {
  return triangle_geometry(mesh.nodes, mesh.triangles.row(t));
}

double signed_area(const Matrix& nodes, const Eigen::Vector3i& tri) {
  const Vector2 a = nodes.row(tri[0]), b = nodes.row(tri[1]), c = nodes.row(tri[2]);
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

TriMesh load_mesh(const std::string& text) {
  LineReader reader(text);
  TriMesh mesh;
  std::string line, keyword;

  auto expect_section = [&](const char* name, int& count) {
    if (!reader.next(line)) reader.fail(std::string("expected ") + name + " section");
    std::istringstream ss(line);
    if (!(ss >> keyword >> count) || keyword != name || count < 0)
      reader.fail(std::string("expected '") + name + " <count>'");
  };

  int n_nodes = 0;
  expect_section("NODES", n_nodes);
  mesh.nodes.resize(n_nodes, 2);
  for (int i = 0; i < n_nodes; ++i) {
    if (!reader.next(line)) reader.fail("unexpected end of node list");
    std::istringstream ss(line);
    double x, y;
    if (!(ss >> x >> y)) reader.fail("bad node coordinates");
    mesh.nodes(i, 0) = x;
    mesh.nodes(i, 1) = y;
  }

  int n_tris = 0;
  expect_section("TRIANGLES", n_tris);
  mesh.triangles.resize(n_tris, 3);
  mesh.triangle_region.resize(n_tris);
  std::unordered_map<std::string, int> tag_index;
  for (int t = 0; t < n_tris; ++t) {
    if (!reader.next(line)) reader.fail("unexpected end of triangle list");
    std::istringstream ss(line);
    int i, j, k;
    std::string tag;
    if (!(ss >> i >> j >> k >> tag)) reader.fail("bad triangle record");
    for (int v : {i, j, k})
      if (v < 0 || v >= n_nodes) reader.fail("triangle node id out of range");
    Eigen::Vector3i tri(i, j, k);
    double area = signed_area(mesh.nodes, tri);
    if (area < 0.0) {  // fix orientation
      std::swap(tri[1], tri[2]);
      area = -area;
    }
    if (area <= kMinArea) reader.fail("degenerate triangle (area <= 1e-16 m^2)");
    mesh.triangles.row(t) = tri;
    auto [it, inserted] = tag_index.try_emplace(tag, static_cast<int>(mesh.region_tags.size()));
    if (inserted) mesh.region_tags.push_back(tag);
    mesh.triangle_region[t] = it->second;
  }

  int n_edges = 0;
  expect_section("BOUNDARY", n_edges);
  mesh.boundary_edges.resize(n_edges, 2);
  mesh.boundary_labels.resize(n_edges);
  for (int e = 0; e < n_edges; ++e) {
    if (!reader.next(line)) reader.fail("unexpected end of boundary list");
    std::istringstream ss(line);
    int i, j;
    std::string label;
    if (!(ss >> i >> j >> label)) reader.fail("bad boundary record");
    if (i < 0 || i >= n_nodes || j < 0 || j >= n_nodes)
      reader.fail("boundary node id out of range");
    mesh.boundary_edges(e, 0) = i;
    mesh.boundary_edges(e, 1) = j;
    mesh.boundary_labels[e] = label;
  }

  return mesh;
}

TriMesh load_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_mesh(buffer.str());
}

void save_mesh_file(const TriMesh& mesh, const std::string& path,
                    const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  out.precision(17);
  if (!header_comment.empty()) {
    std::istringstream ss(header_comment);
    std::string line;
    while (std::getline(ss, line)) out << "# " << line << "\n";
  }
  out << "NODES " << mesh.num_nodes() << "\n";
  for (int i = 0; i < mesh.num_nodes(); ++i)
    out << mesh.nodes(i, 0) << " " << mesh.nodes(i, 1) << "\n";
  out << "TRIANGLES " << mesh.num_triangles() << "\n";
  for (int t = 0; t < mesh.num_triangles(); ++t)
    out << mesh.triangles(t, 0) << " " << mesh.triangles(t, 1) << " "
        << mesh.triangles(t, 2) << " " << mesh.region_tags[mesh.triangle_region[t]]
        << "\n";
  out << "BOUNDARY " << mesh.boundary_edges.rows() << "\n";
  for (int e = 0; e < mesh.boundary_edges.rows(); ++e)
    out << mesh.boundary_edges(e, 0) << " " << mesh.boundary_edges(e, 1) << " "
        << mesh.boundary_labels[e] << "\n";
}

int find_triangle(const TriMesh& mesh, const Vector2& point, double tol) {
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles.row(t);
    const Vector2 a = mesh.nodes.row(tri[0]), b = mesh.nodes.row(tri[1]),
                  c = mesh.nodes.row(tri[2]);
    const double det = (b.x() - a.x()) * (c.y() - a.y()) -
                       (c.x() - a.x()) * (b.y() - a.y());
    const double l2 = ((point.x() - a.x()) * (c.y() - a.y()) -
                       (c.x() - a.x()) * (point.y() - a.y())) / det;
    const double l3 = ((b.x() - a.x()) * (point.y() - a.y()) -
                       (point.x() - a.x()) * (b.y() - a.y())) / det;
    const double l1 = 1.0 - l2 - l3;
    if (l1 >= -tol && l2 >= -tol && l3 >= -tol) return t;
  }
  return -1;
}

const Material& RegionMap::at(const std::string& tag) const {
  auto it = materials.find(tag);
  if (it == materials.end())
    throw std::runtime_error("no material for region tag '" + tag + "'");
  return it->second;
}

void RegionMap::validate(const TriMesh& mesh) const {
  for (const auto& tag : mesh.region_tags) {
    const Material& m = at(tag);
    if (!(m.nu > 0.0)) throw std::runtime_error("region '" + tag + "': nu must be > 0");
    if (m.sigma < 0.0) throw std::runtime_error("region '" + tag + "': sigma must be >= 0");
    if (m.j_src != 0.0 && m.h_m.squaredNorm() != 0.0)
      throw std::runtime_error("region '" + tag +
                               "': at most one of j_src, h_m may be nonzero");
  }
}

}  // namespace magshape
