#include "magshape/die_press.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace magshape {
namespace {

constexpr double kMm = 1e-3;  // geometry is specified in mm, meshes are meters

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

/// Accumulates nodes (merged by position) and CCW triangles, then emits a
/// TriMesh with boundary edges labeled by location.
class MeshBuilder {
 public:
  int region_id(const std::string& tag) {
    for (std::size_t i = 0; i < tags_.size(); ++i) {
      if (tags_[i] == tag) return static_cast<int>(i);
    }
    tags_.push_back(tag);
    return static_cast<int>(tags_.size()) - 1;
  }

  int add_node(const Vector2& v) {
    const std::int64_t qx = std::llround(v.x() / kQuant);
    const std::int64_t qy = std::llround(v.y() / kQuant);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = lookup_.find(pack(qx + dx, qy + dy));
        if (it != lookup_.end() && (nodes_[it->second] - v).norm() <= kQuant) {
          return it->second;
        }
      }
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(v);
    lookup_.emplace(pack(qx, qy), id);
    return id;
  }

  void add_triangle(int a, int b, int c, int region) {
    if (!try_add_triangle(a, b, c, region)) {
      throw std::logic_error("mesh generator produced a degenerate triangle");
    }
  }

  /// Returns false (and emits nothing) on degenerate input; used by the
  /// stitcher where collapsed steps are expected.
  bool try_add_triangle(int a, int b, int c, int region) {
    if (a == b || b == c || a == c) return false;
    const Vector2 &pa = nodes_[a], &pb = nodes_[b], &pc = nodes_[c];
    const double twice_area =
        (pb.x() - pa.x()) * (pc.y() - pa.y()) - (pb.y() - pa.y()) * (pc.x() - pa.x());
    if (std::abs(twice_area) < 1e-16) return false;
    if (twice_area < 0.0) std::swap(b, c);
    triangles_.push_back({a, b, c});
    regions_.push_back(region);
    return true;
  }

  [[nodiscard]] const Vector2& node(int id) const { return nodes_[id]; }
  [[nodiscard]] int num_triangles() const { return static_cast<int>(triangles_.size()); }

  [[nodiscard]] TriMesh finish(double open_plane_x) const {
    TriMesh m;
    m.nodes.resize(static_cast<Eigen::Index>(nodes_.size()), 2);
    for (std::size_t i = 0; i < nodes_.size(); ++i) m.nodes.row(static_cast<Eigen::Index>(i)) = nodes_[i];
    m.triangles.resize(static_cast<Eigen::Index>(triangles_.size()), 3);
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      m.triangles(static_cast<Eigen::Index>(t), 0) = triangles_[t][0];
      m.triangles(static_cast<Eigen::Index>(t), 1) = triangles_[t][1];
      m.triangles(static_cast<Eigen::Index>(t), 2) = triangles_[t][2];
    }
    m.triangle_region = regions_;
    m.region_tags = tags_;

    // edges incident to exactly one triangle form the boundary
    std::unordered_map<std::uint64_t, int> edge_count;
    auto edge_key = [](int a, int b) {
      if (a > b) std::swap(a, b);
      return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
             static_cast<std::uint32_t>(b);
    };
    for (const auto& t : triangles_) {
      for (int e = 0; e < 3; ++e) edge_count[edge_key(t[e], t[(e + 1) % 3])] += 1;
    }
    std::vector<std::pair<int, int>> boundary;
    for (const auto& t : triangles_) {
      for (int e = 0; e < 3; ++e) {
        const int a = t[e], b = t[(e + 1) % 3];
        if (edge_count[edge_key(a, b)] == 1) boundary.emplace_back(a, b);
      }
    }
    m.boundary_edges.resize(static_cast<Eigen::Index>(boundary.size()), 2);
    m.boundary_labels.resize(boundary.size());
    for (std::size_t e = 0; e < boundary.size(); ++e) {
      m.boundary_edges(static_cast<Eigen::Index>(e), 0) = boundary[e].first;
      m.boundary_edges(static_cast<Eigen::Index>(e), 1) = boundary[e].second;
      const double mid_x = 0.5 * (nodes_[boundary[e].first].x() + nodes_[boundary[e].second].x());
      m.boundary_labels[e] = (mid_x < open_plane_x + 1e-9) ? "open" : "outer";
    }
    return m;
  }

 private:
  static constexpr double kQuant = 1e-10;  // merge radius (m), far below any feature size

  static std::uint64_t pack(std::int64_t qx, std::int64_t qy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(qx)) << 32) |
           static_cast<std::uint32_t>(qy);
  }

  std::vector<Vector2> nodes_;
  std::unordered_map<std::uint64_t, int> lookup_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<int> regions_;
  std::vector<std::string> tags_;
};

/// Structured quad grid mapped through `pos(i, j)`, i = 0..ni, j over rows.
template <class F>
void emit_grid(MeshBuilder& b, int ni, int rows, F&& pos, int region) {
  for (int i = 0; i < ni; ++i) {
    for (int j = 0; j + 1 < rows; ++j) {
      const int n00 = b.add_node(pos(i, j));
      const int n10 = b.add_node(pos(i + 1, j));
      const int n11 = b.add_node(pos(i + 1, j + 1));
      const int n01 = b.add_node(pos(i, j + 1));
      b.add_triangle(n00, n10, n11, region);
      b.add_triangle(n00, n11, n01, region);
    }
  }
}

/// Zigzag triangulation of the strip between two node chains that run in the
/// same direction. Degenerate steps (shared endpoints) are skipped.
void stitch_strip(MeshBuilder& b, const std::vector<int>& inner, const std::vector<int>& outer,
                  int region) {
  auto arclength = [&](const std::vector<int>& chain) {
    std::vector<double> s(chain.size(), 0.0);
    for (std::size_t i = 1; i < chain.size(); ++i) {
      s[i] = s[i - 1] + (b.node(chain[i]) - b.node(chain[i - 1])).norm();
    }
    const double total = s.back() > 0.0 ? s.back() : 1.0;
    for (double& v : s) v /= total;
    return s;
  };
  const std::vector<double> si = arclength(inner);
  const std::vector<double> so = arclength(outer);
  std::size_t i = 0, j = 0;
  while (i + 1 < inner.size() || j + 1 < outer.size()) {
    bool advance_inner;
    if (i + 1 >= inner.size()) {
      advance_inner = false;
    } else if (j + 1 >= outer.size()) {
      advance_inner = true;
    } else {
      advance_inner = si[i + 1] <= so[j + 1];
    }
    if (advance_inner) {
      b.try_add_triangle(inner[i], inner[i + 1], outer[j], region);
      ++i;
    } else {
      b.try_add_triangle(inner[i], outer[j + 1], outer[j], region);
      ++j;
    }
  }
}

double guard_anchor_x(const DiePressConfig& c) {
  return std::sqrt(c.guard_arc * c.guard_arc - c.seam_level * c.seam_level);
}

double die_top_x(const DiePressConfig& c) {
  const double alpha = std::asin(c.seam_level / c.reference[2]);
  return c.reference[1] * std::cos(alpha);
}

}  // namespace

std::vector<DesignElement> die_press_elements(const DiePressConfig& c) {
  const double xg = guard_anchor_x(c);
  auto mm_const = [](double v) { return AffineExpr::constant_value(v * kMm); };
  auto mm_param = [](int i) { return AffineExpr::scaled_param(i, kMm); };

  std::vector<DesignElement> out;

  DesignElement yoke;
  yoke.name = "yoke_disc";
  yoke.curve0 = CurveSpec::circle_arc(mm_param(0));
  yoke.curve1 = CurveSpec::fixed_point(Vector2::Zero());
  out.push_back(std::move(yoke));

  DesignElement gap;
  gap.name = "yoke_gap";
  gap.curve0 = CurveSpec::circle_arc(mm_const(c.gap_outer));
  gap.curve1 = CurveSpec::circle_arc(mm_param(0));
  out.push_back(std::move(gap));

  DesignElement air_low;
  air_low.name = "air_lower";
  air_low.curve0 = CurveSpec::ellipse_arc(mm_param(1), mm_param(2), c.seam_level * kMm);
  air_low.curve1 =
      CurveSpec::arc_sector(mm_const(c.guard_arc), 0.0, std::asin(c.seam_level / c.guard_arc));
  out.push_back(std::move(air_low));

  DesignElement mold_low;
  mold_low.name = "mold_lower";
  mold_low.curve0 = CurveSpec::fixed_segment(Vector2(c.wall * kMm, 0.0),
                                             Vector2(c.wall * kMm, c.seam_level * kMm));
  mold_low.curve1 = CurveSpec::ellipse_arc(mm_param(1), mm_param(2), c.seam_level * kMm);
  out.push_back(std::move(mold_low));

  DesignElement air_band;
  air_band.name = "air_band";
  air_band.curve0 = CurveSpec::segment({mm_param(3), mm_const(c.seam_level)},
                                       {mm_param(3), mm_const(c.top_level)});
  air_band.curve1 = CurveSpec::fixed_segment(Vector2(xg * kMm, c.seam_level * kMm),
                                             Vector2(xg * kMm, c.top_level * kMm));
  out.push_back(std::move(air_band));

  DesignElement mold_band;
  mold_band.name = "mold_band";
  mold_band.curve0 = CurveSpec::fixed_segment(Vector2(c.wall * kMm, c.seam_level * kMm),
                                              Vector2(c.wall * kMm, c.top_level * kMm));
  mold_band.curve1 = CurveSpec::segment({mm_param(3), mm_const(c.seam_level)},
                                        {mm_param(3), mm_const(c.top_level)});
  out.push_back(std::move(mold_band));

  return out;
}

TriMesh die_press_mesh(const DiePressConfig& c) {
  if (c.angular % 2 != 0) throw std::invalid_argument("angular division count must be even");
  MeshBuilder b;
  const int yoke_id = b.region_id("yoke");
  const int air_id = b.region_id("air");
  const int cavity_id = b.region_id("cavity");
  const int mold_id = b.region_id("mold");

  const std::vector<DesignElement> elements = die_press_elements(c);
  const int np = static_cast<int>(c.reference.size());
  const ElementFrame air_low = realize_element(elements[2], c.reference, np);
  const ElementFrame mold_low = realize_element(elements[3], c.reference, np);
  const ElementFrame air_band = realize_element(elements[4], c.reference, np);
  const ElementFrame mold_band = realize_element(elements[5], c.reference, np);

  // unit quarter arc sampled at the shared angular grid
  const CurveJet unit_arc =
      realize(CurveSpec::circle_arc(AffineExpr::constant_value(1.0)), c.reference, 0);
  const int na = c.angular;
  std::vector<Vector2> unit(na + 1);
  for (int k = 0; k <= na; ++k) {
    unit[k] = eval_curve(unit_arc.curve, static_cast<double>(k) / na);
  }

  // concentric bands around the origin: yoke fan, air gap, cavity band
  const double r_yoke = c.reference[0] * kMm;
  const double r_gap = c.gap_outer * kMm;
  const double r_cav = c.cavity_outer * kMm;
  auto emit_band = [&](double r0, double r1, int rings, auto&& region_of_cell) {
    for (int j = 0; j < rings; ++j) {
      const double ra = r0 + (r1 - r0) * static_cast<double>(j) / rings;
      const double rb = r0 + (r1 - r0) * static_cast<double>(j + 1) / rings;
      for (int k = 0; k < na; ++k) {
        const int in0 = b.add_node(ra * unit[k]);
        const int in1 = b.add_node(ra * unit[k + 1]);
        const int out0 = b.add_node(rb * unit[k]);
        const int out1 = b.add_node(rb * unit[k + 1]);
        const int region = region_of_cell(k);
        b.add_triangle(in0, out0, out1, region);
        b.add_triangle(in0, out1, in1, region);
      }
    }
  };

  {  // yoke: fan at the center, then rings
    const int center = b.add_node(Vector2::Zero());
    const double r1 = r_yoke / c.yoke_rings;
    for (int k = 0; k < na; ++k) {
      b.add_triangle(center, b.add_node(r1 * unit[k]), b.add_node(r1 * unit[k + 1]), yoke_id);
    }
    emit_band(r1, r_yoke, c.yoke_rings - 1, [&](int) { return yoke_id; });
  }
  emit_band(r_yoke, r_gap, c.gap_rings, [&](int) { return air_id; });
  emit_band(r_gap, r_cav, c.cavity_rings, [&](int k) { return k < na / 2 ? cavity_id : air_id; });

  // seam master positions (mm) shared by the zones meeting at y = seam_level
  const double xg = guard_anchor_x(c);
  const double xj = die_top_x(c);
  const double corner = c.reference[3];
  const std::vector<double> seam_left = linspace(xg, corner, c.seam_left + 1);
  const std::vector<double> seam_mid = linspace(corner, xj, c.seam_corner + 1);
  const std::vector<double> seam_right = linspace(xj, c.wall, c.seam_right + 1);

  auto map_rows = [](const std::vector<double>& xs, double x_zero, double x_one) {
    std::vector<double> yh(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) yh[i] = (x_zero - xs[i]) / (x_zero - x_one);
    return yh;
  };

  const int ne = c.die_divisions;
  {  // morphing air between the die face and the guard arc
    std::vector<double> xs(seam_left);
    xs.insert(xs.end(), seam_mid.begin() + 1, seam_mid.end());
    const std::vector<double> yh = map_rows(xs, xj, xg);  // 0 at die top, 1 at guard anchor
    emit_grid(
        b, ne, static_cast<int>(yh.size()),
        [&](int i, int j) { return air_low.map(static_cast<double>(i) / ne, yh[j]); }, air_id);
  }
  {  // mold between the wall and the die face
    const std::vector<double> yh = map_rows(seam_right, c.wall, xj);
    emit_grid(
        b, ne, static_cast<int>(yh.size()),
        [&](int i, int j) { return mold_low.map(static_cast<double>(i) / ne, yh[j]); }, mold_id);
  }
  const int nv = c.band_rows;
  {  // upper air band between the fixed column and the press corner
    const std::vector<double> yh = map_rows(seam_left, corner, xg);
    emit_grid(
        b, nv, static_cast<int>(yh.size()),
        [&](int i, int j) { return air_band.map(static_cast<double>(i) / nv, yh[j]); }, air_id);
  }
  {  // upper mold band between the press corner and the wall
    std::vector<double> xs;
    xs.push_back(corner);
    xs.insert(xs.end(), seam_mid.begin() + 1, seam_mid.end());
    xs.insert(xs.end(), seam_right.begin() + 1, seam_right.end());
    const std::vector<double> yh = map_rows(xs, c.wall, corner);
    emit_grid(
        b, nv, static_cast<int>(yh.size()),
        [&](int i, int j) { return mold_band.map(static_cast<double>(i) / nv, yh[j]); }, mold_id);
  }

  {  // stitched air between the cavity rim and the guard arc / band column / top edge
    std::vector<int> inner, outer;
    for (int k = 0; k <= na; ++k) inner.push_back(b.add_node(r_cav * unit[k]));
    for (int i = 0; i <= ne; ++i) {
      outer.push_back(b.add_node(air_low.map(static_cast<double>(i) / ne, 1.0)));
    }
    for (int i = 1; i <= nv; ++i) {
      outer.push_back(b.add_node(air_band.map(static_cast<double>(i) / nv, 1.0)));
    }
    const int top_steps = 4;
    for (int t = 1; t <= top_steps; ++t) {
      const double x = xg * (1.0 - static_cast<double>(t) / top_steps);
      outer.push_back(b.add_node(Vector2(x * kMm, c.top_level * kMm)));
    }
    stitch_strip(b, inner, outer, air_id);
  }

  {  // right filler between the wall and the domain edge
    std::vector<double> ys;  // mm, matches the wall-side rows of both mold zones
    for (int i = 0; i <= ne; ++i) ys.push_back(c.seam_level * static_cast<double>(i) / ne);
    for (int i = 1; i <= nv; ++i) {
      ys.push_back(c.seam_level + (c.top_level - c.seam_level) * static_cast<double>(i) / nv);
    }
    const std::vector<double> xs = linspace(c.wall, c.width, c.filler_columns + 1);
    emit_grid(
        b, c.filler_columns, static_cast<int>(ys.size()),
        [&](int i, int j) { return Vector2(xs[i] * kMm, ys[j] * kMm); }, air_id);
  }

  return b.finish(0.0);
}

std::vector<Vector2> die_press_goal_defaults() {
  return {{0.32511598784766921, 0.0},
          {0.3231284200233091, 0.040557459436477088},
          {0.32076908354587086, 0.06222115558499329},
          {0.3187335447643897, 0.083279197809316419},
          {0.31334731547515304, 0.12717388761817919},
          {0.3118411708713163, 0.15134718556724377},
          {0.31934822231788051, 0.17073593782340898},
          {0.32859188326894273, 0.19107231264158744},
          {0.36858911250771098, 0.1928859518607661}};
}

RegionMap die_press_regions(const DiePressConfig& c) {
  RegionMap map;
  Material iron;
  iron.nu = 1.0 / (c.iron_mu_r * kMu0);
  map.materials["yoke"] = iron;
  map.materials["mold"] = iron;
  map.materials["air"] = Material{};
  map.materials["cavity"] = Material{};
  return map;
}

DirichletSpec die_press_boundary(const DiePressConfig& c) {
  DirichletSpec bc;
  bc["outer"] = BoundaryValue{0.0, 0.0, c.drive};
  return bc;
}

std::vector<FluxTarget> die_press_targets(const DiePressConfig& c) {
  std::vector<FluxTarget> targets(c.samples);
  for (int s = 0; s < c.samples; ++s) {
    const double phi = c.sample_sweep * static_cast<double>(s) / (c.samples - 1);
    targets[s].location =
        Vector2(std::cos(phi), std::sin(phi)) * (c.sample_radius * kMm);
    targets[s].goal = (s < static_cast<int>(c.goals.size())) ? c.goals[s] : Vector2::Zero();
  }
  return targets;
}

FieldProblemConfig die_press_field_config(const DiePressConfig& c) {
  FieldProblemConfig fc;
  fc.regions = die_press_regions(c);
  fc.boundary = die_press_boundary(c);
  fc.length = c.length;
  fc.targets = die_press_targets(c);
  fc.method = c.method;
  return fc;
}

BoxBounds die_press_box(const DiePressConfig& c) { return BoxBounds{c.lower, c.upper}; }

std::shared_ptr<DeformedFieldProblem> die_press_problem(const DiePressConfig& c) {
  return die_press_problem(c, die_press_mesh(c));
}

std::shared_ptr<DeformedFieldProblem> die_press_problem(const DiePressConfig& c, TriMesh mesh) {
  DeformableMesh binding = bind_elements(mesh, die_press_elements(c), c.reference);
  return std::make_shared<DeformedFieldProblem>(std::move(binding), die_press_field_config(c));
}

namespace {

struct CoarseVertex {
  AffineExpr x, y;

  [[nodiscard]] bool moving() const { return !x.terms.empty() || !y.terms.empty(); }
  [[nodiscard]] Vector2 at(const Vector& p) const { return Vector2(x(p), y(p)); }
};

CoarseVertex fixed_vertex(double x_mm, double y_mm) {
  return {AffineExpr::constant_value(x_mm * kMm), AffineExpr::constant_value(y_mm * kMm)};
}

}  // namespace

AffineModel die_press_affine_model(const DiePressConfig& c, int refine) {
  if (refine < 1) throw std::invalid_argument("refinement level must be positive");
  const double deg15 = std::atan(1.0) / 3.0;  // 15 degrees

  std::vector<CoarseVertex> v;
  auto add = [&](CoarseVertex cv) {
    v.push_back(std::move(cv));
    return static_cast<int>(v.size()) - 1;
  };

  const int O = add(fixed_vertex(0.0, 0.0));
  std::array<int, 7> C{}, R{}, S{};
  for (int k = 0; k <= 6; ++k) {
    const double cs = std::cos(deg15 * k), sn = std::sin(deg15 * k);
    C[k] = add({AffineExpr::scaled_param(0, cs * kMm), AffineExpr::scaled_param(0, sn * kMm)});
    R[k] = add(fixed_vertex(c.gap_outer * cs, c.gap_outer * sn));
    S[k] = add(fixed_vertex(c.cavity_outer * cs, c.cavity_outer * sn));
  }
  const int G0 = add(fixed_vertex(13.5, 0.0));
  const double t_stop = std::asin(c.seam_level / c.reference[2]);
  std::array<int, 4> E{};
  for (int i = 0; i < 4; ++i) {
    const double t = t_stop * static_cast<double>(i) / 4.0;
    E[i] = add({AffineExpr::scaled_param(1, std::cos(t) * kMm),
                AffineExpr::scaled_param(2, std::sin(t) * kMm)});
  }
  const int K4 = add({AffineExpr::scaled_param(3, kMm), AffineExpr::constant_value(c.seam_level * kMm)});
  const int M4 = add({AffineExpr::scaled_param(3, kMm), AffineExpr::constant_value(c.top_level * kMm)});
  const int B0 = add(fixed_vertex(c.wall, 0.0));
  const int B1 = add(fixed_vertex(c.wall, 5.25));
  const int B2 = add(fixed_vertex(c.wall, c.seam_level));
  const int B3 = add(fixed_vertex(c.wall, c.top_level));
  const int P0 = add(fixed_vertex(c.width, 0.0));
  const int P1 = add(fixed_vertex(c.width, 6.0));
  const int P2 = add(fixed_vertex(c.width, c.top_level));
  const int T1 = add(fixed_vertex(4.0, c.top_level));
  const int T2 = add(fixed_vertex(7.5, c.top_level));

  struct CoarseTri {
    std::array<int, 3> v;
    const char* tag;
  };
  std::vector<CoarseTri> coarse;
  for (int k = 0; k < 6; ++k) coarse.push_back({{O, C[k], C[k + 1]}, "yoke"});
  for (int k = 0; k < 6; ++k) {
    coarse.push_back({{C[k], R[k], R[k + 1]}, "air"});
    coarse.push_back({{C[k], R[k + 1], C[k + 1]}, "air"});
  }
  for (int k = 0; k < 6; ++k) {
    const char* tag = k < 3 ? "cavity" : "air";
    coarse.push_back({{R[k], S[k], S[k + 1]}, tag});
    coarse.push_back({{R[k], S[k + 1], R[k + 1]}, tag});
  }
  const std::array<std::array<int, 3>, 14> air_zone = {{{S[0], G0, S[1]},
                                                        {G0, E[0], E[1]},
                                                        {S[1], G0, E[1]},
                                                        {S[1], E[1], S[2]},
                                                        {S[2], E[1], E[2]},
                                                        {S[2], E[2], S[3]},
                                                        {S[3], E[2], E[3]},
                                                        {S[3], E[3], S[4]},
                                                        {S[4], E[3], K4},
                                                        {S[4], K4, M4},
                                                        {S[4], M4, T2},
                                                        {S[4], T2, T1},
                                                        {S[4], T1, S[5]},
                                                        {S[5], T1, S[6]}}};
  for (const auto& t : air_zone) coarse.push_back({t, "air"});
  const std::array<std::array<int, 3>, 8> mold_zone = {{{E[0], B0, B1},
                                                        {E[0], B1, E[1]},
                                                        {E[1], B1, E[2]},
                                                        {E[2], B1, B2},
                                                        {E[2], B2, E[3]},
                                                        {E[3], B2, K4},
                                                        {K4, B2, M4},
                                                        {M4, B2, B3}}};
  for (const auto& t : mold_zone) coarse.push_back({t, "mold"});
  const std::array<std::array<int, 3>, 4> filler_zone = {
      {{B0, P0, P1}, {B0, P1, B2}, {B2, P1, P2}, {B2, P2, B3}}};
  for (const auto& t : filler_zone) coarse.push_back({t, "air"});

  // uniform refinement; children stay with their coarse triangle
  MeshBuilder b;
  AffineModel model;
  const int k = refine;
  for (const CoarseTri& ct : coarse) {
    const int region = b.region_id(ct.tag);
    const Vector2 p0 = v[ct.v[0]].at(c.reference);
    const Vector2 p1 = v[ct.v[1]].at(c.reference);
    const Vector2 p2 = v[ct.v[2]].at(c.reference);
    auto lattice = [&](int i, int j) {  // i along v0->v1, j along v0->v2
      const double a = static_cast<double>(i) / k, bb = static_cast<double>(j) / k;
      return b.add_node(p0 + a * (p1 - p0) + bb * (p2 - p0));
    };
    std::vector<int> children;
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i + j < k; ++i) {
        const int n00 = lattice(i, j), n10 = lattice(i + 1, j), n01 = lattice(i, j + 1);
        b.add_triangle(n00, n10, n01, region);
        children.push_back(static_cast<int>(b.num_triangles()) - 1);
        if (i + j + 2 <= k) {
          const int n11 = lattice(i + 1, j + 1);
          b.add_triangle(n10, n11, n01, region);
          children.push_back(static_cast<int>(b.num_triangles()) - 1);
        }
      }
    }
    const bool moving =
        v[ct.v[0]].moving() || v[ct.v[1]].moving() || v[ct.v[2]].moving();
    if (moving) {
      AffineSubdomain sub;
      for (int i = 0; i < 3; ++i) {
        sub.vertices[i][0] = v[ct.v[i]].x;
        sub.vertices[i][1] = v[ct.v[i]].y;
      }
      sub.triangles = std::move(children);
      model.subdomains.push_back(std::move(sub));
    }
  }
  model.mesh = b.finish(0.0);
  return model;
}

std::shared_ptr<AffineFieldProblem> die_press_affine_problem(const DiePressConfig& c, int refine) {
  AffineModel model = die_press_affine_model(c, refine);
  return die_press_affine_problem(c, std::move(model.mesh), std::move(model.subdomains));
}

std::shared_ptr<AffineFieldProblem> die_press_affine_problem(
    const DiePressConfig& c, TriMesh mesh, std::vector<AffineSubdomain> subdomains) {
  const Pattern pattern = build_pattern(mesh);
  AffineDecomposition decomposition = build_decomposition(
      mesh, die_press_regions(c), std::move(subdomains), c.reference, c.length, pattern);
  return std::make_shared<AffineFieldProblem>(std::move(mesh), std::move(decomposition),
                                              die_press_field_config(c));
}

}  // namespace magshape
