#include "magshape/config.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"
#include "magshape/affine.hpp"
#include "magshape/design_element.hpp"
#include "magshape/fem.hpp"
#include "magshape/mesh.hpp"
#include "magshape/nurbs.hpp"
#include "magshape/params.hpp"
#include "magshape/types.hpp"

namespace magshape {
namespace {

using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + path + ": " + what);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

/// Strict schema: unknown keys are configuration bugs, not extensions.
void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail(path, "unknown key '" + item.key() + "'");
  }
}

double number_at(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

int int_at(const json& obj, const std::string& path, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

bool bool_at(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

std::string string_at(const json& obj, const std::string& path, const char* key,
                      const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::uint64_t uint64_at(const json& obj, const std::string& path, const char* key,
                        std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<std::uint64_t>();
}

/// Fixed-size numeric array; null entries read as +inf when allowed.
Vector vector_at(const json& obj, const std::string& path, const char* key, int size,
                 const Vector& fallback, bool null_is_inf = false) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || (size >= 0 && static_cast<int>(v.size()) != size)) {
    fail(path + "." + key, "expected an array of " + std::to_string(size) + " numbers");
  }
  Vector out(static_cast<int>(v.size()));
  for (int i = 0; i < static_cast<int>(v.size()); ++i) {
    const json& e = v.at(i);
    if (null_is_inf && e.is_null()) {
      out[i] = kInf;
    } else if (e.is_number()) {
      out[i] = e.get<double>();
    } else {
      fail(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
    }
  }
  return out;
}

Vector2 vector2_at(const json& obj, const std::string& path, const char* key,
                   const Vector2& fallback) {
  const Vector v = vector_at(obj, path, key, 2, (Vector(2) << fallback.x(), fallback.y()).finished());
  return {v[0], v[1]};
}

SolveMethod method_at(const json& obj, const std::string& path, const char* key,
                      SolveMethod fallback) {
  const std::string name =
      string_at(obj, path, key, fallback == SolveMethod::Direct ? "direct" : "cg");
  if (name == "direct") return SolveMethod::Direct;
  if (name == "cg") return SolveMethod::ConjugateGradient;
  fail(path + "." + key, "expected 'direct' or 'cg'");
}

/// Expression: a bare number, or {"const": c, "terms": [[param, coeff], ...]}.
AffineExpr expr_from(const json& j, const std::string& path) {
  if (j.is_number()) return AffineExpr::constant_value(j.get<double>());
  require_object(j, path);
  check_keys(j, path, {"const", "terms"});
  AffineExpr e;
  e.constant = number_at(j, path, "const", 0.0);
  if (j.contains("terms")) {
    const json& terms = j.at("terms");
    if (!terms.is_array()) fail(path + ".terms", "expected an array of [param, coeff] pairs");
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const json& pair = terms.at(t);
      const std::string tpath = path + ".terms[" + std::to_string(t) + "]";
      if (!pair.is_array() || pair.size() != 2 || !pair.at(0).is_number_integer() ||
          !pair.at(1).is_number()) {
        fail(tpath, "expected [param_index, coefficient]");
      }
      e.terms.emplace_back(pair.at(0).get<int>(), pair.at(1).get<double>());
    }
  }
  return e;
}

json expr_to(const AffineExpr& e) {
  if (e.terms.empty()) return json(e.constant);
  json terms = json::array();
  for (const auto& [i, w] : e.terms) terms.push_back(json::array({i, w}));
  return json{{"const", e.constant}, {"terms", terms}};
}

std::array<AffineExpr, 2> point_expr_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [x_expr, y_expr]");
  return {expr_from(j.at(0), path + "[0]"), expr_from(j.at(1), path + "[1]")};
}

json point_expr_to(const std::array<AffineExpr, 2>& p) {
  return json::array({expr_to(p[0]), expr_to(p[1])});
}

CurveSpec curve_from(const json& j, const std::string& path) {
  require_object(j, path);
  const std::string kind = string_at(j, path, "kind", "");
  if (kind == "circle_arc") {
    check_keys(j, path, {"kind", "radius_m"});
    if (!j.contains("radius_m")) fail(path, "circle_arc needs radius_m");
    return CurveSpec::circle_arc(expr_from(j.at("radius_m"), path + ".radius_m"));
  }
  if (kind == "arc_sector") {
    check_keys(j, path, {"kind", "radius_m", "phi0_rad", "phi1_rad"});
    if (!j.contains("radius_m")) fail(path, "arc_sector needs radius_m");
    return CurveSpec::arc_sector(expr_from(j.at("radius_m"), path + ".radius_m"),
                                 number_at(j, path, "phi0_rad", 0.0),
                                 number_at(j, path, "phi1_rad", 0.0));
  }
  if (kind == "ellipse_arc") {
    check_keys(j, path, {"kind", "semi_x_m", "semi_y_m", "y_stop_m"});
    if (!j.contains("semi_x_m") || !j.contains("semi_y_m")) {
      fail(path, "ellipse_arc needs semi_x_m and semi_y_m");
    }
    return CurveSpec::ellipse_arc(expr_from(j.at("semi_x_m"), path + ".semi_x_m"),
                                  expr_from(j.at("semi_y_m"), path + ".semi_y_m"),
                                  number_at(j, path, "y_stop_m", 0.0));
  }
  if (kind == "segment") {
    check_keys(j, path, {"kind", "a_m", "b_m"});
    if (!j.contains("a_m") || !j.contains("b_m")) fail(path, "segment needs a_m and b_m");
    return CurveSpec::segment(point_expr_from(j.at("a_m"), path + ".a_m"),
                              point_expr_from(j.at("b_m"), path + ".b_m"));
  }
  fail(path + ".kind", "expected circle_arc, arc_sector, ellipse_arc or segment");
}

json curve_to(const CurveSpec& c) {
  switch (c.kind) {
    case CurveSpec::Kind::CircleArc:
      return json{{"kind", "circle_arc"}, {"radius_m", expr_to(c.radius)}};
    case CurveSpec::Kind::ArcSector:
      return json{{"kind", "arc_sector"},
                  {"radius_m", expr_to(c.radius)},
                  {"phi0_rad", c.phi0},
                  {"phi1_rad", c.phi1}};
    case CurveSpec::Kind::EllipseArc:
      return json{{"kind", "ellipse_arc"},
                  {"semi_x_m", expr_to(c.semi_x)},
                  {"semi_y_m", expr_to(c.semi_y)},
                  {"y_stop_m", c.y_stop}};
    case CurveSpec::Kind::Segment:
    default:
      return json{{"kind", "segment"}, {"a_m", point_expr_to(c.a)}, {"b_m", point_expr_to(c.b)}};
  }
}

Material material_from(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"mu_r", "nu_m_per_h", "sigma_s_per_m", "j_src_a_per_m2", "h_m_a_per_m"});
  Material m;
  if (j.contains("mu_r") && j.contains("nu_m_per_h")) {
    fail(path, "give either mu_r or nu_m_per_h, not both");
  }
  if (j.contains("mu_r")) {
    const double mu_r = number_at(j, path, "mu_r", 1.0);
    if (mu_r <= 0.0) fail(path + ".mu_r", "must be positive");
    m.nu = 1.0 / (mu_r * kMu0);
  } else if (j.contains("nu_m_per_h")) {
    m.nu = number_at(j, path, "nu_m_per_h", m.nu);
  }
  m.sigma = number_at(j, path, "sigma_s_per_m", 0.0);
  m.j_src = number_at(j, path, "j_src_a_per_m2", 0.0);
  m.h_m = vector2_at(j, path, "h_m_a_per_m", Vector2::Zero());
  return m;
}

json material_to(const Material& m) {
  json j = json::object();
  j["nu_m_per_h"] = m.nu;
  if (m.sigma != 0.0) j["sigma_s_per_m"] = m.sigma;
  if (m.j_src != 0.0) j["j_src_a_per_m2"] = m.j_src;
  if (m.h_m.x() != 0.0 || m.h_m.y() != 0.0) {
    j["h_m_a_per_m"] = json::array({m.h_m.x(), m.h_m.y()});
  }
  return j;
}

void parse_sqp(const json& j, const std::string& path, SqpSettings* s) {
  require_object(j, path);
  check_keys(j, path, {"max_iterations", "kkt_tol", "bfgs_damping", "merit_growth", "armijo_c",
                       "max_halvings"});
  s->max_iterations = int_at(j, path, "max_iterations", s->max_iterations);
  s->kkt_tol = number_at(j, path, "kkt_tol", s->kkt_tol);
  s->bfgs_damping = number_at(j, path, "bfgs_damping", s->bfgs_damping);
  s->merit_growth = number_at(j, path, "merit_growth", s->merit_growth);
  s->armijo_c = number_at(j, path, "armijo_c", s->armijo_c);
  s->max_halvings = int_at(j, path, "max_halvings", s->max_halvings);
  if (s->kkt_tol <= 0.0 || s->armijo_c <= 0.0) fail(path, "tolerances must be positive");
}

void parse_pso(const json& j, const std::string& path, PsoSettings* s) {
  require_object(j, path);
  check_keys(j, path, {"swarm", "max_iterations", "inertia", "cognitive", "social", "stall_limit",
                       "cluster_tol", "seed", "hull_skip", "hull_capacity"});
  s->swarm = int_at(j, path, "swarm", s->swarm);
  s->max_iterations = int_at(j, path, "max_iterations", s->max_iterations);
  s->inertia = number_at(j, path, "inertia", s->inertia);
  s->cognitive = number_at(j, path, "cognitive", s->cognitive);
  s->social = number_at(j, path, "social", s->social);
  s->stall_limit = int_at(j, path, "stall_limit", s->stall_limit);
  s->cluster_tol = number_at(j, path, "cluster_tol", s->cluster_tol);
  s->seed = uint64_at(j, path, "seed", s->seed);
  s->hull_skip = bool_at(j, path, "hull_skip", s->hull_skip);
  s->hull_capacity = int_at(j, path, "hull_capacity", s->hull_capacity);
  if (s->swarm < 2) fail(path + ".swarm", "needs at least two particles");
  if (s->inertia < 0.0 || s->inertia >= 1.0) fail(path + ".inertia", "expected [0, 1)");
  if (s->cognitive < 0.0 || s->social < 0.0) fail(path, "pull factors must be nonnegative");
}

void parse_die_press(const json& j, const std::string& path, DiePressConfig* c) {
  require_object(j, path);
  check_keys(j, path,
             {"gap_outer_mm",  "cavity_outer_mm", "guard_arc_mm",  "seam_level_mm",
              "top_level_mm",  "width_mm",        "wall_mm",       "lower_mm",
              "upper_mm",      "reference_mm",    "iron_mu_r",     "drive_tesla",
              "length_m",      "sample_radius_mm", "sample_sweep_rad", "samples",
              "goals_tesla",   "angular",         "yoke_rings",    "gap_rings",
              "cavity_rings",  "die_divisions",   "seam_left",     "seam_corner",
              "seam_right",    "band_rows",       "filler_columns", "method"});
  c->gap_outer = number_at(j, path, "gap_outer_mm", c->gap_outer);
  c->cavity_outer = number_at(j, path, "cavity_outer_mm", c->cavity_outer);
  c->guard_arc = number_at(j, path, "guard_arc_mm", c->guard_arc);
  c->seam_level = number_at(j, path, "seam_level_mm", c->seam_level);
  c->top_level = number_at(j, path, "top_level_mm", c->top_level);
  c->width = number_at(j, path, "width_mm", c->width);
  c->wall = number_at(j, path, "wall_mm", c->wall);
  c->lower = vector_at(j, path, "lower_mm", 4, c->lower);
  c->upper = vector_at(j, path, "upper_mm", 4, c->upper);
  c->reference = vector_at(j, path, "reference_mm", 4, c->reference);
  c->iron_mu_r = number_at(j, path, "iron_mu_r", c->iron_mu_r);
  c->drive = number_at(j, path, "drive_tesla", c->drive);
  c->length = number_at(j, path, "length_m", c->length);
  c->sample_radius = number_at(j, path, "sample_radius_mm", c->sample_radius);
  c->sample_sweep = number_at(j, path, "sample_sweep_rad", c->sample_sweep);
  c->samples = int_at(j, path, "samples", c->samples);
  if (j.contains("goals_tesla")) {
    const json& goals = j.at("goals_tesla");
    if (!goals.is_array()) fail(path + ".goals_tesla", "expected an array of [bx, by] pairs");
    c->goals.clear();
    for (std::size_t k = 0; k < goals.size(); ++k) {
      const std::string gpath = path + ".goals_tesla[" + std::to_string(k) + "]";
      const json& pair = goals.at(k);
      if (!pair.is_array() || pair.size() != 2 || !pair.at(0).is_number() ||
          !pair.at(1).is_number()) {
        fail(gpath, "expected [bx_tesla, by_tesla]");
      }
      c->goals.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    }
  }
  c->angular = int_at(j, path, "angular", c->angular);
  c->yoke_rings = int_at(j, path, "yoke_rings", c->yoke_rings);
  c->gap_rings = int_at(j, path, "gap_rings", c->gap_rings);
  c->cavity_rings = int_at(j, path, "cavity_rings", c->cavity_rings);
  c->die_divisions = int_at(j, path, "die_divisions", c->die_divisions);
  c->seam_left = int_at(j, path, "seam_left", c->seam_left);
  c->seam_corner = int_at(j, path, "seam_corner", c->seam_corner);
  c->seam_right = int_at(j, path, "seam_right", c->seam_right);
  c->band_rows = int_at(j, path, "band_rows", c->band_rows);
  c->filler_columns = int_at(j, path, "filler_columns", c->filler_columns);
  c->method = method_at(j, path, "method", c->method);
  if (!c->goals.empty() && static_cast<int>(c->goals.size()) != c->samples) {
    fail(path + ".goals_tesla", "needs one goal per sample");
  }
  if (c->samples < 2) fail(path + ".samples", "needs at least two samples");
}

void parse_pmsm(const json& j, const std::string& path, SizingConfig* c) {
  require_object(j, path);
  check_keys(j, path, {"emf_width_v_per_mm", "emf_height_v_per_mm", "emf_required_v",
                       "ring_limit_mm", "bar_limit_mm", "lower_mm", "upper_mm", "swarm_upper_mm",
                       "initial_mm"});
  c->emf_width = number_at(j, path, "emf_width_v_per_mm", c->emf_width);
  c->emf_height = number_at(j, path, "emf_height_v_per_mm", c->emf_height);
  c->emf_required = number_at(j, path, "emf_required_v", c->emf_required);
  c->ring_limit = number_at(j, path, "ring_limit_mm", c->ring_limit);
  c->bar_limit = number_at(j, path, "bar_limit_mm", c->bar_limit);
  c->lower = vector_at(j, path, "lower_mm", 3, c->lower);
  c->upper = vector_at(j, path, "upper_mm", 3, c->upper, /*null_is_inf=*/true);
  c->swarm_upper = vector_at(j, path, "swarm_upper_mm", 3, c->swarm_upper);
  c->initial = vector_at(j, path, "initial_mm", 3, c->initial);
}

void parse_custom(const json& j, const std::string& path, const std::string& base_dir,
                  CustomProblemConfig* c) {
  require_object(j, path);
  check_keys(j, path, {"mesh", "length_m", "regions", "boundary", "targets", "mean", "method",
                       "elements", "subdomains", "lower", "upper", "reference"});
  c->mesh_path = string_at(j, path, "mesh", "");
  if (c->mesh_path.empty()) fail(path + ".mesh", "mesh path is required");
  if (!base_dir.empty() && std::filesystem::path(c->mesh_path).is_relative()) {
    c->mesh_path = (std::filesystem::path(base_dir) / c->mesh_path).string();
  }
  c->length = number_at(j, path, "length_m", c->length);
  if (j.contains("regions")) {
    const json& regions = j.at("regions");
    require_object(regions, path + ".regions");
    for (const auto& item : regions.items()) {
      c->regions.materials[item.key()] =
          material_from(item.value(), path + ".regions." + item.key());
    }
  }
  if (j.contains("boundary")) {
    const json& bc = j.at("boundary");
    require_object(bc, path + ".boundary");
    for (const auto& item : bc.items()) {
      const std::string bpath = path + ".boundary." + item.key();
      require_object(item.value(), bpath);
      check_keys(item.value(), bpath, {"constant_wb", "per_x_wb_per_m", "per_y_wb_per_m"});
      BoundaryValue v;
      v.c0 = number_at(item.value(), bpath, "constant_wb", 0.0);
      v.cx = number_at(item.value(), bpath, "per_x_wb_per_m", 0.0);
      v.cy = number_at(item.value(), bpath, "per_y_wb_per_m", 0.0);
      c->boundary[item.key()] = v;
    }
  }
  if (j.contains("targets")) {
    const json& targets = j.at("targets");
    if (!targets.is_array()) fail(path + ".targets", "expected an array");
    for (std::size_t k = 0; k < targets.size(); ++k) {
      const std::string tpath = path + ".targets[" + std::to_string(k) + "]";
      const json& t = targets.at(k);
      require_object(t, tpath);
      check_keys(t, tpath, {"location_m", "goal_tesla"});
      FluxTarget target;
      target.location = vector2_at(t, tpath, "location_m", Vector2::Zero());
      target.goal = vector2_at(t, tpath, "goal_tesla", Vector2::Zero());
      c->targets.push_back(target);
    }
  }
  c->mean = bool_at(j, path, "mean", c->mean);
  c->method = method_at(j, path, "method", c->method);
  if (j.contains("elements")) {
    const json& elements = j.at("elements");
    if (!elements.is_array()) fail(path + ".elements", "expected an array");
    for (std::size_t e = 0; e < elements.size(); ++e) {
      const std::string epath = path + ".elements[" + std::to_string(e) + "]";
      const json& el = elements.at(e);
      require_object(el, epath);
      check_keys(el, epath, {"name", "curve0", "curve1"});
      DesignElement de;
      de.name = string_at(el, epath, "name", "element" + std::to_string(e));
      if (!el.contains("curve0") || !el.contains("curve1")) {
        fail(epath, "needs curve0 and curve1");
      }
      de.curve0 = curve_from(el.at("curve0"), epath + ".curve0");
      de.curve1 = curve_from(el.at("curve1"), epath + ".curve1");
      c->elements.push_back(std::move(de));
    }
  }
  if (j.contains("subdomains")) {
    const json& subs = j.at("subdomains");
    if (!subs.is_array()) fail(path + ".subdomains", "expected an array");
    for (std::size_t s = 0; s < subs.size(); ++s) {
      const std::string spath = path + ".subdomains[" + std::to_string(s) + "]";
      const json& sub = subs.at(s);
      require_object(sub, spath);
      check_keys(sub, spath, {"vertices_m", "triangles"});
      if (!sub.contains("vertices_m") || !sub.at("vertices_m").is_array() ||
          sub.at("vertices_m").size() != 3) {
        fail(spath + ".vertices_m", "expected three [x_expr, y_expr] vertices");
      }
      AffineSubdomain sd;
      for (int v = 0; v < 3; ++v) {
        sd.vertices[v] = point_expr_from(sub.at("vertices_m").at(v),
                                         spath + ".vertices_m[" + std::to_string(v) + "]");
      }
      if (sub.contains("triangles")) {
        const json& tris = sub.at("triangles");
        if (!tris.is_array()) fail(spath + ".triangles", "expected an array of triangle ids");
        for (const json& t : tris) {
          if (!t.is_number_integer()) fail(spath + ".triangles", "expected integer ids");
          sd.triangles.push_back(t.get<int>());
        }
      }
      c->subdomains.push_back(std::move(sd));
    }
  }
  const int dim = j.contains("reference") ? static_cast<int>(j.at("reference").size()) : 0;
  c->reference = vector_at(j, path, "reference", dim, Vector());
  c->box.lower = vector_at(j, path, "lower", dim, Vector());
  c->box.upper = vector_at(j, path, "upper", dim, Vector(), /*null_is_inf=*/true);
  if (c->reference.size() == 0) fail(path + ".reference", "reference design is required");
  if (c->box.lower.size() != c->reference.size() || c->box.upper.size() != c->reference.size()) {
    fail(path, "lower/upper/reference must share one length");
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
  }
  require_object(j, "$");
  check_keys(j, "$",
             {"schema_version", "problem", "parametrization", "optimizer", "sqp", "pso", "robust",
              "output_dir", "die_press", "pmsm", "custom"});
  const int version = int_at(j, "$", "schema_version", -1);
  if (version != kSchemaVersion) {
    fail("$.schema_version", "expected " + std::to_string(kSchemaVersion));
  }

  RunConfig config;
  config.problem = string_at(j, "$", "problem", config.problem);
  if (config.problem != "die_press" && config.problem != "pmsm_synthetic" &&
      config.problem != "custom") {
    fail("$.problem", "expected die_press, pmsm_synthetic or custom");
  }
  config.parametrization = string_at(j, "$", "parametrization", config.parametrization);
  if (config.parametrization != "design_element" && config.parametrization != "affine") {
    fail("$.parametrization", "expected design_element or affine");
  }
  config.optimizer = string_at(j, "$", "optimizer", config.optimizer);
  if (config.optimizer != "sqp" && config.optimizer != "pso") {
    fail("$.optimizer", "expected sqp or pso");
  }
  config.output_dir = string_at(j, "$", "output_dir", config.output_dir);

  if (j.contains("sqp")) parse_sqp(j.at("sqp"), "$.sqp", &config.sqp);
  if (j.contains("pso")) parse_pso(j.at("pso"), "$.pso", &config.pso);
  if (j.contains("robust")) {
    const json& r = j.at("robust");
    require_object(r, "$.robust");
    check_keys(r, "$.robust", {"enabled", "delta"});
    config.robust = bool_at(r, "$.robust", "enabled", false);
    if (r.contains("delta")) {
      config.robust_delta = vector_at(r, "$.robust", "delta", -1, Vector());
    }
    if (config.robust) {
      if (config.robust_delta.size() == 0) fail("$.robust.delta", "required when enabled");
      if (config.robust_delta.minCoeff() <= 0.0) fail("$.robust.delta", "radii must be positive");
    }
  }
  if (j.contains("die_press")) parse_die_press(j.at("die_press"), "$.die_press", &config.die_press);
  if (j.contains("pmsm")) parse_pmsm(j.at("pmsm"), "$.pmsm", &config.pmsm);
  if (config.problem == "custom") {
    if (!j.contains("custom")) fail("$.custom", "required for custom problems");
    parse_custom(j.at("custom"), "$.custom", base_dir, &config.custom);
  } else if (j.contains("custom")) {
    fail("$.custom", "only valid when problem is custom");
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), std::filesystem::path(path).parent_path().string());
}

std::string format_run_config(const RunConfig& config) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["problem"] = config.problem;
  j["parametrization"] = config.parametrization;
  j["optimizer"] = config.optimizer;
  j["output_dir"] = config.output_dir;
  j["sqp"] = {{"max_iterations", config.sqp.max_iterations},
              {"kkt_tol", config.sqp.kkt_tol},
              {"bfgs_damping", config.sqp.bfgs_damping},
              {"merit_growth", config.sqp.merit_growth},
              {"armijo_c", config.sqp.armijo_c},
              {"max_halvings", config.sqp.max_halvings}};
  j["pso"] = {{"swarm", config.pso.swarm},
              {"max_iterations", config.pso.max_iterations},
              {"inertia", config.pso.inertia},
              {"cognitive", config.pso.cognitive},
              {"social", config.pso.social},
              {"stall_limit", config.pso.stall_limit},
              {"cluster_tol", config.pso.cluster_tol},
              {"seed", config.pso.seed},
              {"hull_skip", config.pso.hull_skip},
              {"hull_capacity", config.pso.hull_capacity}};
  json robust = {{"enabled", config.robust}};
  if (config.robust_delta.size() > 0) {
    json delta = json::array();
    for (int i = 0; i < config.robust_delta.size(); ++i) delta.push_back(config.robust_delta[i]);
    robust["delta"] = delta;
  }
  j["robust"] = robust;

  const auto vec = [](const Vector& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) {
      if (v[i] == kInf) {
        out.push_back(nullptr);
      } else {
        out.push_back(v[i]);
      }
    }
    return out;
  };

  if (config.problem == "die_press") {
    const DiePressConfig& c = config.die_press;
    json goals = json::array();
    for (const Vector2& g : c.goals) goals.push_back(json::array({g.x(), g.y()}));
    j["die_press"] = {{"gap_outer_mm", c.gap_outer},
                      {"cavity_outer_mm", c.cavity_outer},
                      {"guard_arc_mm", c.guard_arc},
                      {"seam_level_mm", c.seam_level},
                      {"top_level_mm", c.top_level},
                      {"width_mm", c.width},
                      {"wall_mm", c.wall},
                      {"lower_mm", vec(c.lower)},
                      {"upper_mm", vec(c.upper)},
                      {"reference_mm", vec(c.reference)},
                      {"iron_mu_r", c.iron_mu_r},
                      {"drive_tesla", c.drive},
                      {"length_m", c.length},
                      {"sample_radius_mm", c.sample_radius},
                      {"sample_sweep_rad", c.sample_sweep},
                      {"samples", c.samples},
                      {"goals_tesla", goals},
                      {"angular", c.angular},
                      {"yoke_rings", c.yoke_rings},
                      {"gap_rings", c.gap_rings},
                      {"cavity_rings", c.cavity_rings},
                      {"die_divisions", c.die_divisions},
                      {"seam_left", c.seam_left},
                      {"seam_corner", c.seam_corner},
                      {"seam_right", c.seam_right},
                      {"band_rows", c.band_rows},
                      {"filler_columns", c.filler_columns},
                      {"method", c.method == SolveMethod::Direct ? "direct" : "cg"}};
  } else if (config.problem == "pmsm_synthetic") {
    const SizingConfig& c = config.pmsm;
    j["pmsm"] = {{"emf_width_v_per_mm", c.emf_width},
                 {"emf_height_v_per_mm", c.emf_height},
                 {"emf_required_v", c.emf_required},
                 {"ring_limit_mm", c.ring_limit},
                 {"bar_limit_mm", c.bar_limit},
                 {"lower_mm", vec(c.lower)},
                 {"upper_mm", vec(c.upper)},
                 {"swarm_upper_mm", vec(c.swarm_upper)},
                 {"initial_mm", vec(c.initial)}};
  } else {
    const CustomProblemConfig& c = config.custom;
    json regions = json::object();
    for (const auto& [tag, material] : c.regions.materials) regions[tag] = material_to(material);
    json boundary = json::object();
    for (const auto& [label, value] : c.boundary) {
      boundary[label] = {{"constant_wb", value.c0},
                         {"per_x_wb_per_m", value.cx},
                         {"per_y_wb_per_m", value.cy}};
    }
    json targets = json::array();
    for (const FluxTarget& t : c.targets) {
      targets.push_back({{"location_m", json::array({t.location.x(), t.location.y()})},
                         {"goal_tesla", json::array({t.goal.x(), t.goal.y()})}});
    }
    json elements = json::array();
    for (const DesignElement& e : c.elements) {
      elements.push_back(
          {{"name", e.name}, {"curve0", curve_to(e.curve0)}, {"curve1", curve_to(e.curve1)}});
    }
    json subdomains = json::array();
    for (const AffineSubdomain& s : c.subdomains) {
      json verts = json::array();
      for (const auto& v : s.vertices) verts.push_back(point_expr_to(v));
      json tris = json::array();
      for (int t : s.triangles) tris.push_back(t);
      subdomains.push_back({{"vertices_m", verts}, {"triangles", tris}});
    }
    j["custom"] = {{"mesh", c.mesh_path},
                   {"length_m", c.length},
                   {"regions", regions},
                   {"boundary", boundary},
                   {"targets", targets},
                   {"mean", c.mean},
                   {"method", c.method == SolveMethod::Direct ? "direct" : "cg"},
                   {"elements", elements},
                   {"subdomains", subdomains},
                   {"lower", vec(c.box.lower)},
                   {"upper", vec(c.box.upper)},
                   {"reference", vec(c.reference)}};
  }
  return j.dump(2) + "\n";
}

BuiltProblem build_problem(const RunConfig& config, SolveLedger* ledger) {
  BuiltProblem out;
  if (config.problem == "pmsm_synthetic") {
    out.smooth = sizing_problem(config.pmsm, ledger);
    out.search = sizing_problem_penalized(config.pmsm, ledger);
  } else if (config.problem == "die_press") {
    const DiePressConfig& c = config.die_press;
    if (config.parametrization == "design_element") {
      out.field = die_press_problem(c);
    } else {
      out.field = die_press_affine_problem(c);
    }
    out.smooth = make_optimization(out.field, die_press_box(c), c.reference, ledger);
    out.search = out.smooth;
  } else {
    const CustomProblemConfig& c = config.custom;
    TriMesh mesh = load_mesh_file(c.mesh_path);
    c.regions.validate(mesh);
    FieldProblemConfig fc;
    fc.regions = c.regions;
    fc.boundary = c.boundary;
    fc.length = c.length;
    fc.targets = c.targets;
    fc.mean = c.mean;
    fc.method = c.method;
    if (config.parametrization == "design_element") {
      if (c.elements.empty()) {
        throw std::invalid_argument("config: $.custom.elements: required for design_element");
      }
      out.field = std::make_shared<DeformedFieldProblem>(
          bind_elements(mesh, c.elements, c.reference), std::move(fc));
    } else {
      if (c.subdomains.empty()) {
        throw std::invalid_argument("config: $.custom.subdomains: required for affine");
      }
      const Pattern pattern = build_pattern(mesh);
      AffineDecomposition decomposition =
          build_decomposition(mesh, c.regions, c.subdomains, c.reference, c.length, pattern);
      out.field = std::make_shared<AffineFieldProblem>(std::move(mesh), std::move(decomposition),
                                                       std::move(fc));
    }
    out.smooth = make_optimization(out.field, c.box, c.reference, ledger);
    out.search = out.smooth;
  }

  if (config.robust) {
    if (config.optimizer != "sqp") {
      throw std::invalid_argument("config: $.robust: robust runs need the sqp optimizer");
    }
    if (config.robust_delta.size() != out.smooth.initial.size()) {
      throw std::invalid_argument("config: $.robust.delta: length must match the design vector");
    }
    const RobustProblem robust = robustify(out.smooth, UncertaintySet{config.robust_delta});
    out.smooth = robust.expanded;
    out.robust_base_dim = robust.base_dim;
  }
  return out;
}

}  // namespace magshape
