#include "edgenn/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "edgenn/error.hpp"
#include "edgenn/format.hpp"

namespace edgenn {

namespace {

using Vec2 = std::array<double, 2>;
using json = nlohmann::json;

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

PolygonObstacle rect_polygon(double x0, double y0, double x1, double y1) {
    return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

template <typename Points>
void project(const Points& pts, const Vec2& axis, double& lo, double& hi) {
    lo = hi = pts[0][0] * axis[0] + pts[0][1] * axis[1];
    for (const Vec2& p : pts) {
        const double s = p[0] * axis[0] + p[1] * axis[1];
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
}

// Separating-axis test on two convex polygons. Touching counts as separated.
template <typename A, typename B>
bool convex_overlap(const A& a, const B& b) {
    auto separated_along_edges = [](const auto& poly, const A& pa, const B& pb) {
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& p = poly[i];
            const Vec2& q = poly[(i + 1) % n];
            const Vec2 axis{q[1] - p[1], p[0] - q[0]};
            double alo, ahi, blo, bhi;
            project(pa, axis, alo, ahi);
            project(pb, axis, blo, bhi);
            if (ahi <= blo || bhi <= alo) return true;
        }
        return false;
    };
    return !separated_along_edges(a, a, b) && !separated_along_edges(b, a, b);
}

double point_segment_dist2(const Vec2& p, const Vec2& a, const Vec2& b) {
    const double vx = b[0] - a[0], vy = b[1] - a[1];
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = a[0] + t * vx - p[0], dy = a[1] + t * vy - p[1];
    return dx * dx + dy * dy;
}

bool strictly_inside(const PolygonObstacle& poly, const Vec2& p) {
    const auto& v = poly.vertices;
    double sign = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double c = cross(v[i], v[(i + 1) % v.size()], p);
        if (c == 0.0) return false;
        if (sign == 0.0) sign = c;
        else if ((c > 0.0) != (sign > 0.0)) return false;
    }
    return true;
}

bool disc_hits_polygon(const PolygonObstacle& poly, const Vec2& c, double radius) {
    if (strictly_inside(poly, c)) return true;
    if (radius <= 0.0) return false;
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (point_segment_dist2(c, v[i], v[(i + 1) % v.size()]) < radius * radius) return true;
    return false;
}

bool ball_hits_box(const BoxObstacle& box, const CPoint& c, std::size_t t, double radius) {
    if (radius <= 0.0) {
        for (std::size_t i = 0; i < t; ++i)
            if (!(c[i] > box.lo[i] && c[i] < box.hi[i])) return false;
        return true;
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        const double excess = c[i] < box.lo[i] ? box.lo[i] - c[i] : (c[i] > box.hi[i] ? c[i] - box.hi[i] : 0.0);
        d2 += excess * excess;
    }
    return d2 < radius * radius;
}

void check_convex(const PolygonObstacle& poly, std::size_t index) {
    const auto& v = poly.vertices;
    const std::string where = "polygon " + std::to_string(index);
    if (v.size() < 3) throw InvalidInput(where + ": needs at least 3 vertices");
    double sign = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i][0]) || !std::isfinite(v[i][1])) throw InvalidInput(where + ": non-finite vertex");
        const double c = cross(v[i], v[(i + 1) % v.size()], v[(i + 2) % v.size()]);
        if (c == 0.0) throw InvalidInput(where + ": collinear consecutive vertices");
        if (sign == 0.0) sign = c;
        else if ((c > 0.0) != (sign > 0.0)) throw InvalidInput(where + ": not convex");
    }
}

}  // namespace

std::array<std::array<double, 2>, 4> rect_corners(const Robot& robot, double x, double y, double theta) {
    const double angle = 2.0 * std::numbers::pi * theta;
    const double c = std::cos(angle), s = std::sin(angle);
    const double hw = 0.5 * robot.width, hh = 0.5 * robot.height;
    const std::array<Vec2, 4> local{{{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}};
    std::array<Vec2, 4> out;
    for (std::size_t i = 0; i < 4; ++i) out[i] = {x + c * local[i][0] - s * local[i][1], y + s * local[i][0] + c * local[i][1]};
    return out;
}

bool configuration_free(const Scene& scene, const CPoint& c) {
    const SpaceSignature& sig = scene.signature;
    const auto t = static_cast<std::size_t>(sig.t);
    const Robot& robot = scene.robot;

    if (robot.kind == Robot::Kind::planar_rect) {
        const auto corners = rect_corners(robot, c[0], c[1], c[2]);
        for (const Vec2& p : corners)
            for (std::size_t i = 0; i < 2; ++i)
                if (p[i] < sig.trans_lo[i] || p[i] > sig.trans_hi[i]) return false;
        for (const PolygonObstacle& poly : scene.polygons)
            if (convex_overlap(corners, poly.vertices)) return false;
        for (const BoxObstacle& box : scene.boxes) {
            const PolygonObstacle as_poly = rect_polygon(box.lo[0], box.lo[1], box.hi[0], box.hi[1]);
            if (convex_overlap(corners, as_poly.vertices)) return false;
        }
        return true;
    }

    const double radius = robot.kind == Robot::Kind::ball ? robot.radius : 0.0;
    for (std::size_t i = 0; i < t; ++i)
        if (c[i] - radius < sig.trans_lo[i] || c[i] + radius > sig.trans_hi[i]) return false;
    for (const BoxObstacle& box : scene.boxes)
        if (ball_hits_box(box, c, t, radius)) return false;
    if (!scene.polygons.empty()) {
        const Vec2 centre{c[0], c[1]};
        for (const PolygonObstacle& poly : scene.polygons)
            if (disc_hits_polygon(poly, centre, radius)) return false;
    }
    return true;
}

bool ValidityChecker::is_valid(const CPoint& c) {
    ++calls_;
    return configuration_free(*scene_, c);
}

void Scene::validate() const {
    signature.validate();
    const auto t = static_cast<std::size_t>(signature.t);
    switch (robot.kind) {
        case Robot::Kind::point:
            break;
        case Robot::Kind::ball:
            if (!(robot.radius > 0.0) || !std::isfinite(robot.radius)) throw InvalidInput("ball robot needs a positive radius");
            break;
        case Robot::Kind::planar_rect:
            if (signature.t != 2 || signature.r != 1) throw InvalidInput("planar_rect robot requires t=2, r=1");
            if (!(robot.width > 0.0 && robot.height > 0.0) || !std::isfinite(robot.width) || !std::isfinite(robot.height))
                throw InvalidInput("planar_rect robot needs positive width and height");
            break;
    }
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const BoxObstacle& b = boxes[i];
        if (b.lo.size() != t || b.hi.size() != t)
            throw InvalidInput("box " + std::to_string(i) + ": expected " + std::to_string(t) + " coordinates per corner");
        for (std::size_t j = 0; j < t; ++j)
            if (!(b.lo[j] < b.hi[j])) throw InvalidInput("box " + std::to_string(i) + ": lo must be below hi");
    }
    if (!polygons.empty() && t < 2) throw InvalidInput("polygon obstacles need at least 2 translational dimensions");
    for (std::size_t i = 0; i < polygons.size(); ++i) check_convex(polygons[i], i);

    for (const auto& [label, p] : {std::pair{"start", &start}, std::pair{"goal", &goal}}) {
        if (p->size() != signature.dim()) throw InvalidInput(std::string(label) + ": dimension mismatch");
        if (!(normalize(signature, p->coords) == *p)) throw InvalidInput(std::string(label) + ": not normalized");
        for (std::size_t j = 0; j < t; ++j)
            if ((*p)[j] < signature.trans_lo[j] || (*p)[j] > signature.trans_hi[j])
                throw InvalidInput(std::string(label) + ": outside the translational bounds");
        if (!configuration_free(*this, *p)) throw InvalidInput(std::string(label) + ": configuration is in collision");
    }
}

Scene empty_box(int t, int r) {
    if (t < 0 || r < 0 || t + r < 1 || t + r > static_cast<int>(kMaxDim)) throw InvalidInput("empty_box: bad dimensions");
    Scene s;
    s.name = "empty_box";
    s.signature = SpaceSignature::box(VecD(static_cast<std::size_t>(t), 0.0), VecD(static_cast<std::size_t>(t), 10.0), r);
    VecD a(s.signature.dim()), b(s.signature.dim());
    for (std::size_t i = 0; i < s.signature.dim(); ++i) {
        const bool rot = s.signature.is_rotational(i);
        a[i] = rot ? 0.0 : 2.5;
        b[i] = rot ? 0.5 : 7.5;
    }
    s.start = normalize(s.signature, a);
    s.goal = normalize(s.signature, b);
    s.validate();
    return s;
}

Scene wall_with_hole(double clearance) {
    if (!(clearance > 0.0 && clearance < 8.0)) throw InvalidInput("wall_with_hole: clearance must lie in (0, 8)");
    Scene s;
    s.name = "wall_with_hole";
    s.signature = SpaceSignature::box(VecD{0.0, 0.0}, VecD{10.0, 10.0}, 1);
    s.robot = Robot::planar_rect(2.0, 1.0);
    const double half = 0.5 * (1.0 + clearance);
    s.polygons.push_back(rect_polygon(0.0, 4.5, 5.0 - half, 5.5));
    s.polygons.push_back(rect_polygon(5.0 + half, 4.5, 10.0, 5.5));
    s.start = normalize(s.signature, VecD{5.0, 2.0, 0.0});
    s.goal = normalize(s.signature, VecD{5.0, 8.0, 0.0});
    s.validate();
    return s;
}

Scene z_corridor(double clearance) {
    if (!(clearance >= 0.0 && clearance <= 5.0)) throw InvalidInput("z_corridor: clearance must lie in [0, 5]");
    Scene s;
    s.name = "z_corridor";
    s.signature = SpaceSignature::box(VecD{0.0, 0.0}, VecD{20.0, 20.0}, 1);
    s.robot = Robot::planar_rect(2.0, 1.0);
    const double h = 0.5 * (std::hypot(2.0, 1.0) + clearance);
    // Wall band y in [6, 14]; legs at x = 5 (entry) and x = 15 (exit), joined at y = 10.
    s.polygons.push_back(rect_polygon(0.0, 6.0, 5.0 - h, 14.0));
    s.polygons.push_back(rect_polygon(15.0 + h, 6.0, 20.0, 14.0));
    s.polygons.push_back(rect_polygon(5.0 + h, 6.0, 15.0 + h, 10.0 - h));
    s.polygons.push_back(rect_polygon(5.0 - h, 10.0 + h, 15.0 - h, 14.0));
    s.start = normalize(s.signature, VecD{10.0, 3.0, 0.0});
    s.goal = normalize(s.signature, VecD{10.0, 17.0, 0.0});
    s.validate();
    return s;
}

Scene clutter_grid(int m, double cube_side, int missing_corners) {
    if (m < 2 || m > 50) throw InvalidInput("clutter_grid: m must lie in [2, 50]");
    const double spacing = 10.0 / m;
    if (!(cube_side > 0.0 && cube_side < spacing)) throw InvalidInput("clutter_grid: cube side must lie in (0, 10/m)");
    if (missing_corners < 0 || missing_corners > 8) throw InvalidInput("clutter_grid: missing corners must lie in [0, 8]");
    Scene s;
    s.name = "clutter_grid";
    s.signature = SpaceSignature::box(VecD{0.0, 0.0, 0.0}, VecD{10.0, 10.0, 10.0}, 3);
    s.robot = Robot::ball(0.4);

    // Corner cells in removal order: the diagonal pair first.
    const int e = m - 1;
    const std::array<std::array<int, 3>, 8> corners{{{0, 0, 0}, {e, e, e}, {e, 0, 0}, {0, e, e},
                                                     {0, e, 0}, {e, 0, e}, {0, 0, e}, {e, e, 0}}};
    auto is_missing = [&](int i, int j, int k) {
        for (int c = 0; c < missing_corners; ++c)
            if (corners[c] == std::array<int, 3>{i, j, k}) return true;
        return false;
    };
    const double half = 0.5 * cube_side;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                if (is_missing(i, j, k)) continue;
                const VecD c{(i + 0.5) * spacing, (j + 0.5) * spacing, (k + 0.5) * spacing};
                s.boxes.push_back({c - VecD(3, half), c + VecD(3, half)});
            }
    const double lo = 0.5 * spacing, hi = (e + 0.5) * spacing;
    s.start = normalize(s.signature, VecD{lo, lo, lo, 0.0, 0.0, 0.0});
    s.goal = normalize(s.signature, VecD{hi, hi, hi, 0.0, 0.0, 0.0});
    s.validate();
    return s;
}

std::vector<std::string> builtin_scene_names() { return {"empty_box", "wall_with_hole", "z_corridor", "clutter_grid"}; }

Scene builtin_scene(std::string_view spec) {
    std::vector<std::string> parts;
    {
        std::string part;
        std::istringstream in{std::string(spec)};
        while (std::getline(in, part, ':')) parts.push_back(part);
    }
    if (parts.empty()) throw InvalidInput("empty scene name");
    const std::string& name = parts[0];
    auto num = [&](std::size_t i, double fallback) {
        if (i >= parts.size()) return fallback;
        try {
            return parse_double(parts[i], "scene '" + std::string(spec) + "'");
        } catch (const ParseError& e) {
            throw InvalidInput(e.what());
        }
    };
    auto count = [&](std::size_t i, int fallback) {
        const double v = num(i, fallback);
        if (v != std::floor(v)) throw InvalidInput("scene '" + std::string(spec) + "': expected an integer parameter");
        return static_cast<int>(v);
    };
    std::size_t max_params = 0;
    Scene s;
    if (name == "empty_box") {
        max_params = 2;
        s = empty_box(count(1, 3), count(2, 0));
    } else if (name == "wall_with_hole") {
        max_params = 1;
        s = wall_with_hole(num(1, 0.9));
    } else if (name == "z_corridor") {
        max_params = 1;
        s = z_corridor(num(1, 1.4));
    } else if (name == "clutter_grid") {
        max_params = 3;
        s = clutter_grid(count(1, 5), num(2, 0.8), count(3, 2));
    } else {
        throw InvalidInput("unknown scene '" + name + "'");
    }
    if (parts.size() > max_params + 1) throw InvalidInput("scene '" + std::string(spec) + "': too many parameters");
    return s;
}

Scene resolve_scene(const std::string& name_or_path) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(name_or_path, ec)) return load_scene(name_or_path);
    return builtin_scene(name_or_path);
}

// ---- JSON ----

namespace {

json vec_json(const VecD& v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

std::string_view robot_kind_name(Robot::Kind k) {
    switch (k) {
        case Robot::Kind::point: return "point";
        case Robot::Kind::ball: return "ball";
        case Robot::Kind::planar_rect: return "planar_rect";
    }
    return "point";
}

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ParseError(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(path.empty() ? key : path + "." + key, "missing required field");
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
    return j.get<int>();
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) throw ParseError(path, "expected a string");
    return j.get<std::string>();
}

VecD vector_of(const json& j, const std::string& path, std::size_t expected) {
    if (!j.is_array()) throw ParseError(path, "expected an array");
    if (j.size() != expected) throw ParseError(path, "expected " + std::to_string(expected) + " numbers");
    VecD v(expected);
    for (std::size_t i = 0; i < expected; ++i) v[i] = number(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

std::string scene_to_json(const Scene& scene) {
    const SpaceSignature& sig = scene.signature;
    json bounds = json::array();
    for (int i = 0; i < sig.t; ++i) bounds.push_back({sig.trans_lo[i], sig.trans_hi[i]});
    json robot = {{"type", robot_kind_name(scene.robot.kind)}};
    if (scene.robot.kind == Robot::Kind::ball) robot["radius"] = scene.robot.radius;
    if (scene.robot.kind == Robot::Kind::planar_rect) {
        robot["width"] = scene.robot.width;
        robot["height"] = scene.robot.height;
    }
    json obstacles = json::array();
    for (const BoxObstacle& b : scene.boxes) obstacles.push_back({{"type", "box"}, {"lo", vec_json(b.lo)}, {"hi", vec_json(b.hi)}});
    for (const PolygonObstacle& p : scene.polygons) {
        json verts = json::array();
        for (const auto& v : p.vertices) verts.push_back({v[0], v[1]});
        obstacles.push_back({{"type", "polygon"}, {"vertices", verts}});
    }
    json doc;
    doc["scene_version"] = 1;
    doc["name"] = scene.name;
    doc["signature"] = {{"t", sig.t}, {"r", sig.r}, {"bounds", bounds}};
    doc["robot"] = robot;
    doc["obstacles"] = obstacles;
    doc["start"] = vec_json(scene.start.coords);
    doc["goal"] = vec_json(scene.goal.coords);
    return doc.dump(2) + "\n";
}

Scene scene_from_json(std::string_view source) {
    json doc;
    try {
        doc = json::parse(source.begin(), source.end());
    } catch (const json::parse_error& e) {
        throw ParseError("line " + std::to_string(line_of(source, e.byte)), "malformed JSON");
    }

    const int version = integer(field(doc, "scene_version", ""), "scene_version");
    if (version != 1) throw ParseError("scene_version", "unsupported version " + std::to_string(version));

    Scene s;
    s.name = text(field(doc, "name", ""), "name");

    const json& sig = field(doc, "signature", "");
    const int t = integer(field(sig, "t", "signature"), "signature.t");
    const int r = integer(field(sig, "r", "signature"), "signature.r");
    if (t < 0 || r < 0 || t + r < 1 || t + r > static_cast<int>(kMaxDim))
        throw ParseError("signature", "t and r must be non-negative with 1 <= t + r <= " + std::to_string(kMaxDim));
    const json& bounds = field(sig, "bounds", "signature");
    if (!bounds.is_array() || bounds.size() != static_cast<std::size_t>(t))
        throw ParseError("signature.bounds", "expected " + std::to_string(t) + " [lo, hi] pairs");
    VecD lo(static_cast<std::size_t>(t)), hi(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) {
        const std::string path = "signature.bounds[" + std::to_string(i) + "]";
        const VecD pair = vector_of(bounds[static_cast<std::size_t>(i)], path, 2);
        lo[i] = pair[0];
        hi[i] = pair[1];
    }
    s.signature = SpaceSignature{t, r, lo, hi};
    try {
        s.signature.validate();
    } catch (const InvalidInput& e) {
        throw ParseError("signature", e.what());
    }

    const json& robot = field(doc, "robot", "");
    const std::string kind = text(field(robot, "type", "robot"), "robot.type");
    if (kind == "point") s.robot = Robot::point();
    else if (kind == "ball") s.robot = Robot::ball(number(field(robot, "radius", "robot"), "robot.radius"));
    else if (kind == "planar_rect")
        s.robot = Robot::planar_rect(number(field(robot, "width", "robot"), "robot.width"),
                                     number(field(robot, "height", "robot"), "robot.height"));
    else throw ParseError("robot.type", "unknown robot type '" + kind + "'");

    const json& obstacles = field(doc, "obstacles", "");
    if (!obstacles.is_array()) throw ParseError("obstacles", "expected an array");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const std::string path = "obstacles[" + std::to_string(i) + "]";
        const json& o = obstacles[i];
        const std::string type = text(field(o, "type", path), path + ".type");
        if (type == "box") {
            s.boxes.push_back({vector_of(field(o, "lo", path), path + ".lo", static_cast<std::size_t>(t)),
                               vector_of(field(o, "hi", path), path + ".hi", static_cast<std::size_t>(t))});
        } else if (type == "polygon") {
            const json& verts = field(o, "vertices", path);
            if (!verts.is_array()) throw ParseError(path + ".vertices", "expected an array");
            PolygonObstacle poly;
            for (std::size_t k = 0; k < verts.size(); ++k) {
                const VecD v = vector_of(verts[k], path + ".vertices[" + std::to_string(k) + "]", 2);
                poly.vertices.push_back({v[0], v[1]});
            }
            s.polygons.push_back(std::move(poly));
        } else {
            throw ParseError(path + ".type", "unknown obstacle type '" + type + "'");
        }
    }

    const std::size_t d = s.signature.dim();
    const VecD start = vector_of(field(doc, "start", ""), "start", d);
    const VecD goal = vector_of(field(doc, "goal", ""), "goal", d);
    try {
        s.start = normalize(s.signature, start);
        s.goal = normalize(s.signature, goal);
        s.validate();
    } catch (const InvalidInput& e) {
        throw ParseError("scene", e.what());
    }
    return s;
}

void save_scene(const Scene& scene, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
    out << scene_to_json(scene);
    if (!out) throw std::runtime_error("failed writing " + file.string());
}

Scene load_scene(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return scene_from_json(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(file.string() + ": " + e.where(), std::string(e.what()).substr(e.where().size() + 2));
    }
}

}  // namespace edgenn
