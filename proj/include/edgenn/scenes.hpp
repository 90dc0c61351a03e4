#pragma once

// Desk-scale environments: point, ball and planar-rectangle robots among
// axis-aligned boxes and convex polygons, with a counting validity checker.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "edgenn/cyclic_kernel.hpp"

namespace edgenn {

struct Robot {
    enum class Kind { point, ball, planar_rect };
    Kind kind = Kind::point;
    double radius = 0.0;  ///< ball
    double width = 0.0;   ///< planar_rect, along the body x axis
    double height = 0.0;  ///< planar_rect

    static Robot point() { return {}; }
    static Robot ball(double radius) { return {Kind::ball, radius, 0.0, 0.0}; }
    static Robot planar_rect(double width, double height) { return {Kind::planar_rect, 0.0, width, height}; }

    friend bool operator==(const Robot&, const Robot&) = default;
};

/// Axis-aligned box over the translational coordinates.
struct BoxObstacle {
    VecD lo, hi;
    friend bool operator==(const BoxObstacle&, const BoxObstacle&) = default;
};

/// Convex polygon in the plane of the first two translational coordinates.
struct PolygonObstacle {
    std::vector<std::array<double, 2>> vertices;
    friend bool operator==(const PolygonObstacle&, const PolygonObstacle&) = default;
};

struct Scene {
    std::string name;
    SpaceSignature signature;
    Robot robot;
    std::vector<BoxObstacle> boxes;
    std::vector<PolygonObstacle> polygons;
    CPoint start;
    CPoint goal;

    /// Geometry and compatibility checks plus start/goal validity. Throws InvalidInput.
    void validate() const;

    friend bool operator==(const Scene&, const Scene&) = default;
};

/// Validity of a single configuration. Pure apart from the call counter.
class ValidityChecker {
public:
    explicit ValidityChecker(const Scene& scene) : scene_(&scene) {}

    bool is_valid(const CPoint& c);
    [[nodiscard]] std::uint64_t cd_calls() const noexcept { return calls_; }
    [[nodiscard]] const Scene& scene() const noexcept { return *scene_; }

private:
    const Scene* scene_;
    std::uint64_t calls_ = 0;
};

/// Uncounted validity test; ValidityChecker wraps this.
bool configuration_free(const Scene& scene, const CPoint& c);

/// World-frame corners of the planar rectangle at (x, y, theta), counterclockwise.
std::array<std::array<double, 2>, 4> rect_corners(const Robot& robot, double x, double y, double theta);

Scene empty_box(int t, int r);
/// Planar 2x1 rectangle in a 10x10 room split by a wall with a hole of width 1 + clearance.
Scene wall_with_hole(double clearance);
/// Planar 2x1 rectangle; S-shaped corridor of width (robot diagonal + clearance) through a thick wall.
Scene z_corridor(double clearance);
/// Ball robot in R^3 x T^3 among an m^3 grid of cubes; start and goal sit in missing corner cells.
Scene clutter_grid(int m, double cube_side, int missing_corners);

/// "empty_box[:t:r]", "wall_with_hole[:clearance]", "z_corridor[:clearance]",
/// "clutter_grid[:m:side:missing]". Throws InvalidInput on unknown names.
Scene builtin_scene(std::string_view spec);
std::vector<std::string> builtin_scene_names();

/// Resolves a builtin spec, or a path to a scene JSON file.
Scene resolve_scene(const std::string& name_or_path);

std::string scene_to_json(const Scene& scene);
/// Throws ParseError naming the offending line or field.
Scene scene_from_json(std::string_view text);
void save_scene(const Scene& scene, const std::filesystem::path& file);
Scene load_scene(const std::filesystem::path& file);

}  // namespace edgenn
