#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lidal/geometry.hpp"
#include "lidal/rng.hpp"

namespace lidal {

/// Room coordinates: x in [0, width], y in [0, length], z in [0, height].
struct Room {
    double length = 8.0;
    double width = 4.0;
    double height = 3.0;
    double rho_walls = 0.8;
    double rho_floor = 0.3;
    double rho_ceiling = 0.8;

    Box bounds() const { return {{0.0, 0.0, 0.0}, {width, length, height}}; }
    double diagonal() const {
        return std::sqrt(length * length + width * width + height * height);
    }
};

enum class ObstacleKind { desk, bookshelf, custom };

struct Obstacle {
    ObstacleKind kind = ObstacleKind::custom;
    Vec3 base_center;          // z is the bottom of the box
    Vec3 dims;                 // extents along x, y, z
    double reflectivity = 0.55;
    bool movable = false;
    Vec2 displaced_center;     // base-center endpoint of the displacement path

    Box box() const {
        const Vec3 half{dims.x * 0.5, dims.y * 0.5, 0.0};
        return {{base_center.x - half.x, base_center.y - half.y, base_center.z},
                {base_center.x + half.x, base_center.y + half.y, base_center.z + dims.z}};
    }
};

Obstacle make_desk(Vec2 center);
Obstacle make_bookshelf(Vec2 center);

struct Target {
    int id = 0;
    Vec2 position;                    // floor center
    Vec3 dims{0.15, 0.48, 1.70};
    double reflectivity = 0.72;

    Box box() const {
        return {{position.x - dims.x * 0.5, position.y - dims.y * 0.5, 0.0},
                {position.x + dims.x * 0.5, position.y + dims.y * 0.5, dims.z}};
    }
    Vec3 top_center() const { return {position.x, position.y, dims.z}; }
};

/// Draws the target reflectivity: Gaussian(0.72, 0.3) clipped to [0, 1].
double draw_target_reflectivity(Rng& rng);

struct Scene {
    Room room;
    std::vector<Obstacle> obstacles;
    std::vector<Target> targets;
    double patch_size = 0.10;

    Scene with_targets(std::vector<Target> t) const {
        Scene copy = *this;
        copy.targets = std::move(t);
        return copy;
    }
};

struct SceneConfig {
    Room room;
    std::vector<Obstacle> obstacles;  // empty + default_furniture => standard office
    bool default_furniture = true;    // 4 desks + 1 bookshelf
    int target_count = 0;
    std::uint64_t seed = 1;
    double patch_size = 0.10;
};

/// Builds and validates a scene. Target positions are drawn uniformly over
/// the feasible floor region and reflectivities from the clipped Gaussian,
/// both deterministically from the seed.
Scene build_scene(const SceneConfig& config);

/// Throws std::invalid_argument when any geometric or reflectivity invariant
/// is violated.
void validate_scene(const Scene& scene);

/// True when `box` stays inside the room and intersects no obstacle or target
/// (the box at `ignore_target` is skipped, so a target can be re-tested
/// against the rest of the scene).
bool placement_feasible(const Scene& scene, const Box& box, int ignore_target = -1);

/// Moves every movable obstacle along the straight line from its original
/// base center to its displaced endpoint. fraction 0 returns the scene
/// unchanged; fraction 1 puts the furniture at the endpoints. A move that
/// would intersect another box is resolved by sliding back along the path;
/// if even the start is infeasible the function throws. The seed is accepted
/// for interface symmetry with the other scene operations and is unused by
/// the straight-line path.
Scene displace_furniture(const Scene& scene, double fraction, std::uint64_t seed = 0);

/// One diffuse surface element.
struct Patch {
    Vec3 center;
    Vec3 normal;
    double area = 0.0;
    double reflectivity = 0.0;
    int owner = -1;  // -1 room shell, [0, n_obstacles) obstacles, then targets
};

/// Deterministic discretization of every reflective face: room shell,
/// obstacle boxes, target boxes. Face cells never exceed patch_size on a side
/// and tile each face exactly.
std::vector<Patch> make_patches(const Scene& scene);

/// Room shell + obstacles only (the static part).
std::vector<Patch> make_background_patches(const Scene& scene);

/// Patches of a single target box; `owner` is stored on each patch.
std::vector<Patch> make_target_patches(const Target& target, double patch_size, int owner);

}  // namespace lidal
