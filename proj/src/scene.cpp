#include "lidal/scene.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lidal {

namespace {

void check(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("scene: " + what);
}

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

Obstacle make_desk(Vec2 center) {
    Obstacle desk;
    desk.kind = ObstacleKind::desk;
    desk.base_center = {center.x, center.y, 0.0};
    desk.dims = {1.54, 0.76, 0.75};
    desk.reflectivity = 0.55;
    desk.displaced_center = center;
    return desk;
}

Obstacle make_bookshelf(Vec2 center) {
    Obstacle shelf;
    shelf.kind = ObstacleKind::bookshelf;
    shelf.base_center = {center.x, center.y, 0.0};
    shelf.dims = {3.0, 0.8, 2.0};
    shelf.reflectivity = 0.55;
    shelf.displaced_center = center;
    return shelf;
}

double draw_target_reflectivity(Rng& rng) {
    const double value = rng.gaussian(0.72, 0.3);
    return std::clamp(value, 0.0, 1.0);
}

namespace {

/// Standard office layout: two movable desks flanking the room center, two
/// desks against the side walls, one bookshelf against the far wall. The two
/// center desks carry displacement paths of exactly 2 m that end adjacent to
/// the side walls.
std::vector<Obstacle> default_furniture_layout() {
    std::vector<Obstacle> furniture;

    const double dx = 2.0 - 0.78;                      // horizontal part of the path
    const double dy = std::sqrt(4.0 - dx * dx);        // total path length 2 m

    Obstacle desk_a = make_desk({2.0, 3.5});
    desk_a.movable = true;
    desk_a.displaced_center = {0.78, 3.5 - dy};
    furniture.push_back(desk_a);

    Obstacle desk_b = make_desk({2.0, 4.5});
    desk_b.movable = true;
    desk_b.displaced_center = {3.22, 4.5 + dy};
    furniture.push_back(desk_b);

    furniture.push_back(make_desk({0.78, 5.8}));
    furniture.push_back(make_desk({3.22, 2.2}));
    furniture.push_back(make_bookshelf({2.0, 7.6}));
    return furniture;
}

}  // namespace

bool placement_feasible(const Scene& scene, const Box& box, int ignore_target) {
    if (!box.inside(scene.room.bounds())) return false;
    for (const auto& obstacle : scene.obstacles) {
        if (box.intersects(obstacle.box())) return false;
    }
    for (std::size_t i = 0; i < scene.targets.size(); ++i) {
        if (static_cast<int>(i) == ignore_target) continue;
        if (box.intersects(scene.targets[i].box())) return false;
    }
    return true;
}

Scene build_scene(const SceneConfig& config) {
    Scene scene;
    scene.room = config.room;
    scene.patch_size = config.patch_size;
    if (!config.obstacles.empty()) {
        scene.obstacles = config.obstacles;
    } else if (config.default_furniture) {
        scene.obstacles = default_furniture_layout();
    }

    Rng rng(Rng::mix(config.seed, 0x5ce2eULL));
    const double half_x = 0.15 * 0.5;
    const double half_y = 0.48 * 0.5;
    for (int id = 0; id < config.target_count; ++id) {
        Target target;
        target.id = id;
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            target.position = {rng.uniform(half_x, scene.room.width - half_x),
                               rng.uniform(half_y, scene.room.length - half_y)};
            placed = placement_feasible(scene, target.box());
        }
        if (!placed) throw std::runtime_error("scene: could not place target " + std::to_string(id));
        target.reflectivity = draw_target_reflectivity(rng);
        scene.targets.push_back(target);
    }

    validate_scene(scene);
    return scene;
}

void validate_scene(const Scene& scene) {
    const Room& room = scene.room;
    check(room.length > 0.0 && room.width > 0.0 && room.height > 0.0,
          "room dimensions must be positive");
    check(in_unit_interval(room.rho_walls) && in_unit_interval(room.rho_floor) &&
              in_unit_interval(room.rho_ceiling),
          "room reflectivities must lie in [0,1]");
    check(scene.patch_size > 0.0, "patch_size must be positive");

    const Box bounds = room.bounds();
    std::vector<Box> boxes;
    boxes.reserve(scene.obstacles.size() + scene.targets.size());
    for (const auto& obstacle : scene.obstacles) {
        check(obstacle.dims.x > 0.0 && obstacle.dims.y > 0.0 && obstacle.dims.z > 0.0,
              "obstacle dimensions must be positive");
        check(in_unit_interval(obstacle.reflectivity), "obstacle reflectivity must lie in [0,1]");
        check(obstacle.box().inside(bounds), "obstacle extends outside the room");
        boxes.push_back(obstacle.box());
    }
    for (const auto& target : scene.targets) {
        check(target.dims.x > 0.0 && target.dims.y > 0.0 && target.dims.z > 0.0,
              "target dimensions must be positive");
        check(in_unit_interval(target.reflectivity), "target reflectivity must lie in [0,1]");
        check(target.box().inside(bounds), "target extends outside the room");
        boxes.push_back(target.box());
    }
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
            check(!boxes[i].intersects(boxes[j]), "boxes " + std::to_string(i) + " and " +
                                                      std::to_string(j) + " overlap");
        }
    }
}

Scene displace_furniture(const Scene& scene, double fraction, std::uint64_t /*seed*/) {
    check(fraction >= 0.0 && fraction <= 1.0, "displacement fraction must lie in [0,1]");
    if (fraction == 0.0) return scene;

    Scene displaced = scene;
    for (std::size_t i = 0; i < displaced.obstacles.size(); ++i) {
        Obstacle& obstacle = displaced.obstacles[i];
        if (!obstacle.movable) continue;
        const Vec2 start{scene.obstacles[i].base_center.x, scene.obstacles[i].base_center.y};
        const Vec2 end = obstacle.displaced_center;

        auto place_at = [&](double f) {
            const Vec2 c = start + (end - start) * f;
            obstacle.base_center = {c.x, c.y, scene.obstacles[i].base_center.z};
        };
        auto feasible_here = [&]() {
            const Box box = obstacle.box();
            if (!box.inside(displaced.room.bounds())) return false;
            for (std::size_t j = 0; j < displaced.obstacles.size(); ++j) {
                if (j == i) continue;
                if (box.intersects(displaced.obstacles[j].box())) return false;
            }
            for (const auto& target : displaced.targets) {
                if (box.intersects(target.box())) return false;
            }
            return true;
        };

        // Slide back along the path until the box fits.
        bool placed = false;
        const int steps = 256;
        for (int s = 0; s <= steps; ++s) {
            place_at(fraction * (1.0 - static_cast<double>(s) / steps));
            if (feasible_here()) {
                placed = true;
                break;
            }
        }
        if (!placed) throw std::runtime_error("scene: furniture displacement is unresolvable");
    }

    validate_scene(displaced);
    return displaced;
}

namespace {

struct Face {
    Vec3 origin;
    Vec3 u_dir;
    double u_len = 0.0;
    Vec3 v_dir;
    double v_len = 0.0;
    Vec3 normal;
};

void patchize_face(const Face& face, double patch_size, double reflectivity, int owner,
                   std::vector<Patch>& out) {
    const int nu = std::max(1, static_cast<int>(std::ceil(face.u_len / patch_size)));
    const int nv = std::max(1, static_cast<int>(std::ceil(face.v_len / patch_size)));
    const double du = face.u_len / nu;
    const double dv = face.v_len / nv;
    const double area = du * dv;
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            Patch patch;
            patch.center = face.origin + face.u_dir * ((i + 0.5) * du) + face.v_dir * ((j + 0.5) * dv);
            patch.normal = face.normal;
            patch.area = area;
            patch.reflectivity = reflectivity;
            patch.owner = owner;
            out.push_back(patch);
        }
    }
}

void patchize_box(const Box& box, double patch_size, double reflectivity, int owner,
                  std::vector<Patch>& out) {
    const Vec3 e = box.extent();
    // Top.
    patchize_face({{box.lo.x, box.lo.y, box.hi.z}, {1, 0, 0}, e.x, {0, 1, 0}, e.y, {0, 0, 1}},
                  patch_size, reflectivity, owner, out);
    // Bottom, only when raised off the floor.
    if (box.lo.z > 1e-9) {
        patchize_face({{box.lo.x, box.lo.y, box.lo.z}, {1, 0, 0}, e.x, {0, 1, 0}, e.y, {0, 0, -1}},
                      patch_size, reflectivity, owner, out);
    }
    // Sides.
    patchize_face({{box.lo.x, box.lo.y, box.lo.z}, {0, 1, 0}, e.y, {0, 0, 1}, e.z, {-1, 0, 0}},
                  patch_size, reflectivity, owner, out);
    patchize_face({{box.hi.x, box.lo.y, box.lo.z}, {0, 1, 0}, e.y, {0, 0, 1}, e.z, {1, 0, 0}},
                  patch_size, reflectivity, owner, out);
    patchize_face({{box.lo.x, box.lo.y, box.lo.z}, {1, 0, 0}, e.x, {0, 0, 1}, e.z, {0, -1, 0}},
                  patch_size, reflectivity, owner, out);
    patchize_face({{box.lo.x, box.hi.y, box.lo.z}, {1, 0, 0}, e.x, {0, 0, 1}, e.z, {0, 1, 0}},
                  patch_size, reflectivity, owner, out);
}

}  // namespace

std::vector<Patch> make_background_patches(const Scene& scene) {
    std::vector<Patch> patches;
    const Room& room = scene.room;
    const double ps = scene.patch_size;
    const double W = room.width, L = room.length, H = room.height;

    // Floor and ceiling.
    patchize_face({{0, 0, 0}, {1, 0, 0}, W, {0, 1, 0}, L, {0, 0, 1}}, ps, room.rho_floor, -1,
                  patches);
    patchize_face({{0, 0, H}, {1, 0, 0}, W, {0, 1, 0}, L, {0, 0, -1}}, ps, room.rho_ceiling, -1,
                  patches);
    // Walls.
    patchize_face({{0, 0, 0}, {0, 1, 0}, L, {0, 0, 1}, H, {1, 0, 0}}, ps, room.rho_walls, -1,
                  patches);
    patchize_face({{W, 0, 0}, {0, 1, 0}, L, {0, 0, 1}, H, {-1, 0, 0}}, ps, room.rho_walls, -1,
                  patches);
    patchize_face({{0, 0, 0}, {1, 0, 0}, W, {0, 0, 1}, H, {0, 1, 0}}, ps, room.rho_walls, -1,
                  patches);
    patchize_face({{0, L, 0}, {1, 0, 0}, W, {0, 0, 1}, H, {0, -1, 0}}, ps, room.rho_walls, -1,
                  patches);

    for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
        patchize_box(scene.obstacles[i].box(), ps, scene.obstacles[i].reflectivity,
                     static_cast<int>(i), patches);
    }
    return patches;
}

std::vector<Patch> make_target_patches(const Target& target, double patch_size, int owner) {
    std::vector<Patch> patches;
    patchize_box(target.box(), patch_size, target.reflectivity, owner, patches);
    return patches;
}

std::vector<Patch> make_patches(const Scene& scene) {
    std::vector<Patch> patches = make_background_patches(scene);
    const int base = static_cast<int>(scene.obstacles.size());
    for (std::size_t t = 0; t < scene.targets.size(); ++t) {
        auto target_patches =
            make_target_patches(scene.targets[t], scene.patch_size, base + static_cast<int>(t));
        patches.insert(patches.end(), target_patches.begin(), target_patches.end());
    }
    return patches;
}

}  // namespace lidal
