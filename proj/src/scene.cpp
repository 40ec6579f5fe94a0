#include "spatial3d/scene.hpp"

#include "spatial3d/errors.hpp"
#include "spatial3d/random.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace spatial3d {

using nlohmann::ordered_json;

const SceneObject& SceneRecord::object(const std::string& id) const
{
    return objects[index_of(id)];
}

std::size_t SceneRecord::index_of(const std::string& id) const
{
    for (std::size_t i = 0; i < objects.size(); ++i) {
        if (objects[i].object_id == id) {
            return i;
        }
    }
    throw InvalidArgument("scene " + scene_id + ": unknown object id '" + id + "'");
}

SceneBounds infer_bounds(const std::vector<SceneObject>& objects)
{
    if (objects.empty()) {
        throw InvalidArgument("infer_bounds: no objects");
    }
    SceneBounds b{objects.front().box.min_corner(), objects.front().box.max_corner()};
    for (const auto& o : objects) {
        const Point3 lo = o.box.min_corner();
        const Point3 hi = o.box.max_corner();
        for (std::size_t a = 0; a < 3; ++a) {
            b.min[a] = std::min(b.min[a], lo[a]);
            b.max[a] = std::max(b.max[a], hi[a]);
        }
    }
    for (std::size_t a = 0; a < 3; ++a) {
        const double pad = 0.05 * (b.max[a] - b.min[a]);
        b.min[a] -= pad;
        b.max[a] += pad;
    }
    return b;
}

SceneBounds effective_bounds(const SceneRecord& scene)
{
    return scene.bounds ? *scene.bounds : infer_bounds(scene.objects);
}

void validate_scene(const SceneRecord& scene)
{
    std::set<std::string> ids;
    for (const auto& o : scene.objects) {
        if (!ids.insert(o.object_id).second) {
            throw InvalidArgument("scene " + scene.scene_id + ": duplicate object id '" + o.object_id + "'");
        }
        validate_box(o.box);
        if (o.descriptions.empty()) {
            throw InvalidArgument("scene " + scene.scene_id + ": object '" + o.object_id +
                                  "' has no descriptions");
        }
        if (scene.bounds) {
            const Point3 lo = o.box.min_corner();
            const Point3 hi = o.box.max_corner();
            for (std::size_t a = 0; a < 3; ++a) {
                if (lo[a] < scene.bounds->min[a] || hi[a] > scene.bounds->max[a]) {
                    throw InvalidArgument("scene " + scene.scene_id + ": object '" + o.object_id +
                                          "' lies outside the scene bounds");
                }
            }
        }
    }
}

namespace {

Point3 point_from_json(const ordered_json& j)
{
    if (!j.is_array() || j.size() != 3) {
        throw InvalidArgument("scene json: expected a 3-element array");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ordered_json point_to_json(const Point3& p) { return ordered_json::array({p.x, p.y, p.z}); }

SceneRecord scene_from_json(const ordered_json& j)
{
    SceneRecord s;
    s.scene_id = j.at("scene_id").get<std::string>();
    if (j.contains("bounds")) {
        s.bounds = SceneBounds{point_from_json(j["bounds"].at("min")), point_from_json(j["bounds"].at("max"))};
    }
    for (const auto& jo : j.at("objects")) {
        SceneObject o;
        o.object_id = jo.at("object_id").get<std::string>();
        o.label = jo.at("label").get<std::string>();
        o.box.center = point_from_json(jo.at("center"));
        const Point3 e = point_from_json(jo.at("extent"));
        o.box.extent = {e.x, e.y, e.z};
        o.descriptions = jo.at("descriptions").get<std::vector<std::string>>();
        s.objects.push_back(std::move(o));
    }
    return s;
}

ordered_json scene_to_json(const SceneRecord& s)
{
    ordered_json j;
    j["scene_id"] = s.scene_id;
    if (s.bounds) {
        j["bounds"] = {{"min", point_to_json(s.bounds->min)}, {"max", point_to_json(s.bounds->max)}};
    }
    j["objects"] = ordered_json::array();
    for (const auto& o : s.objects) {
        ordered_json jo;
        jo["object_id"] = o.object_id;
        jo["label"] = o.label;
        jo["center"] = point_to_json(o.box.center);
        jo["extent"] = ordered_json::array({o.box.extent[0], o.box.extent[1], o.box.extent[2]});
        jo["descriptions"] = o.descriptions;
        j["objects"].push_back(std::move(jo));
    }
    return j;
}

} // namespace

std::vector<SceneRecord> read_scenes(std::istream& in)
{
    std::vector<SceneRecord> scenes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            scenes.push_back(scene_from_json(ordered_json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw InvalidArgument("scene file line " + std::to_string(line_no) + ": " + e.what());
        }
        validate_scene(scenes.back());
    }
    return scenes;
}

std::vector<SceneRecord> read_scenes_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open scene file '" + path + "'");
    }
    return read_scenes(in);
}

void write_scenes(std::ostream& out, const std::vector<SceneRecord>& scenes)
{
    for (const auto& s : scenes) {
        out << scene_to_json(s).dump() << '\n';
    }
}

namespace {

struct Furniture {
    const char* label;
    std::array<double, 3> size;
};

constexpr std::array<Furniture, 10> kFurniture{{
    {"chair", {0.5, 0.5, 0.9}},
    {"table", {1.4, 0.8, 0.75}},
    {"cabinet", {0.6, 1.0, 0.9}},
    {"bed", {1.6, 2.0, 0.6}},
    {"sofa", {2.0, 0.9, 0.8}},
    {"desk", {1.2, 0.6, 0.75}},
    {"bookshelf", {0.9, 0.35, 1.8}},
    {"trash_can", {0.3, 0.3, 0.4}},
    {"lamp", {0.4, 0.4, 1.5}},
    {"nightstand", {0.45, 0.4, 0.55}},
}};

constexpr std::array<const char*, 6> kColors{"brown", "white", "black", "gray", "wooden", "blue"};

bool overlaps_xy(const Box3& a, const Box3& b)
{
    return std::abs(a.center.x - b.center.x) * 2 < a.extent[0] + b.extent[0] &&
           std::abs(a.center.y - b.center.y) * 2 < a.extent[1] + b.extent[1];
}

} // namespace

SceneRecord synthetic_room(const std::string& scene_id, std::size_t object_count, std::uint64_t seed)
{
    Rng rng(derive_seed(seed, scene_id));
    const double width = uniform_real(rng, 4.0, 8.0);
    const double depth = uniform_real(rng, 4.0, 8.0);
    const double height = 3.0;

    SceneRecord scene;
    scene.scene_id = scene_id;
    scene.bounds = SceneBounds{{0.0, 0.0, 0.0}, {width, depth, height}};

    for (std::size_t i = 0; i < object_count; ++i) {
        const Furniture& f = kFurniture[uniform_int(rng, 0, kFurniture.size() - 1)];
        Box3 box;
        for (std::size_t a = 0; a < 3; ++a) {
            box.extent[a] = f.size[a] * uniform_real(rng, 0.85, 1.15);
        }
        // rejection-sample a floor position; accept an overlap after many tries
        for (int attempt = 0; attempt < 200; ++attempt) {
            box.center = {uniform_real(rng, box.extent[0] / 2, width - box.extent[0] / 2),
                          uniform_real(rng, box.extent[1] / 2, depth - box.extent[1] / 2), box.extent[2] / 2};
            const bool clear = std::none_of(scene.objects.begin(), scene.objects.end(),
                                            [&](const SceneObject& o) { return overlaps_xy(o.box, box); });
            if (clear) {
                break;
            }
        }

        SceneObject obj;
        obj.object_id = std::to_string(i);
        obj.label = f.label;
        obj.box = box;
        std::string name = f.label;
        std::replace(name.begin(), name.end(), '_', ' ');
        const char* color = kColors[uniform_int(rng, 0, kColors.size() - 1)];
        obj.descriptions.push_back(std::string("this is a ") + color + " " + name + ".");
        obj.descriptions.push_back("the " + name + (box.center.x < width / 2 ? " is on the left side" : " is on the right side") +
                                   " of the room.");
        scene.objects.push_back(std::move(obj));
    }
    return scene;
}

PointCloud sample_scene_cloud(const SceneRecord& scene, std::size_t points_per_object, std::uint64_t seed)
{
    Rng rng(derive_seed(seed, scene.scene_id + "/cloud"));
    PointCloud cloud;
    cloud.points.reserve(scene.objects.size() * points_per_object);
    for (const auto& o : scene.objects) {
        const Point3 lo = o.box.min_corner();
        for (std::size_t i = 0; i < points_per_object; ++i) {
            cloud.points.push_back({lo.x + o.box.extent[0] * uniform01(rng), lo.y + o.box.extent[1] * uniform01(rng),
                                    lo.z + o.box.extent[2] * uniform01(rng)});
        }
    }
    return cloud;
}

double scene_diagonal(const SceneRecord& scene)
{
    const SceneBounds b = effective_bounds(scene);
    return distance(b.min, b.max);
}

} // namespace spatial3d
