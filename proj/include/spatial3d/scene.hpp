#pragma once

#include "spatial3d/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spatial3d {

struct SceneObject {
    std::string object_id;
    std::string label;
    Box3 box;
    std::vector<std::string> descriptions;
};

/// Per-axis metric bounds.
struct SceneBounds {
    Point3 min;
    Point3 max;
};

struct SceneRecord {
    std::string scene_id;
    std::vector<SceneObject> objects;
    std::optional<SceneBounds> bounds;

    const SceneObject& object(const std::string& id) const;
    std::size_t index_of(const std::string& id) const;
};

/// Union of the object boxes, padded by 5% of the span on each side of every axis.
SceneBounds infer_bounds(const std::vector<SceneObject>& objects);

/// Explicit bounds when present, otherwise infer_bounds(objects).
SceneBounds effective_bounds(const SceneRecord& scene);

/// Throws InvalidArgument on duplicate ids, invalid boxes, missing
/// descriptions, or boxes outside explicit bounds.
void validate_scene(const SceneRecord& scene);

/// One JSON object per line. Schema in docs/formats.md.
std::vector<SceneRecord> read_scenes(std::istream& in);
std::vector<SceneRecord> read_scenes_file(const std::string& path);
void write_scenes(std::ostream& out, const std::vector<SceneRecord>& scenes);

/// Seeded furnished room: `object_count` boxes of common furniture labels
/// resting on the floor of a room between 4 and 8 m wide.
SceneRecord synthetic_room(const std::string& scene_id, std::size_t object_count, std::uint64_t seed);

/// Uniform samples inside every object box, object by object.
PointCloud sample_scene_cloud(const SceneRecord& scene, std::size_t points_per_object, std::uint64_t seed);

/// Length of the diagonal of effective_bounds(scene).
double scene_diagonal(const SceneRecord& scene);

} // namespace spatial3d
