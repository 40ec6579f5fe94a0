#pragma once

// Instruction samples for distance measurement, object movement and object
// placement, built from scene records on the quantized grid.

#include "spatial3d/random.hpp"
#include "spatial3d/scene.hpp"
#include "spatial3d/token_codec.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spatial3d {

enum class Task { distance, movement, placement };

const char* to_string(Task task);
Task task_from_string(std::string_view name);

inline constexpr std::array<Task, 3> kAllTasks{Task::distance, Task::movement, Task::placement};

/// right/left = +-x, forward/backward = +-y, up/down = +-z.
enum class Direction { forward, backward, left, right, up, down };

const char* to_string(Direction d);
Direction direction_from_string(std::string_view name);
std::size_t axis_of(Direction d);
int sign_of(Direction d);
Direction opposite(Direction d);

inline constexpr std::array<Direction, 6> kAllDirections{Direction::forward, Direction::backward, Direction::left,
                                                         Direction::right,   Direction::up,       Direction::down};

/// Structured ground truth on the grid.
///   distance:  boxes = {A, B}, gaps = 3 axis gaps
///   movement:  boxes = {original, moved}, direction, magnitude
///   placement: boxes = {masked}, center = masked center
struct SampleGt {
    std::vector<QuantBox> boxes;
    std::vector<int> gaps;
    std::optional<GridTriple> center;
    std::optional<Direction> direction;
    int magnitude = 0;

    bool operator==(const SampleGt&) const = default;
};

struct Provenance {
    /// distance: {A, B}; movement: {moved}; placement: {masked}
    std::vector<std::string> object_ids;
    /// placement only: every member of the sub-scene
    std::vector<std::string> context_ids;
    std::uint64_t seed = 0;

    bool operator==(const Provenance&) const = default;
};

struct InstructionSample {
    std::string id;  // scene_id/task/index
    std::string split;
    Task task = Task::distance;
    std::string scene_id;
    std::string question;
    std::string answer;
    SampleGt gt;
    Provenance provenance;

    bool operator==(const InstructionSample&) const = default;
};

/// What parse_answer(sample.answer) must yield for the sample to be consistent.
AnswerPayload expected_payload(const InstructionSample& sample);

/// Throws InvalidArgument describing the first mismatch between the answer
/// text and the structured ground truth.
void check_sample(const InstructionSample& sample);

InstructionSample synth_distance(const SceneRecord& scene, const std::string& a, const std::string& b, Rng& rng);

/// `magnitude` in grid units. The moved box must stay inside the grid (one
/// unit of rounding slack) on the moved axis.
InstructionSample synth_movement(const SceneRecord& scene, const std::string& object_id, Direction direction,
                                 int magnitude, Rng& rng);

/// Largest magnitude that keeps the box inside the grid; 0 if none.
int max_move(const QuantBox& box, Direction direction);

QuantBox move_box(const QuantBox& box, Direction direction, int magnitude);

struct SubScene {
    std::string parent_id;
    std::vector<SceneObject> objects;
    SceneBounds bounds;

    QuantTransform transform() const { return fit_transform(bounds); }
};

/// Sub-scene over the given objects with bounds inferred from them alone.
SubScene make_subscene(const SceneRecord& scene, const std::vector<std::string>& object_ids);

/// Each sub-scene: a random anchor plus its s-1 nearest objects by center
/// distance (ties by scene order), s uniform in [3, min(8, objects)].
std::vector<SubScene> extract_subscenes(const SceneRecord& scene, std::size_t count, Rng& rng);

/// Masks a uniformly chosen member.
InstructionSample synth_placement(const SubScene& sub, Rng& rng);
InstructionSample synth_placement(const SubScene& sub, std::size_t masked_index);

// ---- datasets ----

struct TaskCounts {
    std::size_t train = 0;
    std::size_t val = 0;
};

struct DatasetPlan {
    std::array<TaskCounts, 3> counts{};  // indexed by Task
    /// Fraction of scenes held out for validation (scene-disjoint split).
    double val_scene_fraction = 0.2;

    TaskCounts& operator[](Task t) { return counts[static_cast<std::size_t>(t)]; }
    const TaskCounts& operator[](Task t) const { return counts[static_cast<std::size_t>(t)]; }

    /// Distance 171K/2K, movement 36K/9K, placement 34K/9K, times `scale`, rounded.
    static DatasetPlan full_size(double scale, const std::vector<Task>& tasks = {kAllTasks.begin(), kAllTasks.end()});
};

struct Dataset {
    std::vector<InstructionSample> train;
    std::vector<InstructionSample> val;
    std::vector<std::string> train_scenes;
    std::vector<std::string> val_scenes;
    std::uint64_t seed = 0;
    DatasetPlan plan;
};

/// Deterministic given (scenes, plan, seed). Samples come out sorted by
/// (scene_id, task, per-scene index).
Dataset generate_dataset(const std::vector<SceneRecord>& scenes, const DatasetPlan& plan, std::uint64_t seed);

inline constexpr int kSchemaVersion = 1;

std::string sample_to_json(const InstructionSample& sample);
InstructionSample sample_from_json(std::string_view line);
void write_samples(std::ostream& out, const std::vector<InstructionSample>& samples);
std::vector<InstructionSample> read_samples(std::istream& in);
std::vector<InstructionSample> read_samples_file(const std::string& path);

/// Hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Manifest JSON for a dataset whose sample files hold `train_bytes` and `val_bytes`.
std::string manifest_json(const Dataset& ds, const std::string& train_bytes, const std::string& val_bytes);

/// Writes train.jsonl, val.jsonl and manifest.json into `dir` (created if
/// missing). Returns the content hash.
std::string write_dataset(const Dataset& ds, const std::string& dir);

/// Rooms named sceneNNNN_00 with 6 to 12 objects each.
std::vector<SceneRecord> synthetic_corpus(std::size_t count, std::uint64_t seed);

} // namespace spatial3d
