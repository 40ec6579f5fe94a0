#include "spatial3d/modle_synth.hpp"

#include "spatial3d/errors.hpp"

#include "json.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

namespace spatial3d {

using nlohmann::ordered_json;

// ---- enums ----

const char* to_string(Task task)
{
    switch (task) {
    case Task::distance: return "distance";
    case Task::movement: return "movement";
    case Task::placement: return "placement";
    }
    return "?";
}

Task task_from_string(std::string_view name)
{
    for (Task t : kAllTasks) {
        if (name == to_string(t)) {
            return t;
        }
    }
    throw InvalidArgument("unknown task '" + std::string(name) + "'");
}

const char* to_string(Direction d)
{
    switch (d) {
    case Direction::forward: return "forward";
    case Direction::backward: return "backward";
    case Direction::left: return "left";
    case Direction::right: return "right";
    case Direction::up: return "up";
    case Direction::down: return "down";
    }
    return "?";
}

Direction direction_from_string(std::string_view name)
{
    for (Direction d : kAllDirections) {
        if (name == to_string(d)) {
            return d;
        }
    }
    throw InvalidArgument("unknown direction '" + std::string(name) + "'");
}

std::size_t axis_of(Direction d)
{
    switch (d) {
    case Direction::left:
    case Direction::right: return 0;
    case Direction::forward:
    case Direction::backward: return 1;
    case Direction::up:
    case Direction::down: return 2;
    }
    return 0;
}

int sign_of(Direction d)
{
    return d == Direction::right || d == Direction::forward || d == Direction::up ? 1 : -1;
}

Direction opposite(Direction d)
{
    switch (d) {
    case Direction::forward: return Direction::backward;
    case Direction::backward: return Direction::forward;
    case Direction::left: return Direction::right;
    case Direction::right: return Direction::left;
    case Direction::up: return Direction::down;
    case Direction::down: return Direction::up;
    }
    return d;
}

// ---- consistency ----

AnswerPayload expected_payload(const InstructionSample& sample)
{
    AnswerPayload p;
    switch (sample.task) {
    case Task::distance:
        for (const auto& b : sample.gt.boxes) {
            p.items.emplace_back(b);
        }
        for (int g : sample.gt.gaps) {
            p.items.emplace_back(Gap{g});
        }
        break;
    case Task::movement:
        for (const auto& b : sample.gt.boxes) {
            p.items.emplace_back(b);
        }
        break;
    case Task::placement:
        if (sample.gt.center) {
            p.items.emplace_back(CenterTriple{*sample.gt.center});
        }
        break;
    }
    return p;
}

void check_sample(const InstructionSample& s)
{
    auto fail = [&](const std::string& why) { throw InvalidArgument("sample " + s.id + ": " + why); };
    const AnswerPayload parsed = parse_answer(s.answer);
    if (parsed.items != expected_payload(s).items) {
        fail("answer does not parse to the ground truth");
    }
    switch (s.task) {
    case Task::distance: {
        if (s.gt.boxes.size() != 2 || s.gt.gaps.size() != 3) {
            fail("distance ground truth needs 2 boxes and 3 gaps");
        }
        for (std::size_t a = 0; a < 3; ++a) {
            if (s.gt.gaps[a] != std::abs(s.gt.boxes[0].center[a] - s.gt.boxes[1].center[a])) {
                fail("gap disagrees with the box centers");
            }
        }
        break;
    }
    case Task::movement: {
        if (s.gt.boxes.size() != 2 || !s.gt.direction || s.gt.magnitude < 1) {
            fail("movement ground truth needs 2 boxes, a direction and a magnitude");
        }
        if (move_box(s.gt.boxes[0], *s.gt.direction, s.gt.magnitude) != s.gt.boxes[1]) {
            fail("moved box disagrees with direction and magnitude");
        }
        if (!within_grid(s.gt.boxes[1])) {
            fail("moved box leaves the grid");
        }
        break;
    }
    case Task::placement: {
        if (s.gt.boxes.size() != 1 || !s.gt.center || s.gt.boxes[0].center != *s.gt.center) {
            fail("placement ground truth needs the masked box and its center");
        }
        const auto& e = s.gt.boxes[0].extent;
        const std::string size = "size w:" + std::to_string(e[0]) + ", h:" + std::to_string(e[1]) +
                                 ", l:" + std::to_string(e[2]) + " ";
        if (s.question.find(size) == std::string::npos) {
            fail("question does not state the masked size");
        }
        break;
    }
    }
}

// ---- single samples ----

namespace {

const std::string& pick_description(const SceneObject& o, Rng& rng)
{
    if (o.descriptions.empty()) {
        throw InvalidArgument("object '" + o.object_id + "' has no descriptions");
    }
    return o.descriptions[uniform_int(rng, 0, o.descriptions.size() - 1)];
}

} // namespace

InstructionSample synth_distance(const SceneRecord& scene, const std::string& a, const std::string& b, Rng& rng)
{
    if (a == b) {
        throw InvalidArgument("synth_distance: objects must differ");
    }
    const SceneObject& oa = scene.object(a);
    const SceneObject& ob = scene.object(b);
    const QuantTransform tf = fit_transform(scene);
    const QuantBox qa = tf.quantize(oa.box);
    const QuantBox qb = tf.quantize(ob.box);
    const std::string& da = pick_description(oa, rng);
    const std::string& db = pick_description(ob, rng);

    InstructionSample s;
    s.task = Task::distance;
    s.scene_id = scene.scene_id;
    s.gt.boxes = {qa, qb};
    for (std::size_t k = 0; k < 3; ++k) {
        s.gt.gaps.push_back(std::abs(qa.center[k] - qb.center[k]));
    }
    s.provenance.object_ids = {a, b};

    s.question = "Object A is described as: '" + da + "' Object B is described as: '" + db +
                 "' Please provide the distance between Object A and Object B.";
    s.answer = "Object A is a " + oa.label + " located at " + emit_loc(qa) + ". Object B is a " + ob.label +
               " located at " + emit_loc(qb) + ". The spatial distance from Object A to Object B on the x-axis is " +
               emit_gap(s.gt.gaps[0]) + " units, on the y-axis is " + emit_gap(s.gt.gaps[1]) +
               " units, and on the z-axis is " + emit_gap(s.gt.gaps[2]) + " units.";
    return s;
}

int max_move(const QuantBox& box, Direction direction)
{
    constexpr double kSlack = 1.0;
    const std::size_t a = axis_of(direction);
    const double c = box.center[a];
    const double half = box.extent[a] / 2.0;
    double limit = 0.0;
    if (sign_of(direction) > 0) {
        limit = std::min(kGridMax - c, kGridMax + kSlack - c - half);
    } else {
        limit = std::min(c, c - half + kSlack);
    }
    return limit < 0.0 ? 0 : static_cast<int>(std::floor(limit));
}

QuantBox move_box(const QuantBox& box, Direction direction, int magnitude)
{
    QuantBox moved = box;
    moved.center[axis_of(direction)] += sign_of(direction) * magnitude;
    return moved;
}

InstructionSample synth_movement(const SceneRecord& scene, const std::string& object_id, Direction direction,
                                 int magnitude, Rng& rng)
{
    if (magnitude < 1) {
        throw InvalidArgument("synth_movement: magnitude must be at least 1");
    }
    const SceneObject& o = scene.object(object_id);
    const QuantBox q = fit_transform(scene).quantize(o.box);
    if (magnitude > max_move(q, direction)) {
        throw InvalidArgument("synth_movement: moving '" + object_id + "' " + to_string(direction) + " by " +
                              std::to_string(magnitude) + " leaves the grid");
    }
    const QuantBox moved = move_box(q, direction, magnitude);
    const std::string& desc = pick_description(o, rng);
    const std::string motion = std::string(to_string(direction)) + " by " + std::to_string(magnitude) + " units";

    InstructionSample s;
    s.task = Task::movement;
    s.scene_id = scene.scene_id;
    s.gt.boxes = {q, moved};
    s.gt.direction = direction;
    s.gt.magnitude = magnitude;
    s.provenance.object_ids = {object_id};
    s.question = "Based on the provided description, '" + desc +
                 "' Move the object that closely matches this description " + motion +
                 ", and then describe its new location.";
    s.answer = "It is a " + o.label + " located at " + emit_loc(q) + ". Its location after moving " + motion +
               " is " + emit_loc(moved) + ".";
    return s;
}

SubScene make_subscene(const SceneRecord& scene, const std::vector<std::string>& object_ids)
{
    if (object_ids.size() < 3 || object_ids.size() > 8) {
        throw InvalidArgument("sub-scene needs 3 to 8 objects, got " + std::to_string(object_ids.size()));
    }
    SubScene sub;
    sub.parent_id = scene.scene_id;
    for (const auto& id : object_ids) {
        sub.objects.push_back(scene.object(id));
    }
    sub.bounds = infer_bounds(sub.objects);
    return sub;
}

std::vector<SubScene> extract_subscenes(const SceneRecord& scene, std::size_t count, Rng& rng)
{
    const std::size_t n = scene.objects.size();
    if (n < 3) {
        throw InvalidArgument("extract_subscenes: scene " + scene.scene_id + " has fewer than 3 objects");
    }
    std::vector<SubScene> out;
    for (std::size_t c = 0; c < count; ++c) {
        const std::size_t anchor = uniform_int(rng, 0, n - 1);
        const std::size_t size = uniform_int(rng, 3, std::min<std::size_t>(8, n));
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < n; ++i) {
            if (i != anchor) {
                order.push_back(i);
            }
        }
        const Point3& pa = scene.objects[anchor].box.center;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            return squared_distance(scene.objects[i].box.center, pa) < squared_distance(scene.objects[j].box.center, pa);
        });
        std::vector<std::string> ids{scene.objects[anchor].object_id};
        for (std::size_t k = 0; k + 1 < size; ++k) {
            ids.push_back(scene.objects[order[k]].object_id);
        }
        out.push_back(make_subscene(scene, ids));
    }
    return out;
}

InstructionSample synth_placement(const SubScene& sub, std::size_t masked_index)
{
    if (sub.objects.size() < 3 || sub.objects.size() > 8) {
        throw InvalidArgument("synth_placement: sub-scene needs 3 to 8 objects");
    }
    if (masked_index >= sub.objects.size()) {
        throw InvalidArgument("synth_placement: masked index out of range");
    }
    const SceneObject& o = sub.objects[masked_index];
    const QuantBox q = sub.transform().quantize(o.box);

    InstructionSample s;
    s.task = Task::placement;
    s.scene_id = sub.parent_id;
    s.gt.boxes = {q};
    s.gt.center = q.center;
    s.provenance.object_ids = {o.object_id};
    for (const auto& member : sub.objects) {
        s.provenance.context_ids.push_back(member.object_id);
    }
    s.question = "Add a " + o.label + " with size w:" + std::to_string(q.extent[0]) + ", h:" +
                 std::to_string(q.extent[1]) + ", l:" + std::to_string(q.extent[2]) +
                 " to the current indoor scene, and please output the center coordinates of the object.";
    s.answer = emit_triple(q.center);
    return s;
}

InstructionSample synth_placement(const SubScene& sub, Rng& rng)
{
    if (sub.objects.empty()) {
        throw InvalidArgument("synth_placement: empty sub-scene");
    }
    return synth_placement(sub, uniform_int(rng, 0, sub.objects.size() - 1));
}

// ---- datasets ----

DatasetPlan DatasetPlan::full_size(double scale, const std::vector<Task>& tasks)
{
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidArgument("dataset scale must be positive");
    }
    constexpr std::array<TaskCounts, 3> kFullCounts{{{171000, 2000}, {36000, 9000}, {34000, 9000}}};
    DatasetPlan plan;
    for (Task t : tasks) {
        const auto& full = kFullCounts[static_cast<std::size_t>(t)];
        plan[t] = {static_cast<std::size_t>(std::llround(full.train * scale)),
                   static_cast<std::size_t>(std::llround(full.val * scale))};
    }
    return plan;
}

namespace {

bool eligible(const SceneRecord& scene, Task task)
{
    switch (task) {
    case Task::distance: return scene.objects.size() >= 2;
    case Task::movement: return !scene.objects.empty();
    case Task::placement: return scene.objects.size() >= 3;
    }
    return false;
}

InstructionSample random_movement(const SceneRecord& scene, Rng& rng)
{
    constexpr int kMinMagnitude = 10;
    constexpr int kMaxMagnitude = 150;
    constexpr int kAttempts = 256;
    const QuantTransform tf = fit_transform(scene);
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const SceneObject& o = scene.objects[uniform_int(rng, 0, scene.objects.size() - 1)];
        const Direction d = kAllDirections[uniform_int(rng, 0, kAllDirections.size() - 1)];
        const int room = max_move(tf.quantize(o.box), d);
        if (room < kMinMagnitude) {
            continue;
        }
        // rejection over [10, 150] until the move fits
        int magnitude = 0;
        do {
            magnitude = static_cast<int>(uniform_int(rng, kMinMagnitude, kMaxMagnitude));
        } while (magnitude > room);
        return synth_movement(scene, o.object_id, d, magnitude, rng);
    }
    throw InvalidArgument("scene " + scene.scene_id + ": no object can be moved by at least 10 units");
}

InstructionSample random_sample(const SceneRecord& scene, Task task, Rng& rng)
{
    const std::size_t n = scene.objects.size();
    switch (task) {
    case Task::distance: {
        const std::size_t a = uniform_int(rng, 0, n - 1);
        std::size_t b = uniform_int(rng, 0, n - 2);
        b += b >= a ? 1 : 0;
        return synth_distance(scene, scene.objects[a].object_id, scene.objects[b].object_id, rng);
    }
    case Task::movement: return random_movement(scene, rng);
    case Task::placement: return synth_placement(extract_subscenes(scene, 1, rng).front(), rng);
    }
    throw InvalidArgument("unknown task");
}

} // namespace

Dataset generate_dataset(const std::vector<SceneRecord>& scenes, const DatasetPlan& plan, std::uint64_t seed)
{
    if (!(plan.val_scene_fraction >= 0.0 && plan.val_scene_fraction <= 1.0)) {
        throw InvalidArgument("val_scene_fraction must lie in [0, 1]");
    }
    std::vector<const SceneRecord*> sorted;
    std::set<std::string> seen;
    for (const auto& s : scenes) {
        validate_scene(s);
        if (!seen.insert(s.scene_id).second) {
            throw InvalidArgument("duplicate scene id '" + s.scene_id + "'");
        }
        sorted.push_back(&s);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const SceneRecord* a, const SceneRecord* b) { return a->scene_id < b->scene_id; });

    // scene-disjoint split: seeded shuffle, the first share goes to val
    std::vector<const SceneRecord*> shuffled = sorted;
    Rng split_rng(derive_seed(seed, "split"));
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        std::swap(shuffled[i - 1], shuffled[uniform_int(split_rng, 0, i - 1)]);
    }
    bool need_val = false;
    bool need_train = false;
    for (Task t : kAllTasks) {
        need_val = need_val || plan[t].val > 0;
        need_train = need_train || plan[t].train > 0;
    }
    std::size_t n_val = static_cast<std::size_t>(std::llround(plan.val_scene_fraction * shuffled.size()));
    if (need_val && n_val == 0 && shuffled.size() >= 2) {
        n_val = 1;
    }
    if (need_train && n_val == shuffled.size() && shuffled.size() >= 2) {
        n_val = shuffled.size() - 1;
    }
    std::set<std::string> val_ids;
    for (std::size_t i = 0; i < n_val; ++i) {
        val_ids.insert(shuffled[i]->scene_id);
    }

    Dataset ds;
    ds.seed = seed;
    ds.plan = plan;
    std::vector<const SceneRecord*> train_scenes;
    std::vector<const SceneRecord*> val_scenes;
    for (const SceneRecord* s : sorted) {
        (val_ids.count(s->scene_id) ? val_scenes : train_scenes).push_back(s);
        (val_ids.count(s->scene_id) ? ds.val_scenes : ds.train_scenes).push_back(s->scene_id);
    }

    auto fill = [&](const std::vector<const SceneRecord*>& pool, bool is_val, std::vector<InstructionSample>& out) {
        const char* split = is_val ? "val" : "train";
        // per-scene quota of every task
        std::map<std::string, std::array<std::size_t, 3>> quota;
        for (Task t : kAllTasks) {
            const std::size_t want = is_val ? plan[t].val : plan[t].train;
            if (want == 0) {
                continue;
            }
            std::vector<const SceneRecord*> ok;
            std::copy_if(pool.begin(), pool.end(), std::back_inserter(ok),
                         [&](const SceneRecord* s) { return eligible(*s, t); });
            if (ok.empty()) {
                throw InvalidArgument(std::string("plan unsatisfiable: ") + split + " split needs " +
                                      std::to_string(want) + " " + to_string(t) + " samples but has no eligible scene");
            }
            for (std::size_t i = 0; i < ok.size(); ++i) {
                quota[ok[i]->scene_id][static_cast<std::size_t>(t)] =
                    want / ok.size() + (i < want % ok.size() ? 1 : 0);
            }
        }
        for (const SceneRecord* scene : pool) {
            const auto q = quota.find(scene->scene_id);
            if (q == quota.end()) {
                continue;
            }
            for (Task t : kAllTasks) {
                for (std::size_t k = 0; k < q->second[static_cast<std::size_t>(t)]; ++k) {
                    const std::string id = scene->scene_id + "/" + to_string(t) + "/" + std::to_string(k);
                    const std::uint64_t sample_seed = derive_seed(seed, id);
                    Rng rng(sample_seed);
                    InstructionSample s = random_sample(*scene, t, rng);
                    s.id = id;
                    s.split = split;
                    s.provenance.seed = sample_seed;
                    out.push_back(std::move(s));
                }
            }
        }
    };
    fill(train_scenes, false, ds.train);
    fill(val_scenes, true, ds.val);
    return ds;
}

// ---- serialization ----

namespace {

ordered_json box_json(const QuantBox& b)
{
    return ordered_json::array({b.center[0], b.center[1], b.center[2], b.extent[0], b.extent[1], b.extent[2]});
}

QuantBox box_from_json(const ordered_json& j)
{
    if (!j.is_array() || j.size() != 6) {
        throw InvalidArgument("sample json: box needs 6 integers");
    }
    QuantBox b;
    for (std::size_t i = 0; i < 3; ++i) {
        b.center[i] = j[i].get<int>();
        b.extent[i] = j[i + 3].get<int>();
    }
    return b;
}

} // namespace

std::string sample_to_json(const InstructionSample& s)
{
    ordered_json gt;
    gt["boxes"] = ordered_json::array();
    for (const auto& b : s.gt.boxes) {
        gt["boxes"].push_back(box_json(b));
    }
    gt["gaps"] = s.gt.gaps;
    if (s.gt.center) {
        gt["center"] = *s.gt.center;
    }
    if (s.gt.direction) {
        gt["direction"] = to_string(*s.gt.direction);
        gt["magnitude"] = s.gt.magnitude;
    }
    ordered_json j;
    j["id"] = s.id;
    j["split"] = s.split;
    j["task"] = to_string(s.task);
    j["scene_id"] = s.scene_id;
    j["question"] = s.question;
    j["answer"] = s.answer;
    j["gt"] = std::move(gt);
    j["provenance"] = {{"object_ids", s.provenance.object_ids},
                       {"context_ids", s.provenance.context_ids},
                       {"seed", s.provenance.seed}};
    return j.dump();
}

InstructionSample sample_from_json(std::string_view line)
{
    try {
        const ordered_json j = ordered_json::parse(line);
        InstructionSample s;
        s.id = j.at("id").get<std::string>();
        s.split = j.value("split", "");
        s.task = task_from_string(j.at("task").get<std::string>());
        s.scene_id = j.at("scene_id").get<std::string>();
        s.question = j.at("question").get<std::string>();
        s.answer = j.at("answer").get<std::string>();
        const auto& gt = j.at("gt");
        for (const auto& b : gt.at("boxes")) {
            s.gt.boxes.push_back(box_from_json(b));
        }
        s.gt.gaps = gt.at("gaps").get<std::vector<int>>();
        if (gt.contains("center")) {
            s.gt.center = gt["center"].get<GridTriple>();
        }
        if (gt.contains("direction")) {
            s.gt.direction = direction_from_string(gt["direction"].get<std::string>());
            s.gt.magnitude = gt.at("magnitude").get<int>();
        }
        if (j.contains("provenance")) {
            const auto& p = j["provenance"];
            s.provenance.object_ids = p.value("object_ids", std::vector<std::string>{});
            s.provenance.context_ids = p.value("context_ids", std::vector<std::string>{});
            s.provenance.seed = p.value("seed", std::uint64_t{0});
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("sample json: ") + e.what());
    }
}

void write_samples(std::ostream& out, const std::vector<InstructionSample>& samples)
{
    for (const auto& s : samples) {
        out << sample_to_json(s) << '\n';
    }
}

std::vector<InstructionSample> read_samples(std::istream& in)
{
    std::vector<InstructionSample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(sample_from_json(line));
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<InstructionSample> read_samples_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open samples file '" + path + "'");
    }
    return read_samples(in);
}

std::string sha256_hex(std::string_view bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string manifest_json(const Dataset& ds, const std::string& train_bytes, const std::string& val_bytes)
{
    ordered_json plan;
    plan["val_scene_fraction"] = ds.plan.val_scene_fraction;
    ordered_json counts;
    for (const char* split : {"train", "val"}) {
        const auto& samples = std::string(split) == "train" ? ds.train : ds.val;
        ordered_json c;
        for (Task t : kAllTasks) {
            c[to_string(t)] = std::count_if(samples.begin(), samples.end(),
                                            [&](const InstructionSample& s) { return s.task == t; });
        }
        counts[split] = std::move(c);
    }
    for (Task t : kAllTasks) {
        plan["counts"][to_string(t)] = {{"train", ds.plan[t].train}, {"val", ds.plan[t].val}};
    }
    ordered_json m;
    m["schema_version"] = kSchemaVersion;
    m["seed"] = ds.seed;
    m["plan"] = std::move(plan);
    m["counts"] = std::move(counts);
    m["scenes"] = {{"train", ds.train_scenes}, {"val", ds.val_scenes}};
    m["files"] = {{"train", "train.jsonl"}, {"val", "val.jsonl"}};
    m["content_hash"] = "sha256:" + sha256_hex(train_bytes + val_bytes);
    return m.dump(2) + "\n";
}

std::string write_dataset(const Dataset& ds, const std::string& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::ostringstream train;
    std::ostringstream val;
    write_samples(train, ds.train);
    write_samples(val, ds.val);
    const std::string manifest = manifest_json(ds, train.str(), val.str());
    auto put = [&](const char* name, const std::string& bytes) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        out << bytes;
        if (!out) {
            throw InvalidArgument(std::string("cannot write ") + (fs::path(dir) / name).string());
        }
    };
    put("train.jsonl", train.str());
    put("val.jsonl", val.str());
    put("manifest.json", manifest);
    return ordered_json::parse(manifest).at("content_hash").get<std::string>();
}

std::vector<SceneRecord> synthetic_corpus(std::size_t count, std::uint64_t seed)
{
    Rng rng(derive_seed(seed, "corpus"));
    std::vector<SceneRecord> out;
    for (std::size_t i = 0; i < count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "scene%04zu_00", i);
        out.push_back(synthetic_room(id, 6 + uniform_int(rng, 0, 6), seed));
    }
    return out;
}

} // namespace spatial3d
