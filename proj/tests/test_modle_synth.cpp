#include "doctest.h"

#include "spatial3d/errors.hpp"
#include "spatial3d/modle_synth.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace spatial3d;

namespace {

SceneObject object(std::string id, std::string label, Box3 box, std::string description)
{
    return {std::move(id), std::move(label), box, {std::move(description)}};
}

// Grid-aligned bounds so metric coordinates equal grid coordinates.
SceneRecord fixture_scene()
{
    SceneRecord s;
    s.scene_id = "scene0011_00";
    s.bounds = SceneBounds{{0, 0, 0}, {255, 255, 255}};
    s.objects = {
        object("3", "kitchen_cabinets", {{198, 171, 47}, {7, 96, 81}},
               "There is a set of bottom kitchen cabinets in the room. It has a microwave in the middle of it."),
        object("7", "chair", {{141, 110, 58}, {21, 16, 96}},
               "You are looking for a chair on the side of the table facing the ovens. It will be the chair near "
               "the rail."),
        object("12", "cabinet", {{209, 61, 160}, {27, 32, 153}},
               "this is a brown cabinet, it sets along the wall, right next to a window."),
        object("15", "chair", {{133, 80, 57}, {27, 22, 96}}, "a chair by the table."),
    };
    return s;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("distance fixture is byte-identical")
{
    Rng rng(1);
    const InstructionSample s = synth_distance(fixture_scene(), "3", "7", rng);
    CHECK(s.question ==
          "Object A is described as: 'There is a set of bottom kitchen cabinets in the room. It has a microwave in "
          "the middle of it.' Object B is described as: 'You are looking for a chair on the side of the table facing "
          "the ovens. It will be the chair near the rail.' Please provide the distance between Object A and Object "
          "B.");
    CHECK(s.answer ==
          "Object A is a kitchen_cabinets located at <loc>198, 171, 47, 7, 96, 81</loc>. Object B is a chair located "
          "at <loc>141, 110, 58, 21, 16, 96</loc>. The spatial distance from Object A to Object B on the x-axis is "
          "<gap>57</gap> units, on the y-axis is <gap>61</gap> units, and on the z-axis is <gap>11</gap> units.");
    CHECK(s.gt.gaps == std::vector<int>{57, 61, 11});
    CHECK_NOTHROW(check_sample(s));
}

TEST_CASE("movement fixture is byte-identical")
{
    Rng rng(1);
    const InstructionSample s = synth_movement(fixture_scene(), "12", Direction::forward, 110, rng);
    CHECK(s.question ==
          "Based on the provided description, 'this is a brown cabinet, it sets along the wall, right next to a "
          "window.' Move the object that closely matches this description forward by 110 units, and then describe "
          "its new location.");
    CHECK(s.answer ==
          "It is a cabinet located at <loc>209, 61, 160, 27, 32, 153</loc>. Its location after moving forward by 110 "
          "units is <loc>209, 171, 160, 27, 32, 153</loc>.");
    CHECK_NOTHROW(check_sample(s));
}

TEST_CASE("placement fixture is byte-identical")
{
    const SceneRecord scene = fixture_scene();
    SubScene sub;
    sub.parent_id = scene.scene_id;
    sub.objects = {scene.objects[0], scene.objects[2], scene.objects[3]};
    sub.bounds = *scene.bounds;
    const InstructionSample s = synth_placement(sub, 2);
    CHECK(s.question ==
          "Add a chair with size w:27, h:22, l:96 to the current indoor scene, and please output the center "
          "coordinates of the object.");
    CHECK(s.answer == "133, 80, 57");
    CHECK(s.provenance.context_ids == std::vector<std::string>{"3", "12", "15"});
    CHECK_NOTHROW(check_sample(s));
}

TEST_CASE("objects sharing a center have zero gaps")
{
    SceneRecord scene = fixture_scene();
    scene.objects[1].box.center = scene.objects[0].box.center;
    Rng rng(2);
    const auto s = synth_distance(scene, "3", "7", rng);
    CHECK(s.gt.gaps == std::vector<int>{0, 0, 0});
    CHECK_THROWS_AS(synth_distance(scene, "3", "3", rng), InvalidArgument);
}

TEST_CASE("direction axes")
{
    CHECK(axis_of(Direction::right) == 0);
    CHECK(sign_of(Direction::right) == 1);
    CHECK(axis_of(Direction::left) == 0);
    CHECK(sign_of(Direction::left) == -1);
    CHECK(axis_of(Direction::forward) == 1);
    CHECK(sign_of(Direction::backward) == -1);
    CHECK(axis_of(Direction::up) == 2);
    CHECK(sign_of(Direction::down) == -1);
    for (Direction d : kAllDirections) {
        CHECK(opposite(opposite(d)) == d);
        CHECK(axis_of(opposite(d)) == axis_of(d));
        CHECK(sign_of(opposite(d)) == -sign_of(d));
        CHECK(direction_from_string(to_string(d)) == d);
    }
    CHECK_THROWS_AS(direction_from_string("sideways"), InvalidArgument);
}

TEST_CASE("movement rules")
{
    const SceneRecord scene = fixture_scene();
    Rng rng(3);
    CHECK_THROWS_AS(synth_movement(scene, "12", Direction::forward, 0, rng), InvalidArgument);
    // top face at 61 + 16 + 179 = 256 uses the one unit of slack
    const QuantBox cab{{209, 61, 160}, {27, 32, 153}};
    CHECK(max_move(cab, Direction::forward) == 179);
    CHECK_NOTHROW(synth_movement(scene, "12", Direction::forward, 179, rng));
    CHECK_THROWS_AS(synth_movement(scene, "12", Direction::forward, 180, rng), InvalidArgument);

    for (Direction d : kAllDirections) {
        const QuantBox moved = move_box(cab, d, 5);
        CHECK(move_box(moved, opposite(d), 5) == cab);
    }
    CHECK(move_box(move_box(cab, Direction::down, 40), Direction::up, 40) == cab);
}

TEST_CASE("sub-scene sizes")
{
    const SceneRecord scene = fixture_scene();
    CHECK_THROWS_AS(make_subscene(scene, {"3", "7"}), InvalidArgument);
    const SubScene sub = make_subscene(scene, {"3", "7", "12"});
    CHECK(sub.objects.size() == 3);
    CHECK(sub.parent_id == "scene0011_00");

    // a 3-object room can only yield itself
    SceneRecord tiny = scene;
    tiny.objects.resize(3);
    Rng rng(4);
    for (const auto& s : extract_subscenes(tiny, 10, rng)) {
        CHECK(s.objects.size() == 3);
    }
    tiny.objects.resize(2);
    CHECK_THROWS_AS(extract_subscenes(tiny, 1, rng), InvalidArgument);
}

TEST_CASE("sub-scenes are an anchor and its nearest neighbours")
{
    const auto corpus = synthetic_corpus(5, 9);
    Rng rng(5);
    for (const auto& scene : corpus) {
        for (const auto& sub : extract_subscenes(scene, 20, rng)) {
            CHECK(sub.objects.size() >= 3);
            CHECK(sub.objects.size() <= std::min<std::size_t>(8, scene.objects.size()));
            const Point3 anchor = sub.objects.front().box.center;
            std::set<std::string> members;
            double farthest_member = 0.0;
            for (const auto& o : sub.objects) {
                members.insert(o.object_id);
                farthest_member = std::max(farthest_member, squared_distance(o.box.center, anchor));
            }
            CHECK(members.size() == sub.objects.size());
            for (const auto& o : scene.objects) {
                if (!members.count(o.object_id)) {
                    CHECK(squared_distance(o.box.center, anchor) >= farthest_member);
                }
            }
        }
    }
}

TEST_CASE("placement masks members uniformly")
{
    const auto corpus = synthetic_corpus(1, 10);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < 5; ++i) {
        ids.push_back(corpus[0].objects[i].object_id);
    }
    const SubScene sub = make_subscene(corpus[0], ids);
    std::map<std::string, int> hits;
    constexpr int kDraws = 10000;
    for (int seed = 0; seed < kDraws; ++seed) {
        Rng rng(derive_seed(77, static_cast<std::uint64_t>(seed)));
        hits[synth_placement(sub, rng).provenance.object_ids.front()]++;
    }
    REQUIRE(hits.size() == 5);
    double chi2 = 0.0;
    const double expected = kDraws / 5.0;
    for (const auto& [id, n] : hits) {
        chi2 += (n - expected) * (n - expected) / expected;
    }
    // 4 degrees of freedom, p = 0.001
    CHECK(chi2 < 18.47);
}

TEST_CASE("full dataset counts and scaling")
{
    const DatasetPlan full = DatasetPlan::full_size(1.0);
    CHECK(full[Task::distance].train == 171000);
    CHECK(full[Task::distance].val == 2000);
    CHECK(full[Task::movement].train == 36000);
    CHECK(full[Task::movement].val == 9000);
    CHECK(full[Task::placement].train == 34000);
    CHECK(full[Task::placement].val == 9000);

    const DatasetPlan one = DatasetPlan::full_size(0.01, {Task::movement});
    CHECK(one[Task::movement].train == 360);
    CHECK(one[Task::movement].val == 90);
    CHECK(one[Task::distance].train == 0);
    CHECK_THROWS_AS(DatasetPlan::full_size(0.0), InvalidArgument);
}

TEST_CASE("generated datasets")
{
    const auto corpus = synthetic_corpus(50, 11);
    const DatasetPlan plan = DatasetPlan::full_size(0.01);
    const Dataset ds = generate_dataset(corpus, plan, 42);

    std::map<Task, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& s : ds.train) {
        counts[s.task].first++;
        CHECK(s.split == "train");
    }
    for (const auto& s : ds.val) {
        counts[s.task].second++;
        CHECK(s.split == "val");
    }
    for (Task t : kAllTasks) {
        CHECK(counts[t].first == plan[t].train);
        CHECK(counts[t].second == plan[t].val);
    }

    SUBCASE("scene split is disjoint")
    {
        const std::set<std::string> train(ds.train_scenes.begin(), ds.train_scenes.end());
        const std::set<std::string> val(ds.val_scenes.begin(), ds.val_scenes.end());
        CHECK(val.size() == 10);
        CHECK(train.size() + val.size() == corpus.size());
        for (const auto& id : val) {
            CHECK_FALSE(train.count(id));
        }
        for (const auto& s : ds.train) {
            CHECK(train.count(s.scene_id));
        }
        for (const auto& s : ds.val) {
            CHECK(val.count(s.scene_id));
        }
    }
    SUBCASE("every sample is self-consistent")
    {
        std::set<std::string> seen;
        for (const auto* part : {&ds.train, &ds.val}) {
            for (const auto& s : *part) {
                CHECK_NOTHROW(check_sample(s));
                CHECK(seen.insert(s.id).second);
                if (s.task == Task::movement) {
                    CHECK(s.gt.magnitude >= 10);
                    CHECK(s.gt.magnitude <= 150);
                    CHECK(within_grid(s.gt.boxes[1]));
                }
            }
        }
    }
    SUBCASE("json round trip")
    {
        std::stringstream ss;
        write_samples(ss, ds.val);
        CHECK(read_samples(ss) == ds.val);
    }
    SUBCASE("same seed, same bytes; new seed, new bytes")
    {
        const auto dump = [](const Dataset& d) {
            std::ostringstream a;
            write_samples(a, d.train);
            write_samples(a, d.val);
            return a.str();
        };
        CHECK(dump(generate_dataset(corpus, plan, 42)) == dump(ds));
        CHECK(dump(generate_dataset(corpus, plan, 43)) != dump(ds));
    }
}

TEST_CASE("unsatisfiable plans and bad corpora are rejected")
{
    // one scene cannot serve both splits
    const auto corpus = synthetic_corpus(1, 12);
    DatasetPlan plan;
    plan[Task::distance] = {10, 5};
    CHECK_THROWS_AS(generate_dataset(corpus, plan, 1), InvalidArgument);

    auto dup = synthetic_corpus(3, 12);
    dup[1].scene_id = dup[0].scene_id;
    CHECK_THROWS_AS(generate_dataset(dup, DatasetPlan::full_size(0.001), 1), InvalidArgument);
}

TEST_CASE("check_sample catches inconsistent samples")
{
    Rng rng(6);
    InstructionSample s = synth_distance(fixture_scene(), "3", "7", rng);
    s.gt.gaps[1] = 60;
    CHECK_THROWS_AS(check_sample(s), InvalidArgument);

    InstructionSample m = synth_movement(fixture_scene(), "12", Direction::forward, 110, rng);
    m.gt.magnitude = 100;
    CHECK_THROWS_AS(check_sample(m), InvalidArgument);
}

TEST_CASE("sha256 of known inputs")
{
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("written datasets carry a manifest with the content hash")
{
    const auto corpus = synthetic_corpus(10, 13);
    const Dataset ds = generate_dataset(corpus, DatasetPlan::full_size(0.001), 5);
    const auto dir = std::filesystem::temp_directory_path() / "spatial3d_synth_test";
    std::filesystem::remove_all(dir);
    const std::string hash = write_dataset(ds, dir.string());

    const std::string train = slurp(dir / "train.jsonl");
    const std::string val = slurp(dir / "val.jsonl");
    CHECK(hash == "sha256:" + sha256_hex(train + val));
    const std::string manifest = slurp(dir / "manifest.json");
    CHECK(manifest.find(hash) != std::string::npos);
    CHECK(read_samples_file((dir / "train.jsonl").string()) == ds.train);
    std::filesystem::remove_all(dir);
}
