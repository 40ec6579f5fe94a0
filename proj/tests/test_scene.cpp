#include "doctest.h"

#include "spatial3d/errors.hpp"
#include "spatial3d/scene.hpp"

#include <sstream>

using namespace spatial3d;

TEST_CASE("scene JSONL round trip")
{
    std::vector<SceneRecord> scenes{synthetic_room("a", 4, 1), synthetic_room("b", 6, 2)};
    scenes[0].bounds.reset();
    scenes[1].bounds = SceneBounds{{-10, -10, -1}, {10, 10, 5}};
    std::stringstream ss;
    write_scenes(ss, scenes);
    const auto back = read_scenes(ss);
    REQUIRE(back.size() == 2);
    CHECK_FALSE(back[0].bounds.has_value());
    CHECK(back[1].bounds->max.z == 5.0);
    for (std::size_t s = 0; s < 2; ++s) {
        REQUIRE(back[s].objects.size() == scenes[s].objects.size());
        for (std::size_t i = 0; i < back[s].objects.size(); ++i) {
            CHECK(back[s].objects[i].box.center == scenes[s].objects[i].box.center);
            CHECK(back[s].objects[i].box.extent == scenes[s].objects[i].box.extent);
            CHECK(back[s].objects[i].descriptions == scenes[s].objects[i].descriptions);
        }
    }
}

TEST_CASE("malformed scene lines are rejected with the line number")
{
    std::stringstream ss("{\"scene_id\": \"x\", \"objects\": []}\n{not json\n");
    try {
        (void)read_scenes(ss);
        FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("inferred bounds pad the object union by five percent")
{
    const std::vector<SceneObject> objects{{"1", "box", {{0, 0, 0}, {2, 2, 2}}, {"d"}},
                                           {"2", "box", {{9, 0, 0}, {2, 2, 2}}, {"d"}}};
    const SceneBounds b = infer_bounds(objects);
    // x spans [-1, 10]
    CHECK(b.min.x == doctest::Approx(-1.55).epsilon(1e-14));
    CHECK(b.max.x == doctest::Approx(10.55).epsilon(1e-14));
    CHECK(b.min.y == doctest::Approx(-1.1).epsilon(1e-14));
    CHECK_THROWS_AS(infer_bounds({}), InvalidArgument);
}

TEST_CASE("scene validation")
{
    SceneRecord s = synthetic_room("v", 3, 4);
    CHECK_NOTHROW(validate_scene(s));

    SceneRecord dup = s;
    dup.objects[1].object_id = dup.objects[0].object_id;
    CHECK_THROWS_AS(validate_scene(dup), InvalidArgument);

    SceneRecord nodesc = s;
    nodesc.objects[0].descriptions.clear();
    CHECK_THROWS_AS(validate_scene(nodesc), InvalidArgument);

    SceneRecord outside = s;
    outside.bounds = SceneBounds{{100, 100, 100}, {101, 101, 101}};
    CHECK_THROWS_AS(validate_scene(outside), InvalidArgument);

    CHECK_THROWS_AS(s.object("missing"), InvalidArgument);
}

TEST_CASE("synthetic rooms and clouds are deterministic")
{
    const SceneRecord a = synthetic_room("r", 7, 9);
    const SceneRecord b = synthetic_room("r", 7, 9);
    REQUIRE(a.objects.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(a.objects[i].box.center == b.objects[i].box.center);
    }
    const PointCloud c = sample_scene_cloud(a, 10, 3);
    CHECK(c.size() == 70);
    CHECK(c.points == sample_scene_cloud(a, 10, 3).points);
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(a.objects[i / 10].box.contains(c.points[i]));
    }
    CHECK(scene_diagonal(a) > 0.0);
}
