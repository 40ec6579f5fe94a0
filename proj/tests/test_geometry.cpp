#include "doctest.h"
#include "oracles.hpp"

#include "spatial3d/errors.hpp"
#include "spatial3d/geometry.hpp"
#include "spatial3d/random.hpp"

#include <algorithm>
#include <set>

using namespace spatial3d;

TEST_CASE("fps picks the extremes on a line")
{
    const std::vector<Point3> cloud{{0, 0, 0}, {10, 0, 0}, {5, 0, 0}};
    CHECK(fps(cloud, 2, FpsSeed::index(0)) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("fps with m == n is a permutation")
{
    Rng rng(3);
    const auto cloud = test::random_points(rng, 9, 2.0);
    auto idx = fps(cloud, cloud.size());
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        CHECK(idx[i] == i);
    }
}

TEST_CASE("fps matches the brute-force greedy oracle")
{
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + uniform_int(rng, 0, 9);
        const auto cloud = test::random_points(rng, n, 1.0);
        const std::size_t m = 1 + uniform_int(rng, 0, std::min<std::size_t>(n, 4) - 1);
        const std::size_t first = uniform_int(rng, 0, n - 1);
        CHECK(fps(cloud, m, FpsSeed::index(first)) == test::fps_oracle(cloud, m, first));
    }
}

TEST_CASE("fps default seed is the point farthest from the centroid")
{
    const std::vector<Point3> cloud{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {9, 9, 9}};
    CHECK(fps(cloud, 1).front() == 3);
}

TEST_CASE("fps breaks ties by lowest index")
{
    // 1 and 2 are equally far from 0
    const std::vector<Point3> cloud{{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}};
    CHECK(fps(cloud, 2, FpsSeed::index(0)) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("fps spread against every subset with the same first point")
{
    // Greedy max-min is optimal for two points and within a factor of two of
    // the best subset beyond that.
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 4 + uniform_int(rng, 0, 6);
        const auto cloud = test::random_points(rng, n, 1.0);
        const std::size_t m = 2 + uniform_int(rng, 0, 2);
        const double spread = test::min_pairwise(cloud, fps(cloud, m, FpsSeed::index(0)));
        double best = 0.0;
        for (unsigned mask = 1; mask < (1u << n); mask += 2) {
            if (static_cast<std::size_t>(__builtin_popcount(mask)) != m) {
                continue;
            }
            std::vector<std::size_t> subset;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask >> i & 1u) {
                    subset.push_back(i);
                }
            }
            best = std::max(best, test::min_pairwise(cloud, subset));
        }
        if (m == 2) {
            CHECK(spread == best);
        }
        CHECK(spread >= 0.5 * best);
    }
}

TEST_CASE("fps rejects bad counts")
{
    const std::vector<Point3> cloud{{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(fps(cloud, 3), InvalidArgument);
    CHECK_THROWS_AS(fps(cloud, 0), InvalidArgument);
    CHECK_THROWS_AS(fps(std::vector<Point3>{}, 1), InvalidArgument);
}

TEST_CASE("ball query filters by radius")
{
    const std::vector<Point3> cloud{{0.1, 0, 0}, {0, 0.2, 0}, {5, 0, 0}};
    const auto g = ball_query(std::vector<Point3>{{0, 0, 0}}, cloud, 0.3, 8);
    CHECK(g.front() == std::vector<std::size_t>{0, 1});
}

TEST_CASE("ball query falls back to the nearest point")
{
    const std::vector<Point3> cloud{{3, 0, 0}, {2, 0, 0}, {5, 0, 0}};
    const auto g = ball_query(std::vector<Point3>{{0, 0, 0}}, cloud, 0.3, 8);
    CHECK(g.front() == std::vector<std::size_t>{1});
}

TEST_CASE("ball query matches a brute-force scan")
{
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto cloud = test::random_points(rng, 60, 1.0);
        const auto centers = test::random_points(rng, 7, 1.0);
        const double radius = uniform_real(rng, 0.05, 0.6);
        const std::size_t max_k = 1 + uniform_int(rng, 0, 15);
        CHECK(ball_query(centers, cloud, radius, max_k) == test::ball_query_oracle(centers, cloud, radius, max_k));
    }
}

TEST_CASE("ball query rejects bad arguments")
{
    const std::vector<Point3> c{{0, 0, 0}};
    CHECK_THROWS_AS(ball_query(c, std::vector<Point3>{}, 0.3, 4), InvalidArgument);
    CHECK_THROWS_AS(ball_query(c, c, 0.0, 4), InvalidArgument);
    CHECK_THROWS_AS(ball_query(c, c, 0.3, 0), InvalidArgument);
}

TEST_CASE("knn adjacency symmetrizes by union")
{
    const std::vector<Point3> line{{0, 0, 0}, {1, 0, 0}, {2.5, 0, 0}};
    const auto adj = knn_spatial_adjacency(line, 1);
    using E = std::pair<std::size_t, std::size_t>;
    CHECK(adj.edges == std::vector<E>{{0, 1}, {1, 2}});
    // degrees with self loops: 2, 3, 2
    CHECK(adj.at(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
    CHECK(adj.at(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(adj.at(0, 2) == 0.0);
}

TEST_CASE("knn adjacency matches the pairwise-distance oracle")
{
    Rng rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const auto pts = test::random_points(rng, 12, 3.0);
        const auto adj = knn_spatial_adjacency(pts, 3);
        CHECK(adj.edges == test::knn_edges_oracle(pts, 3));
        for (std::size_t i = 0; i < adj.size; ++i) {
            CHECK(adj.at(i, i) > 0.0);
            for (std::size_t j = 0; j < adj.size; ++j) {
                CHECK(adj.at(i, j) == adj.at(j, i));
                CHECK(adj.at(i, j) >= 0.0);
            }
        }
    }
}

TEST_CASE("knn adjacency rejects bad sizes")
{
    CHECK_THROWS_AS(knn_spatial_adjacency(std::vector<Point3>{{0, 0, 0}}, 1), InvalidArgument);
    const std::vector<Point3> two{{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(knn_spatial_adjacency(two, 2), InvalidArgument);
}

TEST_CASE("iou closed forms")
{
    const Box3 unit{{0, 0, 0}, {1, 1, 1}};
    CHECK(iou_aabb(unit, unit) == 1.0);
    CHECK(iou_aabb(unit, Box3{{5, 0, 0}, {1, 1, 1}}) == 0.0);
    CHECK(iou_aabb(unit, Box3{{0.5, 0, 0}, {1, 1, 1}}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    // touching faces
    CHECK(iou_aabb(unit, Box3{{1, 0, 0}, {1, 1, 1}}) == 0.0);
}

TEST_CASE("iou of zero-volume boxes")
{
    const Box3 flat{{1, 2, 3}, {0, 1, 1}};
    CHECK(iou_aabb(flat, flat) == 1.0);
    CHECK(iou_aabb(flat, Box3{{1, 2, 3.5}, {0, 1, 1}}) == 0.0);
    CHECK(iou_aabb(flat, Box3{{1, 2, 3}, {1, 1, 1}}) == 0.0);
}

TEST_CASE("iou is symmetric and decreases as boxes separate")
{
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const Box3 a = test::random_box(rng);
        Box3 b = test::random_box(rng);
        CHECK(iou_aabb(a, b) == iou_aabb(b, a));
        const std::size_t axis = uniform_int(rng, 0, 2);
        const double dir = b.center[axis] >= a.center[axis] ? 1.0 : -1.0;
        double prev = iou_aabb(a, b);
        for (int step = 0; step < 5; ++step) {
            b.center[axis] += dir * 0.1;
            const double next = iou_aabb(a, b);
            CHECK(next <= prev + 1e-15);
            prev = next;
        }
    }
}

TEST_CASE("iou agrees with a Monte-Carlo estimate")
{
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const Box3 a = test::random_box(rng);
        const Box3 b = test::random_box(rng);
        CHECK(std::abs(iou_aabb(a, b) - test::iou_monte_carlo(a, b, 200000, rng)) < 1e-2);
    }
}

TEST_CASE("axis center gaps")
{
    const Box3 a{{198, 171, 47}, {7, 96, 81}};
    const Box3 b{{141, 110, 58}, {21, 16, 96}};
    CHECK(axis_center_gaps(a, b) == std::array<double, 3>{57, 61, 11});
    CHECK(axis_center_gaps(b, a) == axis_center_gaps(a, b));
    CHECK(axis_center_gaps(a, a) == std::array<double, 3>{0, 0, 0});
}

TEST_CASE("nearest object centroid")
{
    const std::vector<Box3> objects{{{0, 0, 0}, {1, 1, 1}}, {{2, 0, 0}, {1, 1, 1}}, {{5, 5, 5}, {1, 1, 1}}};
    CHECK(nearest_object_centroid({5, 5, 5}, objects).index == 2);
    CHECK(nearest_object_centroid({1, 0, 0}, objects).index == 0);  // equidistant: lowest index
    CHECK_THROWS_AS(nearest_object_centroid({0, 0, 0}, std::vector<Box3>{}), InvalidArgument);

    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Box3> boxes;
        for (int i = 0; i < 6; ++i) {
            boxes.push_back(test::random_box(rng));
        }
        const Point3 p{uniform_real(rng, -2, 2), uniform_real(rng, -2, 2), uniform_real(rng, -2, 2)};
        std::size_t best = 0;
        for (std::size_t i = 1; i < boxes.size(); ++i) {
            if (squared_distance(p, boxes[i].center) < squared_distance(p, boxes[best].center)) {
                best = i;
            }
        }
        const auto r = nearest_object_centroid(p, boxes);
        CHECK(r.index == best);
        CHECK(r.centroid == boxes[best].center);
    }
}

TEST_CASE("box validation")
{
    CHECK_THROWS_AS(validate_box(Box3{{0, 0, 0}, {-1, 1, 1}}), InvalidArgument);
    CHECK_THROWS_AS(validate_box(Box3{{NAN, 0, 0}, {1, 1, 1}}), InvalidArgument);
    CHECK_NOTHROW(validate_box(Box3{{0, 0, 0}, {0, 0, 0}}));
}
