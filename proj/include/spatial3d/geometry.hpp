#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace spatial3d {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double operator[](std::size_t axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
    double& operator[](std::size_t axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

    friend bool operator==(const Point3&, const Point3&) = default;
};

Point3 operator+(const Point3& a, const Point3& b);
Point3 operator-(const Point3& a, const Point3& b);
Point3 operator*(double s, const Point3& p);

double squared_distance(const Point3& a, const Point3& b);
double distance(const Point3& a, const Point3& b);
bool is_finite(const Point3& p);

/// Axis-aligned box. `extent` holds the full side lengths (w, h, l) along x, y, z.
struct Box3 {
    Point3 center;
    std::array<double, 3> extent{0.0, 0.0, 0.0};

    double volume() const { return extent[0] * extent[1] * extent[2]; }
    Point3 min_corner() const;
    Point3 max_corner() const;
    bool contains(const Point3& p) const;

    friend bool operator==(const Box3&, const Box3&) = default;
};

/// Throws InvalidArgument on a negative or non-finite component.
void validate_box(const Box3& box);

/// Ordered point set. Index identity is meaningful to every operation below.
struct PointCloud {
    std::vector<Point3> points;
    std::vector<std::vector<double>> attributes;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Selects the first FPS point.
class FpsSeed {
public:
    /// Point farthest from the cloud centroid (ties: lowest index).
    static FpsSeed farthest_from_centroid() { return FpsSeed{}; }
    static FpsSeed index(std::size_t i) { return FpsSeed{i}; }

    const std::optional<std::size_t>& explicit_index() const { return index_; }

private:
    FpsSeed() = default;
    explicit FpsSeed(std::size_t i) : index_(i) {}

    std::optional<std::size_t> index_;
};

/// Greedy farthest point sampling. Each new point maximizes its minimum
/// distance to the points already chosen; ties go to the lowest index.
std::vector<std::size_t> fps(std::span<const Point3> cloud, std::size_t m,
                             const FpsSeed& first = FpsSeed::farthest_from_centroid());

/// Member point indices per query center.
using NeighborGroups = std::vector<std::vector<std::size_t>>;

inline constexpr double kDefaultBallRadius = 0.3;
inline constexpr std::size_t kDefaultBallMaxK = 16;

/// Up to `max_k` points within `radius` of each center, nearest first
/// (ties: lowest index). A center with no point in range gets the single
/// globally nearest point.
NeighborGroups ball_query(std::span<const Point3> centers, std::span<const Point3> cloud,
                          double radius = kDefaultBallRadius, std::size_t max_k = kDefaultBallMaxK);

/// kNN graph over referent positions, union-symmetrized, with self loops and
/// symmetric normalization D^-1/2 (A + I) D^-1/2.
struct SpatialAdjacency {
    std::size_t size = 0;
    /// Row-major size x size normalized matrix.
    std::vector<double> normalized;
    /// Undirected edges (i < j), sorted, self loops excluded.
    std::vector<std::pair<std::size_t, std::size_t>> edges;

    double at(std::size_t i, std::size_t j) const { return normalized[i * size + j]; }
};

SpatialAdjacency knn_spatial_adjacency(std::span<const Point3> positions, std::size_t k);

/// Builds the normalized matrix from an explicit undirected edge list.
SpatialAdjacency adjacency_from_edges(std::size_t size,
                                      std::vector<std::pair<std::size_t, std::size_t>> edges);

double iou_aabb(const Box3& a, const Box3& b);

std::array<double, 3> axis_center_gaps(const Box3& a, const Box3& b);

struct NearestObject {
    std::size_t index = 0;
    Point3 centroid;
};

NearestObject nearest_object_centroid(const Point3& p, std::span<const Box3> objects);

} // namespace spatial3d
