#include "spatial3d/geometry.hpp"

#include "spatial3d/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace spatial3d {

Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Point3 operator*(double s, const Point3& p) { return {s * p.x, s * p.y, s * p.z}; }

double squared_distance(const Point3& a, const Point3& b)
{
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

double distance(const Point3& a, const Point3& b) { return std::sqrt(squared_distance(a, b)); }

bool is_finite(const Point3& p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

Point3 Box3::min_corner() const
{
    return {center.x - extent[0] / 2, center.y - extent[1] / 2, center.z - extent[2] / 2};
}

Point3 Box3::max_corner() const
{
    return {center.x + extent[0] / 2, center.y + extent[1] / 2, center.z + extent[2] / 2};
}

bool Box3::contains(const Point3& p) const
{
    const Point3 lo = min_corner();
    const Point3 hi = max_corner();
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
}

void validate_box(const Box3& box)
{
    if (!is_finite(box.center)) {
        throw InvalidArgument("box center must be finite");
    }
    for (double e : box.extent) {
        if (!std::isfinite(e) || e < 0.0) {
            throw InvalidArgument("box extents must be finite and non-negative");
        }
    }
}

namespace {

void require_finite(std::span<const Point3> points, const char* what)
{
    for (const auto& p : points) {
        if (!is_finite(p)) {
            throw InvalidArgument(std::string(what) + " contains a non-finite coordinate");
        }
    }
}

std::size_t farthest_from_centroid(std::span<const Point3> cloud)
{
    Point3 centroid;
    for (const auto& p : cloud) {
        centroid = centroid + p;
    }
    centroid = (1.0 / static_cast<double>(cloud.size())) * centroid;

    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double d = squared_distance(cloud[i], centroid);
        if (d > best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

} // namespace

std::vector<std::size_t> fps(std::span<const Point3> cloud, std::size_t m, const FpsSeed& first)
{
    if (cloud.empty()) {
        throw InvalidArgument("fps: empty cloud");
    }
    if (m < 1 || m > cloud.size()) {
        throw InvalidArgument("fps: sample count " + std::to_string(m) + " outside [1, " +
                              std::to_string(cloud.size()) + "]");
    }
    require_finite(cloud, "fps: cloud");

    std::size_t start = 0;
    if (first.explicit_index()) {
        start = *first.explicit_index();
        if (start >= cloud.size()) {
            throw InvalidArgument("fps: first index out of range");
        }
    } else {
        start = farthest_from_centroid(cloud);
    }

    std::vector<std::size_t> selected;
    selected.reserve(m);
    selected.push_back(start);

    // min squared distance from every point to the selected set
    std::vector<double> min_d(cloud.size(), std::numeric_limits<double>::infinity());
    std::vector<bool> taken(cloud.size(), false);
    taken[start] = true;

    std::size_t last = start;
    while (selected.size() < m) {
        std::size_t best = cloud.size();
        double best_d = -1.0;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            min_d[i] = std::min(min_d[i], squared_distance(cloud[i], cloud[last]));
            if (!taken[i] && min_d[i] > best_d) {
                best_d = min_d[i];
                best = i;
            }
        }
        taken[best] = true;
        selected.push_back(best);
        last = best;
    }
    return selected;
}

NeighborGroups ball_query(std::span<const Point3> centers, std::span<const Point3> cloud,
                          double radius, std::size_t max_k)
{
    if (cloud.empty()) {
        throw InvalidArgument("ball_query: empty cloud");
    }
    if (!(radius > 0.0)) {
        throw InvalidArgument("ball_query: radius must be positive");
    }
    if (max_k < 1) {
        throw InvalidArgument("ball_query: max_k must be at least 1");
    }
    require_finite(centers, "ball_query: centers");

    const double r2 = radius * radius;
    NeighborGroups groups;
    groups.reserve(centers.size());
    std::vector<std::pair<double, std::size_t>> scratch;
    for (const auto& c : centers) {
        scratch.clear();
        std::pair<double, std::size_t> nearest{std::numeric_limits<double>::infinity(), 0};
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const double d = squared_distance(c, cloud[i]);
            if (d < nearest.first) {
                nearest = {d, i};
            }
            if (d <= r2) {
                scratch.emplace_back(d, i);
            }
        }
        std::vector<std::size_t> members;
        if (scratch.empty()) {
            members.push_back(nearest.second);
        } else {
            const auto keep = std::min(max_k, scratch.size());
            std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(keep),
                              scratch.end());
            members.reserve(keep);
            for (std::size_t j = 0; j < keep; ++j) {
                members.push_back(scratch[j].second);
            }
        }
        groups.push_back(std::move(members));
    }
    return groups;
}

SpatialAdjacency adjacency_from_edges(std::size_t size,
                                      std::vector<std::pair<std::size_t, std::size_t>> edges)
{
    for (auto& [i, j] : edges) {
        if (i >= size || j >= size) {
            throw InvalidArgument("adjacency: edge index out of range");
        }
        if (i > j) {
            std::swap(i, j);
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::erase_if(edges, [](const auto& e) { return e.first == e.second; });

    SpatialAdjacency adj;
    adj.size = size;
    adj.edges = std::move(edges);

    std::vector<double> raw(size * size, 0.0);
    for (std::size_t i = 0; i < size; ++i) {
        raw[i * size + i] = 1.0;
    }
    for (const auto& [i, j] : adj.edges) {
        raw[i * size + j] = 1.0;
        raw[j * size + i] = 1.0;
    }
    std::vector<double> inv_sqrt_deg(size, 0.0);
    for (std::size_t i = 0; i < size; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < size; ++j) {
            deg += raw[i * size + j];
        }
        inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
    }
    adj.normalized.resize(size * size);
    for (std::size_t i = 0; i < size; ++i) {
        for (std::size_t j = 0; j < size; ++j) {
            adj.normalized[i * size + j] = inv_sqrt_deg[i] * raw[i * size + j] * inv_sqrt_deg[j];
        }
    }
    return adj;
}

SpatialAdjacency knn_spatial_adjacency(std::span<const Point3> positions, std::size_t k)
{
    const std::size_t m = positions.size();
    if (m < 2) {
        throw InvalidArgument("knn_spatial_adjacency: need at least 2 positions");
    }
    if (k < 1 || k >= m) {
        throw InvalidArgument("knn_spatial_adjacency: k must satisfy 1 <= k < M");
    }
    require_finite(positions, "knn_spatial_adjacency: positions");

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<std::pair<double, std::size_t>> scratch;
    for (std::size_t i = 0; i < m; ++i) {
        scratch.clear();
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) {
                scratch.emplace_back(squared_distance(positions[i], positions[j]), j);
            }
        }
        std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k),
                          scratch.end());
        for (std::size_t n = 0; n < k; ++n) {
            edges.emplace_back(i, scratch[n].second);
        }
    }
    return adjacency_from_edges(m, std::move(edges));
}

double iou_aabb(const Box3& a, const Box3& b)
{
    const double va = a.volume();
    const double vb = b.volume();
    if (va <= 0.0 || vb <= 0.0) {
        return (va <= 0.0 && vb <= 0.0 && a.center == b.center) ? 1.0 : 0.0;
    }
    const Point3 alo = a.min_corner();
    const Point3 ahi = a.max_corner();
    const Point3 blo = b.min_corner();
    const Point3 bhi = b.max_corner();
    double inter = 1.0;
    for (std::size_t axis = 0; axis < 3; ++axis) {
        const double overlap = std::min(ahi[axis], bhi[axis]) - std::max(alo[axis], blo[axis]);
        if (overlap <= 0.0) {
            return 0.0;
        }
        inter *= overlap;
    }
    const double iou = inter / (va + vb - inter);
    return std::clamp(iou, 0.0, 1.0);
}

std::array<double, 3> axis_center_gaps(const Box3& a, const Box3& b)
{
    return {std::abs(a.center.x - b.center.x), std::abs(a.center.y - b.center.y),
            std::abs(a.center.z - b.center.z)};
}

NearestObject nearest_object_centroid(const Point3& p, std::span<const Box3> objects)
{
    if (objects.empty()) {
        throw InvalidArgument("nearest_object_centroid: empty object list");
    }
    NearestObject best{0, objects[0].center};
    double best_d = squared_distance(p, objects[0].center);
    for (std::size_t i = 1; i < objects.size(); ++i) {
        const double d = squared_distance(p, objects[i].center);
        if (d < best_d) {
            best_d = d;
            best = {i, objects[i].center};
        }
    }
    return best;
}

} // namespace spatial3d
