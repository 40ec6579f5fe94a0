#pragma once

// Slow reference implementations and random generators shared by the unit
// tests and the acceptance runner.

#include "spatial3d/geometry.hpp"
#include "spatial3d/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

namespace spatial3d::test {

inline std::vector<Point3> random_points(Rng& rng, std::size_t n, double half)
{
    std::vector<Point3> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({uniform_real(rng, -half, half), uniform_real(rng, -half, half), uniform_real(rng, -half, half)});
    }
    return out;
}

inline Box3 random_box(Rng& rng)
{
    Box3 b;
    b.center = {uniform_real(rng, -1, 1), uniform_real(rng, -1, 1), uniform_real(rng, -1, 1)};
    for (double& e : b.extent) {
        e = uniform_real(rng, 0.2, 2.0);
    }
    return b;
}

/// Greedy max-min recomputed from scratch at every step.
inline std::vector<std::size_t> fps_oracle(const std::vector<Point3>& cloud, std::size_t m, std::size_t first)
{
    std::vector<std::size_t> chosen{first};
    while (chosen.size() < m) {
        std::size_t best = 0;
        double best_score = -1.0;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) {
                continue;
            }
            double score = std::numeric_limits<double>::infinity();
            for (std::size_t c : chosen) {
                score = std::min(score, squared_distance(cloud[i], cloud[c]));
            }
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        chosen.push_back(best);
    }
    return chosen;
}

inline double min_pairwise(const std::vector<Point3>& cloud, const std::vector<std::size_t>& idx)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = i + 1; j < idx.size(); ++j) {
            best = std::min(best, distance(cloud[idx[i]], cloud[idx[j]]));
        }
    }
    return best;
}

inline NeighborGroups ball_query_oracle(const std::vector<Point3>& centers, const std::vector<Point3>& cloud,
                                        double radius, std::size_t max_k)
{
    NeighborGroups out;
    for (const auto& c : centers) {
        std::vector<std::size_t> order(cloud.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return squared_distance(c, cloud[a]) < squared_distance(c, cloud[b]);
        });
        std::vector<std::size_t> group;
        for (std::size_t i : order) {
            if (group.size() < max_k && squared_distance(c, cloud[i]) <= radius * radius) {
                group.push_back(i);
            }
        }
        if (group.empty()) {
            group.push_back(order.front());
        }
        out.push_back(group);
    }
    return out;
}

inline std::vector<std::pair<std::size_t, std::size_t>> knn_edges_oracle(const std::vector<Point3>& pts,
                                                                         std::size_t k)
{
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::vector<std::size_t> others;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (j != i) {
                others.push_back(j);
            }
        }
        std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
            return squared_distance(pts[i], pts[a]) < squared_distance(pts[i], pts[b]);
        });
        for (std::size_t n = 0; n < k; ++n) {
            edges.insert({std::min(i, others[n]), std::max(i, others[n])});
        }
    }
    return {edges.begin(), edges.end()};
}

/// Uniform samples over the bounding box of both boxes.
inline double iou_monte_carlo(const Box3& a, const Box3& b, std::size_t samples, Rng& rng)
{
    Point3 lo;
    Point3 hi;
    for (std::size_t ax = 0; ax < 3; ++ax) {
        lo[ax] = std::min(a.min_corner()[ax], b.min_corner()[ax]);
        hi[ax] = std::max(a.max_corner()[ax], b.max_corner()[ax]);
    }
    std::size_t in_both = 0;
    std::size_t in_any = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        const Point3 p{uniform_real(rng, lo.x, hi.x), uniform_real(rng, lo.y, hi.y), uniform_real(rng, lo.z, hi.z)};
        const bool ia = a.contains(p);
        const bool ib = b.contains(p);
        in_both += ia && ib ? 1 : 0;
        in_any += ia || ib ? 1 : 0;
    }
    return in_any == 0 ? 0.0 : static_cast<double>(in_both) / static_cast<double>(in_any);
}

/// Largest number of prediction-truth pairs with IoU >= k over all injections
/// of the smaller side into the larger one.
inline std::size_t matching_oracle(const std::vector<Box3>& preds, const std::vector<Box3>& gts, double k)
{
    const bool preds_small = preds.size() <= gts.size();
    const auto& small = preds_small ? preds : gts;
    const auto& large = preds_small ? gts : preds;
    std::vector<std::size_t> perm(large.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    // every injection is a prefix of some permutation of the larger side
    do {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < small.size(); ++i) {
            const Box3& p = preds_small ? small[i] : large[perm[i]];
            const Box3& g = preds_small ? large[perm[i]] : small[i];
            hits += iou_aabb(p, g) >= k ? 1 : 0;
        }
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

inline double f1_oracle(const std::vector<Box3>& preds, const std::vector<Box3>& gts, double k)
{
    if (preds.empty() && gts.empty()) {
        return 1.0;
    }
    const double tp = static_cast<double>(matching_oracle(preds, gts, k));
    if (tp == 0.0) {
        return 0.0;
    }
    const double precision = tp / static_cast<double>(preds.size());
    const double recall = tp / static_cast<double>(gts.size());
    return 2.0 * precision * recall / (precision + recall);
}

} // namespace spatial3d::test
