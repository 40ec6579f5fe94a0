#pragma once

// Progressive spatial awareness over visual referents:
//
//   scene points --FPS--> seeds --vote FFN--> referent positions
//   --ball query + lift + max-pool--> referent features         (intra)
//   --kNN graph, H' = act(A H W) x L-->                        (inter / gcn)
//   --[self-attn, FFN, cross-attn(scene), FFN] x blocks-->      (contextual)
//   --refine FFN offsets on positions-->                        (refined)
//   --projector FFN over [features, positions]-->  visual prompt
//
// Every stage exists twice: a tape-level form used for training and gradient
// checks, and a value-level form that runs on its own tape.

#include "spatial3d/diff_core.hpp"
#include "spatial3d/geometry.hpp"
#include "spatial3d/scene.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spatial3d {

using ad::Matrix;
using ad::Var;

enum class Activation { relu, identity };

enum class Stage { intra, gcn, contextual, refined };

const char* to_string(Stage stage);

struct SchemeConfig {
    std::size_t num_points = 128;    // N scene tokens
    std::size_t feature_dim = 16;    // d
    std::size_t num_referents = 16;  // M
    std::size_t gcn_layers = 2;
    std::size_t graph_k = 3;
    std::size_t attention_blocks = 2;
    std::size_t prompt_width = 32;
    double ball_radius = kDefaultBallRadius;
    std::size_t ball_max_k = kDefaultBallMaxK;
    Activation gcn_activation = Activation::relu;
    Activation projector_activation = Activation::relu;
    double alpha1 = 1.0;  // L_psc weight
    double alpha2 = 1.0;  // L_center weight
    std::uint64_t encoder_seed = 0x5eed;

    static SchemeConfig toy();
    /// 1024 scene tokens of width 256, 256 referents, k = 8.
    static SchemeConfig full_scale();

    void validate() const;
};

struct SceneFeatures {
    Matrix positions;  // N x 3, metric
    Matrix features;   // N x d

    std::size_t size() const { return positions.rows; }
};

struct SeedSet {
    Matrix positions;  // M x 3
    Matrix features;   // M x d
    std::vector<std::size_t> source;
};

struct VisualReferentSet {
    Matrix positions;  // M x 3
    Matrix features;   // M x d
    Stage stage = Stage::intra;
};

struct VisualPrompt {
    Matrix prompt;     // M x prompt_width
    Matrix positions;  // M x 3
};

enum class InitMode {
    /// Offset-producing heads (vote, refine) start at zero.
    zero_offsets,
    /// Every tensor random; used by gradient checks so no block is trivially zero.
    all_random,
};

/// Named parameter tensors in a fixed canonical order.
class SchemeParams {
public:
    static SchemeParams init(const SchemeConfig& cfg, std::uint64_t seed, InitMode mode = InitMode::zero_offsets);

    const std::vector<ad::NamedMatrix>& tensors() const { return tensors_; }
    std::vector<ad::NamedMatrix>& tensors() { return tensors_; }

    const Matrix& at(std::string_view name) const;
    Matrix& at(std::string_view name);
    bool contains(std::string_view name) const;

    /// "vote", "lift", "gcn.0", "attn.1", "refine", "proj".
    static std::string block_of(std::string_view tensor_name);
    std::vector<std::string> blocks() const;

    void add(std::string name, Matrix value);

private:
    std::vector<ad::NamedMatrix> tensors_;
};

/// Binds a parameter set to leaves on a tape.
class SchemeGraph {
public:
    SchemeGraph(ad::Tape& tape, const SchemeConfig& cfg, const SchemeParams& params);
    /// Reuses existing leaves; `leaves[i]` corresponds to `params.tensors()[i]`.
    SchemeGraph(ad::Tape& tape, const SchemeConfig& cfg, const SchemeParams& params,
                std::span<const Var> leaves);

    ad::Tape& tape() const { return *tape_; }
    const SchemeConfig& config() const { return *cfg_; }
    Var param(std::string_view name) const;
    const std::vector<Var>& leaves() const { return leaves_; }

private:
    ad::Tape* tape_;
    const SchemeConfig* cfg_;
    std::map<std::string, Var, std::less<>> by_name_;
    std::vector<Var> leaves_;
};

struct ReferentVars {
    Var positions;
    Var features;
    Stage stage = Stage::intra;
};

struct IntraResult {
    SeedSet seeds;
    NeighborGroups groups;
    Var vote_offsets;
    Var lifted;  // N x d shared lift of the scene features
    ReferentVars referents;
};

struct AttentionResult {
    Var output;   // before the residual
    Var weights;  // queries x keys, rows sum to 1
};

/// Deterministic stand-in for the frozen point encoder: FPS down to N points,
/// then a fixed-seed random projection of (position, local density) through sin (random Fourier features).
SceneFeatures encode_scene_stub(const PointCloud& cloud, const SchemeConfig& cfg);

/// Two-layer FFN `<prefix>.l1`, `<prefix>.l2` with a relu between.
Var ffn(const SchemeGraph& g, Var x, std::string_view prefix);
Var linear(const SchemeGraph& g, Var x, std::string_view prefix);

/// Single-head scaled dot-product attention with projections `<prefix>.q/k/v/o`.
AttentionResult attention(const SchemeGraph& g, Var queries, Var context, std::string_view prefix);

IntraResult intra_referent(const SchemeGraph& g, const SceneFeatures& scene, Var scene_features);
ReferentVars inter_referent(const SchemeGraph& g, const ReferentVars& vr, SpatialAdjacency* adjacency_out = nullptr);
ReferentVars contextual_interactions(const SchemeGraph& g, const ReferentVars& vr, Var scene_features);
ReferentVars refine_location(const SchemeGraph& g, const ReferentVars& vr);
Var project_visual_prompt(const SchemeGraph& g, const ReferentVars& vr);

struct SchemeForward {
    Var scene_features;
    IntraResult intra;
    ReferentVars gcn;
    ReferentVars contextual;
    ReferentVars refined;
    Var prompt;
};

SchemeForward run_scheme(const SchemeGraph& g, const SceneFeatures& scene);

VisualReferentSet intra_referent(const SceneFeatures& scene, const SchemeParams& params, const SchemeConfig& cfg);
VisualReferentSet inter_referent(const VisualReferentSet& vr, const SchemeParams& params, const SchemeConfig& cfg);
VisualReferentSet contextual_interactions(const VisualReferentSet& vr, const SceneFeatures& scene,
                                          const SchemeParams& params, const SchemeConfig& cfg);
VisualReferentSet refine_location(const VisualReferentSet& vr, const SchemeParams& params, const SchemeConfig& cfg);
VisualPrompt project_visual_prompt(const VisualReferentSet& vr, const SchemeParams& params, const SchemeConfig& cfg);

// ---- losses ----

/// Mean Euclidean distance between matched rows.
double loss_center(std::span<const Point3> pred, std::span<const Point3> gt);

struct PscLoss {
    double value = 0.0;
    /// Fewer than two referents: no pairs, value is 0.
    bool degenerate = false;
};

/// Mean over all unordered pairs i < j of |d_pred(i,j) - d_gt(i,j)|.
PscLoss loss_psc(std::span<const Point3> pred, std::span<const Point3> gt);

struct LossBreakdown {
    double l_llm = 0.0;
    double l_psc = 0.0;
    double l_center = 0.0;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double total = 0.0;
};

/// total = l_llm + alpha1 * l_psc + alpha2 * l_center. Negative inputs are rejected.
LossBreakdown loss_total(double l_llm, double l_psc, double l_center, double alpha1, double alpha2);

Var loss_center(Var pred, std::span<const Point3> gt);
Var loss_psc(Var pred, std::span<const Point3> gt);

/// Nearest object centroid for every predicted position.
std::vector<Point3> centroid_targets(std::span<const Point3> positions, std::span<const Box3> objects);

struct SpatialObjective {
    std::vector<Point3> targets;
    Var l_center;
    Var l_psc;
    Var total;  // alpha1 * psc + alpha2 * center (+ l_llm constant)
};

SpatialObjective spatial_objective(Var refined_positions, std::span<const Box3> objects, double alpha1,
                                   double alpha2, double l_llm = 0.0);

// ---- toy training ----

struct TrainConfig {
    SchemeConfig scheme = SchemeConfig::toy();
    std::size_t steps = 500;
    double learning_rate = 1e-2;
    std::uint64_t seed = 1;
    std::size_t points_per_object = 64;
};

struct TrainStep {
    std::size_t step = 0;
    double l_center = 0.0;
    double l_psc = 0.0;
    double total = 0.0;
};

struct TrainResult {
    /// Loss before each update, then one final entry after the last update.
    std::vector<TrainStep> trace;
    SchemeParams params;
    double scene_diagonal = 0.0;
};

/// Plain gradient descent on alpha1 * L_psc + alpha2 * L_center (L_LLM = 0)
/// against nearest-object centroids recomputed every step.
TrainResult train_toy(const SceneRecord& scene, const TrainConfig& cfg);

// ---- gradient check ----

struct BlockGradError {
    std::string block;
    double max_rel_error = 0.0;
    std::size_t coordinates = 0;
};

struct SchemeGradCheck {
    std::vector<BlockGradError> blocks;
    double max_rel_error = 0.0;
    std::size_t coordinates = 0;
    bool passed = false;
};

/// Central differences over every parameter of the full pass (vote through
/// projector) on a seeded 5-object room, with all tensors random. The scalar is
/// L_psc + L_center against fixed targets plus a fixed random readout of the prompt.
/// Gradients smaller than `floor` are compared on an absolute scale of `floor`.
SchemeGradCheck scheme_grad_check(const SchemeConfig& cfg, std::uint64_t seed, double tol = 1e-4,
                                  double eps = 1e-5, double floor = 1e-5);

// ---- checkpoint ----

/// Text key-value format described in docs/formats.md.
void save_checkpoint(std::ostream& out, const SchemeConfig& cfg, const SchemeParams& params);
std::pair<SchemeConfig, SchemeParams> load_checkpoint(std::istream& in);

} // namespace spatial3d
