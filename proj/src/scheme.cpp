#include "spatial3d/scheme.hpp"

#include "spatial3d/errors.hpp"
#include "spatial3d/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace spatial3d {

const char* to_string(Stage stage)
{
    switch (stage) {
    case Stage::intra: return "intra";
    case Stage::gcn: return "gcn";
    case Stage::contextual: return "contextual";
    case Stage::refined: return "refined";
    }
    return "unknown";
}

SchemeConfig SchemeConfig::toy() { return SchemeConfig{}; }

SchemeConfig SchemeConfig::full_scale()
{
    SchemeConfig cfg;
    cfg.num_points = 1024;
    cfg.feature_dim = 256;
    cfg.num_referents = 256;
    cfg.graph_k = 8;
    cfg.prompt_width = 4096;
    return cfg;
}

void SchemeConfig::validate() const
{
    if (num_points == 0 || feature_dim == 0 || num_referents == 0 || prompt_width == 0) {
        throw InvalidArgument("scheme config: sizes must be positive");
    }
    if (num_referents > num_points) {
        throw InvalidArgument("scheme config: more referents than scene points");
    }
    if (graph_k == 0) {
        throw InvalidArgument("scheme config: graph_k must be positive");
    }
    if (!(ball_radius > 0.0) || ball_max_k == 0) {
        throw InvalidArgument("scheme config: invalid ball query settings");
    }
    if (alpha1 < 0.0 || alpha2 < 0.0) {
        throw InvalidArgument("scheme config: loss weights must be non-negative");
    }
}

// ---- parameters ----

namespace {

Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols, double stddev)
{
    Matrix m(rows, cols);
    for (double& v : m.data) {
        v = stddev * standard_normal(rng);
    }
    return m;
}

// Output projections of residual branches start at half scale.
constexpr double kResidualGain = 0.5;

} // namespace

SchemeParams SchemeParams::init(const SchemeConfig& cfg, std::uint64_t seed, InitMode mode)
{
    cfg.validate();
    Rng rng(derive_seed(seed, "scheme-params"));
    const std::size_t d = cfg.feature_dim;
    const bool random_all = mode == InitMode::all_random;
    SchemeParams p;

    auto weight = [&](std::size_t in, std::size_t out, double gain) {
        return gaussian(rng, in, out, gain / std::sqrt(static_cast<double>(in)));
    };
    auto bias = [&](std::size_t out) { return random_all ? gaussian(rng, 1, out, 0.1) : Matrix(1, out); };
    auto offset_head = [&](const std::string& prefix) {
        p.add(prefix + ".l1.weight", weight(d, d, 1.0));
        p.add(prefix + ".l1.bias", bias(d));
        p.add(prefix + ".l2.weight", random_all ? weight(d, 3, 0.1) : Matrix(d, 3));
        p.add(prefix + ".l2.bias", random_all ? gaussian(rng, 1, 3, 0.01) : Matrix(1, 3));
    };
    auto block_ffn = [&](const std::string& prefix) {
        p.add(prefix + ".l1.weight", weight(d, d, 1.0));
        p.add(prefix + ".l1.bias", bias(d));
        p.add(prefix + ".l2.weight", weight(d, d, kResidualGain));
        p.add(prefix + ".l2.bias", bias(d));
    };
    auto attention_block = [&](const std::string& prefix) {
        for (const char* proj : {".q", ".k", ".v"}) {
            p.add(prefix + proj, weight(d, d, 1.0));
        }
        p.add(prefix + ".o", weight(d, d, kResidualGain));
    };

    offset_head("vote");
    p.add("lift.weight", weight(d, d, 1.0));
    p.add("lift.bias", bias(d));
    for (std::size_t l = 0; l < cfg.gcn_layers; ++l) {
        p.add("gcn." + std::to_string(l) + ".weight", weight(d, d, 1.0));
    }
    for (std::size_t b = 0; b < cfg.attention_blocks; ++b) {
        const std::string prefix = "attn." + std::to_string(b);
        attention_block(prefix + ".self");
        block_ffn(prefix + ".self_ffn");
        attention_block(prefix + ".cross");
        block_ffn(prefix + ".cross_ffn");
    }
    offset_head("refine");
    p.add("proj.l1.weight", weight(d + 3, cfg.prompt_width, 1.0));
    p.add("proj.l1.bias", bias(cfg.prompt_width));
    p.add("proj.l2.weight", weight(cfg.prompt_width, cfg.prompt_width, 1.0));
    p.add("proj.l2.bias", bias(cfg.prompt_width));
    return p;
}

void SchemeParams::add(std::string name, Matrix value)
{
    if (contains(name)) {
        throw InvalidArgument("duplicate parameter '" + name + "'");
    }
    tensors_.push_back({std::move(name), std::move(value)});
}

const Matrix& SchemeParams::at(std::string_view name) const
{
    for (const auto& t : tensors_) {
        if (t.name == name) {
            return t.value;
        }
    }
    throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
}

Matrix& SchemeParams::at(std::string_view name)
{
    return const_cast<Matrix&>(std::as_const(*this).at(name));
}

bool SchemeParams::contains(std::string_view name) const
{
    return std::any_of(tensors_.begin(), tensors_.end(), [&](const auto& t) { return t.name == name; });
}

std::string SchemeParams::block_of(std::string_view tensor_name)
{
    const auto first = tensor_name.find('.');
    if (first == std::string_view::npos) {
        return std::string(tensor_name);
    }
    const auto head = tensor_name.substr(0, first);
    if (head == "gcn" || head == "attn") {
        const auto second = tensor_name.find('.', first + 1);
        return std::string(tensor_name.substr(0, second));
    }
    return std::string(head);
}

std::vector<std::string> SchemeParams::blocks() const
{
    std::vector<std::string> out;
    for (const auto& t : tensors_) {
        std::string b = block_of(t.name);
        if (out.empty() || out.back() != b) {
            out.push_back(std::move(b));
        }
    }
    return out;
}

// ---- graph binding ----

SchemeGraph::SchemeGraph(ad::Tape& tape, const SchemeConfig& cfg, const SchemeParams& params)
    : tape_(&tape), cfg_(&cfg)
{
    for (const auto& t : params.tensors()) {
        Var v = tape.parameter(t.value);
        leaves_.push_back(v);
        by_name_.emplace(t.name, v);
    }
}

SchemeGraph::SchemeGraph(ad::Tape& tape, const SchemeConfig& cfg, const SchemeParams& params,
                         std::span<const Var> leaves)
    : tape_(&tape), cfg_(&cfg), leaves_(leaves.begin(), leaves.end())
{
    if (leaves.size() != params.tensors().size()) {
        throw InvalidArgument("SchemeGraph: leaf count does not match parameter count");
    }
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (!leaves[i].value().same_shape(params.tensors()[i].value)) {
            throw InvalidArgument("SchemeGraph: leaf shape mismatch for " + params.tensors()[i].name);
        }
        by_name_.emplace(params.tensors()[i].name, leaves[i]);
    }
}

Var SchemeGraph::param(std::string_view name) const
{
    const auto it = by_name_.find(name);
    if (it == by_name_.end()) {
        throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
    }
    return it->second;
}

// ---- encoder stub ----

SceneFeatures encode_scene_stub(const PointCloud& cloud, const SchemeConfig& cfg)
{
    cfg.validate();
    if (cloud.size() < cfg.num_points) {
        throw InvalidArgument("encode_scene_stub: cloud has " + std::to_string(cloud.size()) +
                              " points, need at least " + std::to_string(cfg.num_points));
    }
    const auto picked = fps(cloud.points, cfg.num_points);

    Point3 centroid;
    for (const auto& p : cloud.points) {
        centroid = centroid + p;
    }
    centroid = (1.0 / static_cast<double>(cloud.size())) * centroid;
    double reach = 0.0;
    for (const auto& p : cloud.points) {
        reach = std::max(reach, distance(p, centroid));
    }
    reach = reach > 0.0 ? reach : 1.0;

    Rng rng(derive_seed(cfg.encoder_seed, "encoder-projection"));
    constexpr std::size_t kInputs = 4;  // x, y, z, density
    // random Fourier features; inputs are normalized to the cloud reach
    constexpr double kEncoderFrequency = 16.0;
    const Matrix projection = gaussian(rng, kInputs, cfg.feature_dim, kEncoderFrequency);

    const double r2 = cfg.ball_radius * cfg.ball_radius;
    std::vector<double> density(picked.size(), 0.0);
    double mean_density = 0.0;
    for (std::size_t i = 0; i < picked.size(); ++i) {
        std::size_t neighbors = 0;
        for (const auto& q : cloud.points) {
            neighbors += squared_distance(cloud.points[picked[i]], q) <= r2 ? 1 : 0;
        }
        density[i] = static_cast<double>(neighbors) / static_cast<double>(cfg.ball_max_k);
        mean_density += density[i] / static_cast<double>(picked.size());
    }

    SceneFeatures out{Matrix(cfg.num_points, 3), Matrix(cfg.num_points, cfg.feature_dim)};
    for (std::size_t i = 0; i < picked.size(); ++i) {
        const Point3& p = cloud.points[picked[i]];
        const Point3 u = (1.0 / reach) * (p - centroid);
        const double input[kInputs] = {u.x, u.y, u.z, density[i] - mean_density};
        out.positions(i, 0) = p.x;
        out.positions(i, 1) = p.y;
        out.positions(i, 2) = p.z;
        for (std::size_t j = 0; j < cfg.feature_dim; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < kInputs; ++k) {
                acc += input[k] * projection(k, j);
            }
            out.features(i, j) = std::sin(acc);
        }
    }
    return out;
}

// ---- building blocks ----

Var linear(const SchemeGraph& g, Var x, std::string_view prefix)
{
    const std::string p(prefix);
    return ad::add(ad::matmul(x, g.param(p + ".weight")), g.param(p + ".bias"));
}

Var ffn(const SchemeGraph& g, Var x, std::string_view prefix)
{
    const std::string p(prefix);
    return linear(g, ad::relu(linear(g, x, p + ".l1")), p + ".l2");
}

AttentionResult attention(const SchemeGraph& g, Var queries, Var context, std::string_view prefix)
{
    const std::string p(prefix);
    if (queries.cols() != context.cols()) {
        throw InvalidArgument("attention: query and context widths differ");
    }
    const Var q = ad::matmul(queries, g.param(p + ".q"));
    const Var k = ad::matmul(context, g.param(p + ".k"));
    const Var v = ad::matmul(context, g.param(p + ".v"));
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    const Var weights = ad::softmax_rows(ad::scale(ad::matmul(q, ad::transpose(k)), inv_sqrt_d));
    return {ad::matmul(ad::matmul(weights, v), g.param(p + ".o")), weights};
}

namespace {

Var activate(Var x, Activation act) { return act == Activation::relu ? ad::relu(x) : x; }

void require_stage(Stage actual, Stage expected, const char* op)
{
    if (actual != expected) {
        throw InvalidArgument(std::string(op) + ": expected referents at stage '" + to_string(expected) +
                              "', got '" + to_string(actual) + "'");
    }
}

void require_scene(const SceneFeatures& scene, const SchemeConfig& cfg)
{
    if (scene.positions.cols != 3 || scene.features.rows != scene.positions.rows) {
        throw InvalidArgument("scene features: positions must be N x 3 with one feature row per point");
    }
    if (scene.features.cols != cfg.feature_dim) {
        throw InvalidArgument("scene features: width " + std::to_string(scene.features.cols) +
                              " does not match feature_dim " + std::to_string(cfg.feature_dim));
    }
    if (scene.size() < cfg.num_referents) {
        throw InvalidArgument("scene features: fewer points than referents");
    }
}

} // namespace

IntraResult intra_referent(const SchemeGraph& g, const SceneFeatures& scene, Var scene_features)
{
    const SchemeConfig& cfg = g.config();
    require_scene(scene, cfg);
    ad::Tape& tape = g.tape();

    IntraResult r;
    const auto scene_points = ad::matrix_to_points(scene.positions);
    r.seeds.source = fps(scene_points, cfg.num_referents);
    r.seeds.positions = Matrix(cfg.num_referents, 3);
    for (std::size_t i = 0; i < r.seeds.source.size(); ++i) {
        for (std::size_t a = 0; a < 3; ++a) {
            r.seeds.positions(i, a) = scene.positions(r.seeds.source[i], a);
        }
    }
    const Var f_seed = ad::gather_rows(scene_features, r.seeds.source);
    r.seeds.features = f_seed.value();

    r.vote_offsets = ffn(g, f_seed, "vote");
    const Var p_vr = ad::add(tape.constant(r.seeds.positions), r.vote_offsets);

    const auto vr_points = ad::matrix_to_points(p_vr.value());
    r.groups = ball_query(vr_points, scene_points, cfg.ball_radius, cfg.ball_max_k);
    r.lifted = ad::relu(linear(g, scene_features, "lift"));
    r.referents = {p_vr, ad::max_pool_groups(r.lifted, r.groups), Stage::intra};
    return r;
}

ReferentVars inter_referent(const SchemeGraph& g, const ReferentVars& vr, SpatialAdjacency* adjacency_out)
{
    require_stage(vr.stage, Stage::intra, "inter_referent");
    const SchemeConfig& cfg = g.config();
    const std::size_t m = vr.positions.rows();
    if (m < 2) {
        throw InvalidArgument("inter_referent: need at least 2 referents");
    }
    SpatialAdjacency adj =
        knn_spatial_adjacency(ad::matrix_to_points(vr.positions.value()), std::min(cfg.graph_k, m - 1));
    const Var a = g.tape().constant(Matrix(m, m, adj.normalized));
    Var h = vr.features;
    for (std::size_t l = 0; l < cfg.gcn_layers; ++l) {
        h = activate(ad::matmul(ad::matmul(a, h), g.param("gcn." + std::to_string(l) + ".weight")),
                     cfg.gcn_activation);
    }
    if (adjacency_out) {
        *adjacency_out = std::move(adj);
    }
    return {vr.positions, h, Stage::gcn};
}

ReferentVars contextual_interactions(const SchemeGraph& g, const ReferentVars& vr, Var scene_features)
{
    require_stage(vr.stage, Stage::gcn, "contextual_interactions");
    if (vr.features.cols() != scene_features.cols()) {
        throw InvalidArgument("contextual_interactions: referent and scene feature widths differ");
    }
    Var h = vr.features;
    for (std::size_t b = 0; b < g.config().attention_blocks; ++b) {
        const std::string prefix = "attn." + std::to_string(b);
        h = ad::add(h, attention(g, h, h, prefix + ".self").output);
        h = ad::add(h, ffn(g, h, prefix + ".self_ffn"));
        h = ad::add(h, attention(g, h, scene_features, prefix + ".cross").output);
        h = ad::add(h, ffn(g, h, prefix + ".cross_ffn"));
    }
    return {vr.positions, h, Stage::contextual};
}

ReferentVars refine_location(const SchemeGraph& g, const ReferentVars& vr)
{
    require_stage(vr.stage, Stage::contextual, "refine_location");
    return {ad::add(vr.positions, ffn(g, vr.features, "refine")), vr.features, Stage::refined};
}

Var project_visual_prompt(const SchemeGraph& g, const ReferentVars& vr)
{
    require_stage(vr.stage, Stage::refined, "project_visual_prompt");
    const Var x = ad::concat_cols(vr.features, vr.positions);
    const Var hidden = activate(linear(g, x, "proj.l1"), g.config().projector_activation);
    return linear(g, hidden, "proj.l2");
}

SchemeForward run_scheme(const SchemeGraph& g, const SceneFeatures& scene)
{
    SchemeForward f;
    f.scene_features = g.tape().constant(scene.features);
    f.intra = intra_referent(g, scene, f.scene_features);
    f.gcn = inter_referent(g, f.intra.referents);
    f.contextual = contextual_interactions(g, f.gcn, f.scene_features);
    f.refined = refine_location(g, f.contextual);
    f.prompt = project_visual_prompt(g, f.refined);
    return f;
}

// ---- value-level stage wrappers ----

namespace {

ReferentVars bind(ad::Tape& tape, const VisualReferentSet& vr)
{
    if (vr.positions.cols != 3 || vr.positions.rows != vr.features.rows) {
        throw InvalidArgument("referent set: positions must be M x 3 with one feature row per referent");
    }
    return {tape.constant(vr.positions), tape.constant(vr.features), vr.stage};
}

VisualReferentSet unbind(const ReferentVars& r) { return {r.positions.value(), r.features.value(), r.stage}; }

} // namespace

VisualReferentSet intra_referent(const SceneFeatures& scene, const SchemeParams& params, const SchemeConfig& cfg)
{
    ad::Tape tape;
    SchemeGraph g(tape, cfg, params);
    return unbind(intra_referent(g, scene, tape.constant(scene.features)).referents);
}

VisualReferentSet inter_referent(const VisualReferentSet& vr, const SchemeParams& params, const SchemeConfig& cfg)
{
    ad::Tape tape;
    SchemeGraph g(tape, cfg, params);
    return unbind(inter_referent(g, bind(tape, vr)));
}

VisualReferentSet contextual_interactions(const VisualReferentSet& vr, const SceneFeatures& scene,
                                          const SchemeParams& params, const SchemeConfig& cfg)
{
    ad::Tape tape;
    SchemeGraph g(tape, cfg, params);
    return unbind(contextual_interactions(g, bind(tape, vr), tape.constant(scene.features)));
}

VisualReferentSet refine_location(const VisualReferentSet& vr, const SchemeParams& params, const SchemeConfig& cfg)
{
    ad::Tape tape;
    SchemeGraph g(tape, cfg, params);
    return unbind(refine_location(g, bind(tape, vr)));
}

VisualPrompt project_visual_prompt(const VisualReferentSet& vr, const SchemeParams& params, const SchemeConfig& cfg)
{
    ad::Tape tape;
    SchemeGraph g(tape, cfg, params);
    const ReferentVars r = bind(tape, vr);
    return {project_visual_prompt(g, r).value(), vr.positions};
}

// ---- losses ----

double loss_center(std::span<const Point3> pred, std::span<const Point3> gt)
{
    if (pred.size() != gt.size()) {
        throw InvalidArgument("loss_center: prediction and target counts differ");
    }
    if (pred.empty()) {
        throw InvalidArgument("loss_center: no referents");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        total += distance(pred[i], gt[i]);
    }
    return total / static_cast<double>(pred.size());
}

PscLoss loss_psc(std::span<const Point3> pred, std::span<const Point3> gt)
{
    if (pred.size() != gt.size()) {
        throw InvalidArgument("loss_psc: prediction and target counts differ");
    }
    if (pred.size() < 2) {
        return {0.0, true};
    }
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t j = i + 1; j < pred.size(); ++j) {
            total += std::abs(distance(pred[i], pred[j]) - distance(gt[i], gt[j]));
            ++pairs;
        }
    }
    return {total / static_cast<double>(pairs), false};
}

LossBreakdown loss_total(double l_llm, double l_psc, double l_center, double alpha1, double alpha2)
{
    for (double v : {l_llm, l_psc, l_center, alpha1, alpha2}) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw InvalidArgument("loss_total: inputs must be finite and non-negative");
        }
    }
    return {l_llm, l_psc, l_center, alpha1, alpha2, l_llm + alpha1 * l_psc + alpha2 * l_center};
}

Var loss_center(Var pred, std::span<const Point3> gt)
{
    if (pred.cols() != 3 || pred.rows() != gt.size() || gt.empty()) {
        throw InvalidArgument("loss_center: prediction must be M x 3 with M matching targets");
    }
    ad::Tape& tape = pred.tape();
    return ad::mean(ad::l2_norm_rows(ad::sub(pred, tape.constant(ad::points_to_matrix(gt)))));
}

Var loss_psc(Var pred, std::span<const Point3> gt)
{
    if (pred.cols() != 3 || pred.rows() != gt.size()) {
        throw InvalidArgument("loss_psc: prediction must be M x 3 with M matching targets");
    }
    ad::Tape& tape = pred.tape();
    const std::size_t m = gt.size();
    if (m < 2) {
        return tape.constant(Matrix(1, 1));
    }
    std::vector<std::size_t> first;
    std::vector<std::size_t> second;
    Matrix gt_dist(m * (m - 1) / 2, 1);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            gt_dist(first.size(), 0) = distance(gt[i], gt[j]);
            first.push_back(i);
            second.push_back(j);
        }
    }
    const Var pred_dist = ad::l2_norm_rows(ad::sub(ad::gather_rows(pred, first), ad::gather_rows(pred, second)));
    return ad::mean(ad::abs(ad::sub(pred_dist, tape.constant(std::move(gt_dist)))));
}

std::vector<Point3> centroid_targets(std::span<const Point3> positions, std::span<const Box3> objects)
{
    std::vector<Point3> out;
    out.reserve(positions.size());
    for (const auto& p : positions) {
        out.push_back(nearest_object_centroid(p, objects).centroid);
    }
    return out;
}

SpatialObjective spatial_objective(Var refined_positions, std::span<const Box3> objects, double alpha1,
                                   double alpha2, double l_llm)
{
    SpatialObjective obj;
    obj.targets = centroid_targets(ad::matrix_to_points(refined_positions.value()), objects);
    obj.l_center = loss_center(refined_positions, obj.targets);
    obj.l_psc = loss_psc(refined_positions, obj.targets);
    Var total = ad::add(ad::scale(obj.l_psc, alpha1), ad::scale(obj.l_center, alpha2));
    if (l_llm != 0.0) {
        total = ad::add(total, refined_positions.tape().constant(Matrix(1, 1, l_llm)));
    }
    obj.total = total;
    return obj;
}

// ---- toy training ----

TrainResult train_toy(const SceneRecord& scene, const TrainConfig& cfg)
{
    if (scene.objects.size() < 2) {
        throw InvalidArgument("train_toy: scene needs at least 2 objects");
    }
    if (cfg.learning_rate < 0.0) {
        throw InvalidArgument("train_toy: learning rate must be non-negative");
    }
    const PointCloud cloud = sample_scene_cloud(scene, cfg.points_per_object, cfg.seed);
    const SceneFeatures features = encode_scene_stub(cloud, cfg.scheme);

    std::vector<Box3> boxes;
    for (const auto& o : scene.objects) {
        boxes.push_back(o.box);
    }

    TrainResult result;
    result.params = SchemeParams::init(cfg.scheme, cfg.seed, InitMode::zero_offsets);
    result.scene_diagonal = scene_diagonal(scene);

    for (std::size_t step = 0; step <= cfg.steps; ++step) {
        ad::Tape tape;
        SchemeGraph g(tape, cfg.scheme, result.params);
        const Var scene_var = tape.constant(features.features);
        ReferentVars r = intra_referent(g, features, scene_var).referents;
        r = refine_location(g, contextual_interactions(g, inter_referent(g, r), scene_var));
        const SpatialObjective obj = spatial_objective(r.positions, boxes, cfg.scheme.alpha1, cfg.scheme.alpha2);

        TrainStep s{step, obj.l_center.value().data[0], obj.l_psc.value().data[0], obj.total.value().data[0]};
        if (!std::isfinite(s.total)) {
            throw NumericError("train_toy: non-finite loss at step " + std::to_string(step));
        }
        result.trace.push_back(s);
        if (step == cfg.steps) {
            break;
        }
        try {
            tape.backward(obj.total);
        } catch (const NumericError& e) {
            throw NumericError("train_toy: step " + std::to_string(step) + ": " + e.what());
        }
        auto& tensors = result.params.tensors();
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            const Matrix& grad = g.leaves()[i].grad();
            for (std::size_t k = 0; k < grad.data.size(); ++k) {
                tensors[i].value.data[k] -= cfg.learning_rate * grad.data[k];
            }
        }
    }
    return result;
}

// ---- gradient check ----

SchemeGradCheck scheme_grad_check(const SchemeConfig& cfg, std::uint64_t seed, double tol, double eps,
                                  double floor)
{
    cfg.validate();
    const SceneRecord scene = synthetic_room("gradcheck", 5, seed);
    const std::size_t per_object = std::max<std::size_t>(16, (2 * cfg.num_points + 4) / 5);
    const SceneFeatures features = encode_scene_stub(sample_scene_cloud(scene, per_object, seed), cfg);
    const SchemeParams params = SchemeParams::init(cfg, seed, InitMode::all_random);

    std::vector<Box3> boxes;
    for (const auto& o : scene.objects) {
        boxes.push_back(o.box);
    }
    Rng rng(derive_seed(seed, "gradcheck-readout"));
    const Matrix readout = gaussian(rng, cfg.prompt_width, 1, 1.0);

    // targets are frozen at the initial pass so the scalar is smooth in the parameters
    std::vector<Point3> targets;
    {
        ad::Tape tape;
        SchemeGraph g(tape, cfg, params);
        const SchemeForward fw = run_scheme(g, features);
        targets = centroid_targets(ad::matrix_to_points(fw.refined.positions.value()), boxes);
    }

    const ad::ScalarBuilder f = [&](ad::Tape& tape, std::span<const Var> leaves) {
        SchemeGraph g(tape, cfg, params, leaves);
        const SchemeForward fw = run_scheme(g, features);
        const Var spatial = ad::add(loss_psc(fw.refined.positions, targets), loss_center(fw.refined.positions, targets));
        return ad::add(spatial, ad::mean(ad::matmul(fw.prompt, tape.constant(readout))));
    };
    ad::GradCheckOptions options;
    options.eps = eps;
    options.tol = tol;
    options.denominator_floor = floor;
    const ad::GradCheckReport report = ad::grad_check(f, params.tensors(), options);

    SchemeGradCheck out;
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const std::string block = SchemeParams::block_of(report.entries[i].name);
        if (out.blocks.empty() || out.blocks.back().block != block) {
            out.blocks.push_back({block, 0.0, 0});
        }
        out.blocks.back().max_rel_error = std::max(out.blocks.back().max_rel_error, report.entries[i].max_rel_error);
        out.blocks.back().coordinates += params.tensors()[i].value.data.size();
    }
    out.max_rel_error = report.max_rel_error;
    out.coordinates = report.coordinates;
    out.passed = out.max_rel_error < tol;
    return out;
}

// ---- checkpoint ----

namespace {

constexpr const char* kCheckpointMagic = "spatial3d-checkpoint";
constexpr int kCheckpointVersion = 1;

const char* to_string(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

Activation activation_from(const std::string& s)
{
    if (s == "relu") {
        return Activation::relu;
    }
    if (s == "identity") {
        return Activation::identity;
    }
    throw InvalidArgument("checkpoint: unknown activation '" + s + "'");
}

std::string format_double(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw InvalidArgument("checkpoint: bad number '" + s + "'");
    }
    return v;
}

} // namespace

void save_checkpoint(std::ostream& out, const SchemeConfig& cfg, const SchemeParams& params)
{
    out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
    out << "config num_points " << cfg.num_points << '\n';
    out << "config feature_dim " << cfg.feature_dim << '\n';
    out << "config num_referents " << cfg.num_referents << '\n';
    out << "config gcn_layers " << cfg.gcn_layers << '\n';
    out << "config graph_k " << cfg.graph_k << '\n';
    out << "config attention_blocks " << cfg.attention_blocks << '\n';
    out << "config prompt_width " << cfg.prompt_width << '\n';
    out << "config ball_radius " << format_double(cfg.ball_radius) << '\n';
    out << "config ball_max_k " << cfg.ball_max_k << '\n';
    out << "config gcn_activation " << to_string(cfg.gcn_activation) << '\n';
    out << "config projector_activation " << to_string(cfg.projector_activation) << '\n';
    out << "config alpha1 " << format_double(cfg.alpha1) << '\n';
    out << "config alpha2 " << format_double(cfg.alpha2) << '\n';
    out << "config encoder_seed " << cfg.encoder_seed << '\n';
    for (const auto& t : params.tensors()) {
        out << "tensor " << t.name << ' ' << t.value.rows << ' ' << t.value.cols << '\n';
        for (std::size_t i = 0; i < t.value.data.size(); ++i) {
            out << (i ? " " : "") << format_double(t.value.data[i]);
        }
        out << '\n';
    }
    out << "end\n";
}

std::pair<SchemeConfig, SchemeParams> load_checkpoint(std::istream& in)
{
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kCheckpointMagic) {
        throw InvalidArgument("checkpoint: missing header");
    }
    if (version != kCheckpointVersion) {
        throw InvalidArgument("checkpoint: unsupported version " + std::to_string(version));
    }
    SchemeConfig cfg;
    SchemeParams params;
    std::string kind;
    while (in >> kind) {
        if (kind == "end") {
            cfg.validate();
            return {cfg, std::move(params)};
        }
        if (kind == "config") {
            std::string key;
            std::string value;
            in >> key >> value;
            auto as_size = [&] { return static_cast<std::size_t>(std::stoull(value)); };
            if (key == "num_points") cfg.num_points = as_size();
            else if (key == "feature_dim") cfg.feature_dim = as_size();
            else if (key == "num_referents") cfg.num_referents = as_size();
            else if (key == "gcn_layers") cfg.gcn_layers = as_size();
            else if (key == "graph_k") cfg.graph_k = as_size();
            else if (key == "attention_blocks") cfg.attention_blocks = as_size();
            else if (key == "prompt_width") cfg.prompt_width = as_size();
            else if (key == "ball_radius") cfg.ball_radius = parse_double(value);
            else if (key == "ball_max_k") cfg.ball_max_k = as_size();
            else if (key == "gcn_activation") cfg.gcn_activation = activation_from(value);
            else if (key == "projector_activation") cfg.projector_activation = activation_from(value);
            else if (key == "alpha1") cfg.alpha1 = parse_double(value);
            else if (key == "alpha2") cfg.alpha2 = parse_double(value);
            else if (key == "encoder_seed") cfg.encoder_seed = std::stoull(value);
            else throw InvalidArgument("checkpoint: unknown config key '" + key + "'");
        } else if (kind == "tensor") {
            std::string name;
            std::size_t rows = 0;
            std::size_t cols = 0;
            if (!(in >> name >> rows >> cols)) {
                throw InvalidArgument("checkpoint: bad tensor header");
            }
            Matrix m(rows, cols);
            std::string token;
            for (double& v : m.data) {
                if (!(in >> token)) {
                    throw InvalidArgument("checkpoint: truncated tensor '" + name + "'");
                }
                v = parse_double(token);
            }
            params.add(name, std::move(m));
        } else {
            throw InvalidArgument("checkpoint: unexpected record '" + kind + "'");
        }
    }
    throw InvalidArgument("checkpoint: missing end marker");
}

} // namespace spatial3d
