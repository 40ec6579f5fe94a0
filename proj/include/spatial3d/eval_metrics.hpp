#pragma once

// Geometric scores for grounding, distance and editing answers. All IoUs are
// computed on the quantized grid.

#include "spatial3d/geometry.hpp"
#include "spatial3d/modle_synth.hpp"
#include "spatial3d/token_codec.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spatial3d {

Box3 to_box3(const QuantBox& q);

/// Fraction of samples whose prediction has IoU >= k with the truth. A missing
/// prediction is a miss.
double acc_at_iou(std::span<const std::optional<Box3>> preds, std::span<const Box3> gts, double k);

/// Size of a maximum one-to-one matching between predictions and truths
/// restricted to pairs with IoU >= k (augmenting paths).
std::size_t match_count(std::span<const Box3> preds, std::span<const Box3> gts, double k);

/// F1 of one sample; 1 when both sets are empty.
double f1_sample(std::span<const Box3> preds, std::span<const Box3> gts, double k);

/// Mean per-sample F1.
double f1_at_iou(const std::vector<std::vector<Box3>>& preds, const std::vector<std::vector<Box3>>& gts, double k);

struct DistancePrediction {
    std::optional<Box3> a;
    std::optional<Box3> b;
    std::optional<std::array<double, 3>> gaps;
};

struct DistanceTruth {
    Box3 a;
    Box3 b;
    std::array<double, 3> gaps{};
};

struct MareResult {
    /// Unset when no sample passes the localization gate.
    std::optional<std::array<double, 3>> mare;
    double gate_rate = 0.0;
    std::size_t qualified = 0;
    std::size_t total = 0;
};

/// Samples qualify when both boxes reach IoU >= k. Per axis
/// ARE = |pred - gt| / max(gt, 1), averaged over qualifying samples.
MareResult mare_at_iou(std::span<const DistancePrediction> preds, std::span<const DistanceTruth> gts, double k);

struct EditPrediction {
    std::optional<QuantBox> box;       // movement: the moved box
    std::optional<GridTriple> center;  // placement: the bare center triple
};

/// Movement scores the predicted box. Placement builds a box from the predicted
/// center and the queried (ground-truth) size.
double editing_acc(std::span<const EditPrediction> preds, std::span<const QuantBox> gts, Task task, double k);

// ---- dataset scoring ----

struct Prediction {
    std::string sample_id;
    std::string answer_text;
};

std::vector<Prediction> read_predictions(std::istream& in);
std::vector<Prediction> read_predictions_file(const std::string& path);
void write_predictions(std::ostream& out, const std::vector<Prediction>& preds);

/// One prediction per sample, answering with the sample's own answer text.
std::vector<Prediction> self_predictions(const std::vector<InstructionSample>& samples);

struct EvalReport {
    /// Sorted by key.
    std::map<std::string, double> metrics;
    std::map<std::string, std::size_t> counts;

    std::string to_text() const;
    std::string to_json() const;
};

/// Scores predictions against synthesized samples at every threshold in `ks`.
///
///   acc@k              grounding of A and B (distance) and the original box (movement)
///   f1@k               all loc boxes per answer against all ground-truth boxes
///   mare@k.{x,y,z}     distance gaps over gated samples; mare@k.gate_rate
///   movement_acc@k     last loc box against the moved box
///   placement_acc@k    center triple with the queried size against the masked box
///
/// Samples without a prediction, or whose prediction fails to parse, score as
/// misses. A prediction naming an unknown sample throws InvalidArgument.
EvalReport evaluate(const std::vector<InstructionSample>& gts, const std::vector<Prediction>& preds,
                    const std::vector<double>& ks);

/// Shortest decimal form used in metric keys ("0.25", "0.5").
std::string format_threshold(double k);

} // namespace spatial3d
