#include "spatial3d/eval_metrics.hpp"

#include "spatial3d/errors.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace spatial3d {

using nlohmann::ordered_json;

Box3 to_box3(const QuantBox& q)
{
    Box3 b;
    for (std::size_t a = 0; a < 3; ++a) {
        b.center[a] = q.center[a];
        b.extent[a] = q.extent[a];
    }
    return b;
}

namespace {

void require_threshold(double k)
{
    if (!(k >= 0.0 && k <= 1.0)) {
        throw InvalidArgument("IoU threshold must lie in [0, 1]");
    }
}

template <class A, class B>
void require_aligned(const A& a, const B& b, const char* what)
{
    if (a.size() != b.size()) {
        throw InvalidArgument(std::string(what) + ": " + std::to_string(a.size()) + " predictions for " +
                              std::to_string(b.size()) + " ground truths");
    }
}

} // namespace

double acc_at_iou(std::span<const std::optional<Box3>> preds, std::span<const Box3> gts, double k)
{
    require_threshold(k);
    require_aligned(preds, gts, "acc_at_iou");
    if (gts.empty()) {
        return 0.0;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < gts.size(); ++i) {
        hits += preds[i] && iou_aabb(*preds[i], gts[i]) >= k ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(gts.size());
}

std::size_t match_count(std::span<const Box3> preds, std::span<const Box3> gts, double k)
{
    require_threshold(k);
    std::vector<std::vector<std::size_t>> adj(preds.size());
    for (std::size_t p = 0; p < preds.size(); ++p) {
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (iou_aabb(preds[p], gts[g]) >= k) {
                adj[p].push_back(g);
            }
        }
    }
    constexpr std::size_t kFree = static_cast<std::size_t>(-1);
    std::vector<std::size_t> owner(gts.size(), kFree);
    std::vector<char> visited;
    std::function<bool(std::size_t)> augment = [&](std::size_t p) {
        for (std::size_t g : adj[p]) {
            if (visited[g]) {
                continue;
            }
            visited[g] = 1;
            if (owner[g] == kFree || augment(owner[g])) {
                owner[g] = p;
                return true;
            }
        }
        return false;
    };
    std::size_t matched = 0;
    for (std::size_t p = 0; p < preds.size(); ++p) {
        visited.assign(gts.size(), 0);
        matched += augment(p) ? 1 : 0;
    }
    return matched;
}

double f1_sample(std::span<const Box3> preds, std::span<const Box3> gts, double k)
{
    if (preds.empty() && gts.empty()) {
        return 1.0;
    }
    const std::size_t tp = match_count(preds, gts, k);
    if (tp == 0) {
        return 0.0;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(preds.size());
    const double recall = static_cast<double>(tp) / static_cast<double>(gts.size());
    return 2.0 * precision * recall / (precision + recall);
}

double f1_at_iou(const std::vector<std::vector<Box3>>& preds, const std::vector<std::vector<Box3>>& gts, double k)
{
    require_threshold(k);
    require_aligned(preds, gts, "f1_at_iou");
    if (gts.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < gts.size(); ++i) {
        sum += f1_sample(preds[i], gts[i], k);
    }
    return sum / static_cast<double>(gts.size());
}

MareResult mare_at_iou(std::span<const DistancePrediction> preds, std::span<const DistanceTruth> gts, double k)
{
    require_threshold(k);
    require_aligned(preds, gts, "mare_at_iou");
    MareResult r;
    r.total = gts.size();
    std::array<double, 3> sum{};
    for (std::size_t i = 0; i < gts.size(); ++i) {
        const auto& p = preds[i];
        if (!p.a || !p.b || !p.gaps) {
            continue;
        }
        if (iou_aabb(*p.a, gts[i].a) < k || iou_aabb(*p.b, gts[i].b) < k) {
            continue;
        }
        ++r.qualified;
        for (std::size_t a = 0; a < 3; ++a) {
            sum[a] += std::abs((*p.gaps)[a] - gts[i].gaps[a]) / std::max(gts[i].gaps[a], 1.0);
        }
    }
    if (r.total > 0) {
        r.gate_rate = static_cast<double>(r.qualified) / static_cast<double>(r.total);
    }
    if (r.qualified > 0) {
        std::array<double, 3> m{};
        for (std::size_t a = 0; a < 3; ++a) {
            m[a] = sum[a] / static_cast<double>(r.qualified);
        }
        r.mare = m;
    }
    return r;
}

double editing_acc(std::span<const EditPrediction> preds, std::span<const QuantBox> gts, Task task, double k)
{
    require_threshold(k);
    require_aligned(preds, gts, "editing_acc");
    if (task == Task::distance) {
        throw InvalidArgument("editing_acc: task must be movement or placement");
    }
    std::vector<std::optional<Box3>> boxes;
    std::vector<Box3> truths;
    for (std::size_t i = 0; i < gts.size(); ++i) {
        truths.push_back(to_box3(gts[i]));
        if (task == Task::movement && preds[i].box) {
            boxes.push_back(to_box3(*preds[i].box));
        } else if (task == Task::placement && preds[i].center) {
            boxes.push_back(to_box3(QuantBox{*preds[i].center, gts[i].extent}));
        } else {
            boxes.push_back(std::nullopt);
        }
    }
    return acc_at_iou(boxes, truths, k);
}

// ---- prediction files ----

std::vector<Prediction> read_predictions(std::istream& in)
{
    std::vector<Prediction> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = ordered_json::parse(line);
            out.push_back({j.at("sample_id").get<std::string>(), j.at("answer_text").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw InvalidArgument("prediction line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Prediction> read_predictions_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open predictions file '" + path + "'");
    }
    return read_predictions(in);
}

void write_predictions(std::ostream& out, const std::vector<Prediction>& preds)
{
    for (const auto& p : preds) {
        ordered_json j;
        j["sample_id"] = p.sample_id;
        j["answer_text"] = p.answer_text;
        out << j.dump() << '\n';
    }
}

std::vector<Prediction> self_predictions(const std::vector<InstructionSample>& samples)
{
    std::vector<Prediction> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back({s.id, s.answer});
    }
    return out;
}

// ---- reports ----

std::string format_threshold(double k)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, k);
    return std::string(buf, r.ptr);
}

namespace {

std::string format_value(double v)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

} // namespace

std::string EvalReport::to_text() const
{
    std::ostringstream out;
    for (const auto& [key, n] : counts) {
        out << key << '=' << n << '\n';
    }
    for (const auto& [key, v] : metrics) {
        out << key << '=' << format_value(v) << '\n';
    }
    return out.str();
}

std::string EvalReport::to_json() const
{
    ordered_json j;
    j["counts"] = ordered_json::object();
    for (const auto& [key, n] : counts) {
        j["counts"][key] = n;
    }
    j["metrics"] = ordered_json::object();
    for (const auto& [key, v] : metrics) {
        j["metrics"][key] = v;
    }
    return j.dump(2) + "\n";
}

EvalReport evaluate(const std::vector<InstructionSample>& gts, const std::vector<Prediction>& preds,
                    const std::vector<double>& ks)
{
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < gts.size(); ++i) {
        if (!index.emplace(gts[i].id, i).second) {
            throw InvalidArgument("duplicate ground-truth sample id '" + gts[i].id + "'");
        }
    }
    std::vector<std::optional<AnswerPayload>> parsed(gts.size());
    std::vector<char> seen(gts.size(), 0);
    EvalReport report;
    std::size_t unparseable = 0;
    for (const auto& p : preds) {
        const auto it = index.find(p.sample_id);
        if (it == index.end()) {
            throw InvalidArgument("prediction for unknown sample '" + p.sample_id + "'");
        }
        if (seen[it->second]) {
            throw InvalidArgument("duplicate prediction for sample '" + p.sample_id + "'");
        }
        seen[it->second] = 1;
        try {
            parsed[it->second] = parse_answer(p.answer_text);
        } catch (const ParseError&) {
            ++unparseable;
        }
    }
    report.counts["predictions.missing"] = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 0));
    report.counts["predictions.unparseable"] = unparseable;

    // gather per-task views once; thresholds only change the scoring
    std::vector<std::optional<Box3>> ground_pred;
    std::vector<Box3> ground_gt;
    std::vector<std::vector<Box3>> set_pred;
    std::vector<std::vector<Box3>> set_gt;
    std::vector<DistancePrediction> dist_pred;
    std::vector<DistanceTruth> dist_gt;
    std::vector<EditPrediction> move_pred;
    std::vector<QuantBox> move_gt;
    std::vector<EditPrediction> place_pred;
    std::vector<QuantBox> place_gt;

    auto nth_box = [](const std::vector<QuantBox>& boxes, std::size_t i) -> std::optional<Box3> {
        return i < boxes.size() ? std::optional<Box3>(to_box3(boxes[i])) : std::nullopt;
    };

    for (std::size_t i = 0; i < gts.size(); ++i) {
        const auto& s = gts[i];
        const std::vector<QuantBox> boxes = parsed[i] ? parsed[i]->boxes() : std::vector<QuantBox>{};
        ++report.counts["samples." + std::string(to_string(s.task))];
        if (s.task == Task::distance || s.task == Task::movement) {
            std::vector<Box3> pb;
            for (const auto& b : boxes) {
                pb.push_back(to_box3(b));
            }
            std::vector<Box3> gb;
            for (const auto& b : s.gt.boxes) {
                gb.push_back(to_box3(b));
            }
            set_pred.push_back(std::move(pb));
            set_gt.push_back(std::move(gb));
        }
        switch (s.task) {
        case Task::distance: {
            if (s.gt.boxes.size() != 2 || s.gt.gaps.size() != 3) {
                throw InvalidArgument("sample " + s.id + ": malformed distance ground truth");
            }
            DistancePrediction dp{nth_box(boxes, 0), nth_box(boxes, 1), std::nullopt};
            if (parsed[i]) {
                const auto g = parsed[i]->gaps();
                if (g.size() == 3) {
                    dp.gaps = std::array<double, 3>{double(g[0]), double(g[1]), double(g[2])};
                }
            }
            ground_pred.push_back(dp.a);
            ground_pred.push_back(dp.b);
            ground_gt.push_back(to_box3(s.gt.boxes[0]));
            ground_gt.push_back(to_box3(s.gt.boxes[1]));
            dist_pred.push_back(dp);
            dist_gt.push_back({to_box3(s.gt.boxes[0]), to_box3(s.gt.boxes[1]),
                               {double(s.gt.gaps[0]), double(s.gt.gaps[1]), double(s.gt.gaps[2])}});
            break;
        }
        case Task::movement: {
            if (s.gt.boxes.size() != 2) {
                throw InvalidArgument("sample " + s.id + ": malformed movement ground truth");
            }
            ground_pred.push_back(nth_box(boxes, 0));
            ground_gt.push_back(to_box3(s.gt.boxes[0]));
            EditPrediction ep;
            if (!boxes.empty()) {
                ep.box = boxes.back();
            }
            move_pred.push_back(ep);
            move_gt.push_back(s.gt.boxes[1]);
            break;
        }
        case Task::placement: {
            if (s.gt.boxes.size() != 1) {
                throw InvalidArgument("sample " + s.id + ": malformed placement ground truth");
            }
            EditPrediction ep;
            if (parsed[i]) {
                const auto t = parsed[i]->triples();
                if (!t.empty()) {
                    ep.center = t.front();
                }
            }
            place_pred.push_back(ep);
            place_gt.push_back(s.gt.boxes[0]);
            break;
        }
        }
    }

    for (double k : ks) {
        require_threshold(k);
        const std::string t = format_threshold(k);
        if (!ground_gt.empty()) {
            report.metrics["acc@" + t] = acc_at_iou(ground_pred, ground_gt, k);
        }
        if (!set_gt.empty()) {
            report.metrics["f1@" + t] = f1_at_iou(set_pred, set_gt, k);
        }
        if (!dist_gt.empty()) {
            const MareResult m = mare_at_iou(dist_pred, dist_gt, k);
            report.metrics["mare@" + t + ".gate_rate"] = m.gate_rate;
            report.counts["mare@" + t + ".qualified"] = m.qualified;
            if (m.mare) {
                report.metrics["mare@" + t + ".x"] = (*m.mare)[0];
                report.metrics["mare@" + t + ".y"] = (*m.mare)[1];
                report.metrics["mare@" + t + ".z"] = (*m.mare)[2];
            }
        }
        if (!move_gt.empty()) {
            report.metrics["movement_acc@" + t] = editing_acc(move_pred, move_gt, Task::movement, k);
        }
        if (!place_gt.empty()) {
            report.metrics["placement_acc@" + t] = editing_acc(place_pred, place_gt, Task::placement, k);
        }
    }
    return report;
}

} // namespace spatial3d
