#include "spatial3d/cli.hpp"

#include "spatial3d/errors.hpp"
#include "spatial3d/eval_metrics.hpp"
#include "spatial3d/modle_synth.hpp"
#include "spatial3d/scheme.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace spatial3d {

namespace {

// Runs a command body, mapping exceptions to exit codes.
int guarded(const char* name, std::ostream& err, const std::function<int()>& body)
{
    try {
        return body();
    } catch (const InvalidArgument& e) {
        err << name << ": " << e.what() << '\n';
        return kExitInvalid;
    } catch (const ParseError& e) {
        err << name << ": " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << name << ": internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

void require_file(const std::string& path, const char* flag)
{
    if (path.empty()) {
        throw InvalidArgument(std::string(flag) + " is required");
    }
    if (!std::filesystem::is_regular_file(path)) {
        throw InvalidArgument(std::string(flag) + ": no such file '" + path + "'");
    }
}

void require_output(const std::string& path, const char* flag)
{
    if (path.empty()) {
        throw InvalidArgument(std::string(flag) + " is required");
    }
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent)) {
        throw InvalidArgument(std::string(flag) + ": directory '" + parent.string() + "' does not exist");
    }
}

void write_file(const std::string& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary);
    out << bytes;
    if (!out) {
        throw InvalidArgument("cannot write '" + path + "'");
    }
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidArgument("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

int cmd_scenes(const ScenesOptions& o, std::ostream& out, std::ostream& err)
{
    return guarded("scenes", err, [&] {
        require_output(o.out, "--out");
        if (o.count == 0) {
            throw InvalidArgument("--count must be positive");
        }
        std::ostringstream buf;
        write_scenes(buf, synthetic_corpus(o.count, o.seed));
        write_file(o.out, buf.str());
        out << "scenes=" << o.count << '\n';
        return kExitOk;
    });
}

int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err)
{
    return guarded("synth", err, [&] {
        require_file(o.scenes, "--scenes");
        if (o.out.empty()) {
            throw InvalidArgument("--out is required");
        }
        std::vector<Task> tasks;
        for (const auto& t : o.tasks) {
            tasks.push_back(task_from_string(t));
        }
        DatasetPlan plan = DatasetPlan::full_size(o.scale, tasks);
        plan.val_scene_fraction = o.val_fraction;
        const Dataset ds = generate_dataset(read_scenes_file(o.scenes), plan, o.seed);
        const std::string hash = write_dataset(ds, o.out);
        out << "train=" << ds.train.size() << " val=" << ds.val.size() << '\n';
        for (Task t : kAllTasks) {
            const auto n_train = std::count_if(ds.train.begin(), ds.train.end(), [&](const auto& s) { return s.task == t; });
            const auto n_val = std::count_if(ds.val.begin(), ds.val.end(), [&](const auto& s) { return s.task == t; });
            out << to_string(t) << ".train=" << n_train << ' ' << to_string(t) << ".val=" << n_val << '\n';
        }
        out << "content_hash=" << hash << '\n';
        return kExitOk;
    });
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err)
{
    return guarded("eval", err, [&] {
        if (o.gt.empty()) {
            throw InvalidArgument("--gt is required");
        }
        for (const auto& p : o.gt) {
            require_file(p, "--gt");
        }
        require_file(o.pred, "--pred");
        if (!o.report.empty()) {
            require_output(o.report, "--report");
        }
        if (!o.report_json.empty()) {
            require_output(o.report_json, "--report-json");
        }
        std::vector<InstructionSample> gts;
        for (const auto& p : o.gt) {
            auto part = read_samples_file(p);
            gts.insert(gts.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
        }
        const EvalReport report = evaluate(gts, read_predictions_file(o.pred), o.ious);
        if (o.report.empty()) {
            out << report.to_text();
        } else {
            write_file(o.report, report.to_text());
        }
        if (!o.report_json.empty()) {
            write_file(o.report_json, report.to_json());
        }
        return kExitOk;
    });
}

int cmd_codec(const CodecOptions& o, std::ostream& out, std::ostream& err)
{
    return guarded("codec", err, [&] {
        if (o.samples.empty()) {
            throw InvalidArgument("--samples is required");
        }
        std::size_t checked = 0;
        std::size_t violations = 0;
        for (const auto& path : o.samples) {
            require_file(path, "--samples");
            std::istringstream in(read_file(path));
            std::string line;
            std::size_t line_no = 0;
            while (std::getline(in, line)) {
                ++line_no;
                if (line.find_first_not_of(" \t\r") == std::string::npos) {
                    continue;
                }
                ++checked;
                try {
                    const InstructionSample s = sample_from_json(line);
                    if (sample_to_json(s) != line) {
                        throw InvalidArgument("record does not re-serialize byte-identically");
                    }
                    check_sample(s);
                    for (const auto& item : parse_answer(s.answer).items) {
                        if (const auto* b = std::get_if<QuantBox>(&item)) {
                            if (parse_loc(emit_loc(*b)) != *b) {
                                throw InvalidArgument("loc round trip failed");
                            }
                        } else if (const auto* g = std::get_if<Gap>(&item)) {
                            if (parse_gap(emit_gap(g->value)) != g->value) {
                                throw InvalidArgument("gap round trip failed");
                            }
                        } else if (const auto* t = std::get_if<CenterTriple>(&item)) {
                            if (parse_triple(emit_triple(t->value)) != t->value) {
                                throw InvalidArgument("triple round trip failed");
                            }
                        }
                    }
                } catch (const std::exception& e) {
                    ++violations;
                    err << path << ":" << line_no << ": " << e.what() << '\n';
                }
            }
        }
        out << "checked=" << checked << " violations=" << violations << '\n';
        return violations == 0 ? kExitOk : kExitInvalid;
    });
}

int cmd_gradcheck(const GradcheckOptions& o, std::ostream& out, std::ostream& err)
{
    return guarded("gradcheck", err, [&] {
        SchemeConfig cfg = SchemeConfig::toy();
        cfg.num_points = o.num_points;
        cfg.num_referents = o.num_referents;
        cfg.feature_dim = o.feature_dim;
        const SchemeGradCheck r = scheme_grad_check(cfg, o.seed, o.tol);
        for (const auto& b : r.blocks) {
            out << b.block << " max_rel_error=" << b.max_rel_error << " coordinates=" << b.coordinates << '\n';
        }
        out << "max_rel_error=" << r.max_rel_error << " tol=" << o.tol << (r.passed ? " PASS" : " FAIL") << '\n';
        if (!r.passed) {
            err << "gradcheck: max relative error " << r.max_rel_error << " exceeds " << o.tol << '\n';
        }
        return r.passed ? kExitOk : kExitInvalid;
    });
}

int cmd_train_toy(const TrainToyOptions& o, std::ostream& out, std::ostream& err)
{
    return guarded("train-toy", err, [&] {
        if (!o.trace.empty()) {
            require_output(o.trace, "--trace");
        }
        if (!o.checkpoint.empty()) {
            require_output(o.checkpoint, "--checkpoint");
        }
        TrainConfig cfg;
        cfg.seed = o.seed;
        cfg.steps = o.steps;
        cfg.learning_rate = o.learning_rate;
        const SceneRecord room = synthetic_room("toy", o.objects, o.seed);
        const TrainResult r = train_toy(room, cfg);
        if (!o.trace.empty()) {
            std::ostringstream csv;
            csv << "step,l_center,l_psc,total\n";
            for (const auto& s : r.trace) {
                csv << s.step << ',' << s.l_center << ',' << s.l_psc << ',' << s.total << '\n';
            }
            write_file(o.trace, csv.str());
        }
        if (!o.checkpoint.empty()) {
            std::ostringstream ckpt;
            save_checkpoint(ckpt, cfg.scheme, r.params);
            write_file(o.checkpoint, ckpt.str());
        }
        const TrainStep& first = r.trace.front();
        const TrainStep& last = r.trace.back();
        out << "steps=" << o.steps << " scene_diagonal=" << r.scene_diagonal << '\n'
            << "l_center " << first.l_center << " -> " << last.l_center << '\n'
            << "l_psc " << first.l_psc << " -> " << last.l_psc << '\n';
        return kExitOk;
    });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"3D spatial instruction data, scoring and toy spatial scheme"};
    app.require_subcommand(1);

    ScenesOptions scenes;
    auto* c_scenes = app.add_subcommand("scenes", "write a synthetic scene corpus (JSONL)");
    c_scenes->add_option("--out", scenes.out, "output scene file")->required();
    c_scenes->add_option("--count", scenes.count, "number of rooms");
    c_scenes->add_option("--seed", scenes.seed);

    SynthOptions synth;
    auto* c_synth = app.add_subcommand("synth", "synthesize the instruction dataset");
    c_synth->add_option("--scenes", synth.scenes, "scene JSONL")->required();
    c_synth->add_option("--out", synth.out, "output directory")->required();
    c_synth->add_option("--seed", synth.seed);
    c_synth->add_option("--scale", synth.scale, "fraction of the full dataset counts");
    c_synth->add_option("--tasks", synth.tasks, "distance, movement, placement")->delimiter(',');
    c_synth->add_option("--val-fraction", synth.val_fraction, "share of scenes held out");

    EvalOptions eval;
    auto* c_eval = app.add_subcommand("eval", "score predictions");
    c_eval->add_option("--gt", eval.gt, "sample JSONL (repeatable)")->required();
    c_eval->add_option("--pred", eval.pred, "prediction JSONL")->required();
    auto* iou_opt = c_eval->add_option("--iou", eval.ious, "IoU threshold (repeatable)");
    c_eval->add_option("--report", eval.report, "key=value report path");
    c_eval->add_option("--report-json", eval.report_json, "JSON report path");

    CodecOptions codec;
    auto* c_codec = app.add_subcommand("codec", "check token round trips over sample files");
    c_codec->add_option("--samples", codec.samples, "sample JSONL (repeatable)")->required();

    GradcheckOptions grad;
    auto* c_grad = app.add_subcommand("gradcheck", "finite-difference check of the full scheme");
    c_grad->add_option("--seed", grad.seed);
    c_grad->add_option("--tol", grad.tol);
    c_grad->add_option("--points", grad.num_points);
    c_grad->add_option("--referents", grad.num_referents);
    c_grad->add_option("--dim", grad.feature_dim);

    TrainToyOptions train;
    auto* c_train = app.add_subcommand("train-toy", "overfit the scheme on a synthetic room");
    c_train->add_option("--seed", train.seed);
    c_train->add_option("--steps", train.steps);
    c_train->add_option("--lr", train.learning_rate);
    c_train->add_option("--objects", train.objects);
    c_train->add_option("--trace", train.trace, "loss trace CSV");
    c_train->add_option("--checkpoint", train.checkpoint, "checkpoint path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }
    if (iou_opt->count() == 0) {
        eval.ious = {0.25, 0.5};
    }

    if (c_scenes->parsed()) {
        return cmd_scenes(scenes, out, err);
    }
    if (c_synth->parsed()) {
        return cmd_synth(synth, out, err);
    }
    if (c_eval->parsed()) {
        return cmd_eval(eval, out, err);
    }
    if (c_codec->parsed()) {
        return cmd_codec(codec, out, err);
    }
    if (c_grad->parsed()) {
        return cmd_gradcheck(grad, out, err);
    }
    return cmd_train_toy(train, out, err);
}

} // namespace spatial3d
