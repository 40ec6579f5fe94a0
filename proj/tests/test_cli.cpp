#include "doctest.h"

#include "spatial3d/cli.hpp"
#include "spatial3d/eval_metrics.hpp"
#include "spatial3d/modle_synth.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace spatial3d;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "spatial3d");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name)
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& file) const { return (path / file).string(); }
};

std::string slurp(const std::string& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("usage errors exit with 1")
{
    CHECK(run({}).code == kExitInvalid);
    CHECK(run({"frobnicate"}).code == kExitInvalid);
    CHECK(run({"scenes"}).code == kExitInvalid);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("missing input files exit with 1")
{
    const Run r = run({"eval", "--gt", "/nonexistent/gt.jsonl", "--pred", "/nonexistent/p.jsonl"});
    CHECK(r.code == kExitInvalid);
    CHECK_FALSE(r.err.empty());
    CHECK(run({"codec", "--samples", "/nonexistent/x.jsonl"}).code == kExitInvalid);
}

TEST_CASE("scenes, synth, codec and eval end to end")
{
    TempDir dir("spatial3d_cli_test");
    REQUIRE(run({"scenes", "--out", dir / "scenes.jsonl", "--count", "20", "--seed", "3"}).code == kExitOk);

    const Run synth = run({"synth", "--scenes", dir / "scenes.jsonl", "--out", dir / "ds", "--scale", "0.002",
                           "--seed", "4"});
    REQUIRE(synth.code == kExitOk);
    CHECK(synth.out.find("distance.train=342") != std::string::npos);
    CHECK(synth.out.find("movement.val=18") != std::string::npos);
    CHECK(synth.out.find("content_hash=sha256:") != std::string::npos);

    // same inputs, same bytes
    REQUIRE(run({"synth", "--scenes", dir / "scenes.jsonl", "--out", dir / "ds2", "--scale", "0.002", "--seed",
                 "4"})
                .code == kExitOk);
    CHECK(slurp(dir / "ds/train.jsonl") == slurp(dir / "ds2/train.jsonl"));
    CHECK(slurp(dir / "ds/manifest.json") == slurp(dir / "ds2/manifest.json"));

    const Run codec = run({"codec", "--samples", dir / "ds/train.jsonl", "--samples", dir / "ds/val.jsonl"});
    CHECK(codec.code == kExitOk);
    CHECK(codec.out.find("violations=0") != std::string::npos);

    // self-predictions score perfectly
    {
        std::ofstream p(dir / "pred.jsonl");
        write_predictions(p, self_predictions(read_samples_file(dir / "ds/val.jsonl")));
    }
    const Run eval = run({"eval", "--gt", dir / "ds/val.jsonl", "--pred", dir / "pred.jsonl", "--report-json",
                          dir / "report.json"});
    CHECK(eval.code == kExitOk);
    CHECK(eval.out.find("acc@0.5=1\n") != std::string::npos);
    CHECK(eval.out.find("placement_acc@0.25=1\n") != std::string::npos);
    CHECK(slurp(dir / "report.json").find("\"f1@0.5\"") != std::string::npos);

    SUBCASE("a corrupted record is a codec violation")
    {
        std::string text = slurp(dir / "ds/val.jsonl");
        const auto pos = text.find("<gap>");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 5, "<gap>1");
        std::ofstream(dir / "bad.jsonl") << text;
        const Run bad = run({"codec", "--samples", dir / "bad.jsonl"});
        CHECK(bad.code == kExitInvalid);
        CHECK(bad.out.find("violations=1") != std::string::npos);
    }
    SUBCASE("predictions for unknown samples are rejected")
    {
        std::ofstream(dir / "stray.jsonl") << "{\"sample_id\":\"nope\",\"answer_text\":\"1, 2, 3\"}\n";
        CHECK(run({"eval", "--gt", dir / "ds/val.jsonl", "--pred", dir / "stray.jsonl"}).code == kExitInvalid);
    }
    SUBCASE("unknown task names are rejected")
    {
        CHECK(run({"synth", "--scenes", dir / "scenes.jsonl", "--out", dir / "ds3", "--tasks", "juggling"}).code ==
              kExitInvalid);
    }
}

TEST_CASE("gradcheck and train-toy commands")
{
    const Run gc = run({"gradcheck", "--points", "16", "--referents", "4", "--dim", "4"});
    CHECK(gc.code == kExitOk);
    CHECK(gc.out.find(" PASS") != std::string::npos);

    TempDir dir("spatial3d_cli_train");
    const Run tr = run({"train-toy", "--steps", "3", "--trace", dir / "trace.csv", "--checkpoint", dir / "ckpt.txt"});
    CHECK(tr.code == kExitOk);
    const std::string trace = slurp(dir / "trace.csv");
    CHECK(trace.rfind("step,l_center,l_psc,total\n", 0) == 0);
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 5);
    CHECK_FALSE(slurp(dir / "ckpt.txt").empty());
    CHECK(run({"train-toy", "--lr", "-1"}).code == kExitInvalid);
}
