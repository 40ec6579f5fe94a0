#pragma once

// Batch commands. Exit status: 0 success, 1 validation failure (bad input,
// failed check), 2 internal error. Diagnostics go to `err`.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace spatial3d {

inline constexpr std::uint64_t kDefaultSeed = 20240;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitInternal = 2;

struct ScenesOptions {
    std::string out;
    std::size_t count = 50;
    std::uint64_t seed = kDefaultSeed;
};

struct SynthOptions {
    std::string scenes;
    std::string out;  // directory
    std::uint64_t seed = kDefaultSeed;
    double scale = 0.01;
    std::vector<std::string> tasks{"distance", "movement", "placement"};
    double val_fraction = 0.2;
};

struct EvalOptions {
    std::vector<std::string> gt;  // sample files, concatenated
    std::string pred;
    std::vector<double> ious{0.25, 0.5};
    std::string report;       // key=value text; stdout when empty
    std::string report_json;  // optional
};

struct CodecOptions {
    std::vector<std::string> samples;
};

struct GradcheckOptions {
    std::uint64_t seed = kDefaultSeed;
    double tol = 1e-4;
    std::size_t num_points = 32;
    std::size_t num_referents = 8;
    std::size_t feature_dim = 16;
};

struct TrainToyOptions {
    std::uint64_t seed = kDefaultSeed;
    std::size_t steps = 500;
    double learning_rate = 1e-2;
    std::size_t objects = 5;
    std::string trace;       // CSV, optional
    std::string checkpoint;  // optional
};

int cmd_scenes(const ScenesOptions& o, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err);
int cmd_codec(const CodecOptions& o, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const GradcheckOptions& o, std::ostream& out, std::ostream& err);
int cmd_train_toy(const TrainToyOptions& o, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to one of the commands above.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace spatial3d
