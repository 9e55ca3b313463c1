#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace spamnet {

enum class Command { train, evaluate, predict, synth, baseline };
enum class BaselineKind { all, histogram, hog };

// One flat bag of knobs for every subcommand; each command reads the slice it
// cares about and ignores the rest.
struct RunConfig {
    Command command = Command::train;
    std::string corpus_root;
    std::string checkpoint_path = "spamnet.ckpt";
    std::string report_path;  // empty: report printed but not written

    std::uint64_t seed = 42;
    std::size_t epochs = 1000;
    std::size_t batch_size = 32;
    float dropout = 0.25f;
    float threshold = 0.5f;
    float train_frac = 0.8f;
    std::size_t checkpoint_every = 0;

    std::size_t synth_spam = 200;  // synth
    std::size_t synth_ham = 200;

    BaselineKind baseline = BaselineKind::all;  // baseline
    std::size_t top_k = 8;
    float tau = 0.6f;

    bool full_corpus = false;  // evaluate: score everything, not the held-out 20%
};

// Each command returns its process exit status and writes human-readable
// progress to `out` and diagnostics to `err`.
int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_predict(const RunConfig& config, const std::vector<std::string>& images,
                std::ostream& out, std::ostream& err);
int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_baseline(const RunConfig& config, std::ostream& out, std::ostream& err);

int run_command(const RunConfig& config, const std::vector<std::string>& images,
                std::ostream& out, std::ostream& err);

}  // namespace spamnet
