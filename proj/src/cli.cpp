#include "spamnet/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "spamnet/baselines.hpp"
#include "spamnet/data.hpp"
#include "spamnet/metrics.hpp"
#include "spamnet/model.hpp"

namespace spamnet {

namespace {

constexpr std::size_t kPredictChunk = 32;
constexpr std::size_t kSampleFloats = 3 * 56 * 56;

// fixed knobs for the HOG + linear half; the histogram knobs are flags
constexpr std::size_t kHogEpochs = 60;
constexpr float kHogLr = 0.02f;
constexpr float kHogReg = 0.001f;

std::string hex16(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string prob4(float p) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.4f", static_cast<double>(p));
    return buf;
}

std::vector<int> true_labels(const std::vector<LabeledImage>& samples) {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const LabeledImage& s : samples) out.push_back(s.label);
    return out;
}

std::vector<int> cnn_labels(SpamNet& net, const std::vector<LabeledImage>& samples,
                            float threshold) {
    std::vector<int> labels;
    labels.reserve(samples.size());
    for (std::size_t at = 0; at < samples.size(); at += kPredictChunk) {
        const std::size_t n = std::min(kPredictChunk, samples.size() - at);
        Tensor batch({n, 3, 56, 56});
        for (std::size_t i = 0; i < n; ++i)
            std::memcpy(batch.data() + i * kSampleFloats,
                        samples[at + i].pixels.data(), kSampleFloats * sizeof(float));
        Prediction p = predict(net, batch, threshold);
        labels.insert(labels.end(), p.labels.begin(), p.labels.end());
    }
    return labels;
}

void write_report_file(const std::string& path, const std::string& text) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report to " + path);
    out << text;
    if (!out) throw std::runtime_error("short write to " + path);
}

EvalReport score_cnn(SpamNet& net, const std::vector<LabeledImage>& samples,
                     const RunConfig& config, const std::string& dataset) {
    EvalReport r = evaluate(cnn_labels(net, samples, config.threshold),
                            true_labels(samples));
    r.threshold = config.threshold;
    r.model = "cnn";
    r.dataset = dataset;
    return r;
}

struct SplitPair {
    Dataset train, test;
};

SplitPair load_and_split(const RunConfig& config, std::ostream& out) {
    Dataset all = load_directory(config.corpus_root);
    auto [train, test] = stratified_split(all, config.train_frac, config.seed);
    out << "corpus " << config.corpus_root << ": " << all.samples.size()
        << " samples (" << all.count_label(1) << " spam, " << all.count_label(0)
        << " ham), " << all.skipped_files << " skipped\n";
    out << "split-membership " << hex16(split_membership_hash(test)) << "\n";
    return {std::move(train), std::move(test)};
}

}  // namespace

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        SplitPair split = load_and_split(config, out);

        Rng rng(config.seed);
        SpamNet net(rng, config.dropout);
        AdamState adam;
        TrainConfig tc;
        tc.batch_size = config.batch_size;
        tc.epochs = config.epochs;
        tc.dropout_rate = config.dropout;
        tc.seed = config.seed;
        tc.checkpoint_every = config.checkpoint_every;
        tc.checkpoint_path = config.checkpoint_path;
        tc.threshold = config.threshold;

        const std::vector<TrainLogEntry> log = fit(net, split.train, tc, adam);
        for (const TrainLogEntry& e : log)
            out << "epoch " << e.epoch << "/" << config.epochs << " loss "
                << prob4(e.loss) << " acc " << prob4(e.accuracy) << "\n";

        save_checkpoint(net, &adam, config.epochs, config.seed,
                        config.checkpoint_path);
        out << "checkpoint " << config.checkpoint_path << "\n";

        EvalReport report = score_cnn(net, split.test.samples, config, "test");
        write_report_file(config.report_path, report_serialize(report));
        out << report_table({report});
        return 0;
    } catch (const std::exception& e) {
        err << "train: " << e.what() << "\n";
        return 1;
    }
}

int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        LoadedCheckpoint ck = load_checkpoint(config.checkpoint_path);
        Dataset all = load_directory(config.corpus_root);
        out << "corpus " << config.corpus_root << ": " << all.samples.size()
            << " samples (" << all.count_label(1) << " spam, "
            << all.count_label(0) << " ham), " << all.skipped_files
            << " skipped\n";

        const std::vector<LabeledImage>* samples;
        std::string tag;
        Dataset held_out;
        if (all.count_label(0) == 0 || all.count_label(1) == 0) {
            // a one-class corpus has no stratified held-out split; score all
            // of it and let the report carry the undefined ratios
            out << "split-membership " << hex16(split_membership_hash(all))
                << "\n";
            samples = &all.samples;
            tag = "all";
        } else {
            auto [train, test] =
                stratified_split(all, config.train_frac, config.seed);
            out << "split-membership " << hex16(split_membership_hash(test))
                << "\n";
            if (config.full_corpus) {
                samples = &all.samples;
                tag = "all";
            } else {
                held_out = std::move(test);
                samples = &held_out.samples;
                tag = "test";
            }
        }
        EvalReport report = score_cnn(ck.net, *samples, config, tag);
        write_report_file(config.report_path, report_serialize(report));
        out << report_table({report});
        return 0;
    } catch (const std::exception& e) {
        err << "evaluate: " << e.what() << "\n";
        return 1;
    }
}

int cmd_predict(const RunConfig& config, const std::vector<std::string>& images,
                std::ostream& out, std::ostream& err) {
    std::optional<LoadedCheckpoint> ck;
    try {
        ck = load_checkpoint(config.checkpoint_path);
    } catch (const std::exception& e) {
        err << "predict: " << e.what() << "\n";
        return 1;
    }

    std::size_t failed = 0;
    for (const std::string& path : images) {
        try {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw std::runtime_error("cannot open file");
            std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                            std::istreambuf_iterator<char>());
            Tensor pixels = normalize(resize_bilinear(decode_image_auto(bytes)));
            Tensor batch = reshape(pixels, {1, 3, 56, 56});
            Prediction p = predict(ck->net, batch, config.threshold);
            out << path << " " << prob4(p.probs[0]) << " "
                << (p.labels[0] == 1 ? "spam" : "ham") << "\n";
        } catch (const std::exception& e) {
            err << path << ": " << e.what() << "\n";
            ++failed;
        }
    }
    return (failed == images.size() && !images.empty()) ? 1 : 0;
}

int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        if (config.synth_spam == 0 || config.synth_ham == 0)
            throw std::invalid_argument("need at least one image per class");
        SynthStats stats = generate_synthetic_corpus(
            config.synth_spam, config.synth_ham, config.seed, config.corpus_root);
        out << "wrote " << stats.spam_written << " spam and " << stats.ham_written
            << " ham images\n";
        out << "manifest " << stats.manifest_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "synth: " << e.what() << "\n";
        return 1;
    }
}

int cmd_baseline(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        SplitPair split = load_and_split(config, out);
        const std::vector<LabeledImage>& test = split.test.samples;
        std::vector<EvalReport> reports;

        if (config.baseline != BaselineKind::hog) {
            std::vector<int> pred;
            pred.reserve(test.size());
            for (const LabeledImage& s : test)
                pred.push_back(histogram_label(s.pixels, config.top_k, config.tau));
            EvalReport r = evaluate(pred, true_labels(test));
            r.threshold = config.tau;
            r.model = "histogram";
            r.dataset = "test";
            reports.push_back(r);
        }

        if (config.baseline != BaselineKind::histogram) {
            std::vector<std::vector<float>> feats;
            std::vector<int> pm_labels;
            for (const LabeledImage& s : split.train.samples) {
                feats.push_back(hog_features(s.pixels).values);
                pm_labels.push_back(s.label == 1 ? 1 : -1);
            }
            LinearClassifier clf = train_linear(feats, pm_labels, kHogEpochs,
                                                kHogLr, kHogReg, config.seed);
            std::vector<int> pred;
            pred.reserve(test.size());
            for (const LabeledImage& s : test)
                pred.push_back(clf.decide(hog_features(s.pixels).values) == 1 ? 1 : 0);
            EvalReport r = evaluate(pred, true_labels(test));
            r.threshold = 0.0f;  // decision boundary of the linear score
            r.model = "hog+linear";
            r.dataset = "test";
            reports.push_back(r);
        }

        std::string serialized;
        for (const EvalReport& r : reports) serialized += report_serialize(r);
        write_report_file(config.report_path, serialized);
        out << report_table(reports);
        return 0;
    } catch (const std::exception& e) {
        err << "baseline: " << e.what() << "\n";
        return 1;
    }
}

int run_command(const RunConfig& config, const std::vector<std::string>& images,
                std::ostream& out, std::ostream& err) {
    switch (config.command) {
        case Command::train:
            return cmd_train(config, out, err);
        case Command::evaluate:
            return cmd_evaluate(config, out, err);
        case Command::predict:
            return cmd_predict(config, images, out, err);
        case Command::synth:
            return cmd_synth(config, out, err);
        case Command::baseline:
            return cmd_baseline(config, out, err);
    }
    err << "unknown command\n";
    return 2;
}

}  // namespace spamnet
