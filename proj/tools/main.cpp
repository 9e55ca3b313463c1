#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "spamnet/cli.hpp"

using namespace spamnet;

int main(int argc, char** argv) {
    RunConfig cfg;
    std::vector<std::string> images;

    CLI::App app{"image spam detector: train/evaluate a small CNN or classical "
                 "baselines on a spam//ham corpus"};
    app.require_subcommand(1);

    auto seed_opt = [&](CLI::App* sc) {
        sc->add_option("--seed", cfg.seed,
                       "seed driving the split, weight init and shuffles")
            ->envname("SPAMNET_SEED")
            ->capture_default_str();
    };
    auto corpus_opt = [&](CLI::App* sc) {
        sc->add_option("--corpus", cfg.corpus_root,
                       "corpus root holding spam/ and ham/ subdirectories")
            ->required();
    };
    auto split_opt = [&](CLI::App* sc) {
        sc->add_option("--train-frac", cfg.train_frac,
                       "fraction of each class assigned to the training split")
            ->capture_default_str();
    };
    auto report_opt = [&](CLI::App* sc) {
        sc->add_option("--report", cfg.report_path,
                       "also write the evaluation record(s) to this file");
    };
    auto threshold_opt = [&](CLI::App* sc) {
        sc->add_option("--threshold", cfg.threshold,
                       "probability cutoff; spam iff p >= threshold")
            ->capture_default_str();
    };
    auto checkpoint_opt = [&](CLI::App* sc) {
        sc->add_option("--checkpoint", cfg.checkpoint_path, "checkpoint file")
            ->capture_default_str();
    };

    CLI::App* train = app.add_subcommand("train", "fit the CNN and score the held-out split");
    corpus_opt(train);
    checkpoint_opt(train);
    seed_opt(train);
    split_opt(train);
    report_opt(train);
    threshold_opt(train);
    train->add_option("--epochs", cfg.epochs, "training epochs")->capture_default_str();
    train->add_option("--batch-size", cfg.batch_size, "minibatch size")
        ->capture_default_str();
    train->add_option("--dropout", cfg.dropout, "dropout rate for all three layers")
        ->capture_default_str();
    train->add_option("--checkpoint-every", cfg.checkpoint_every,
                      "also save every N epochs (0 = only at the end)")
        ->capture_default_str();

    CLI::App* evaluate =
        app.add_subcommand("evaluate", "score a checkpoint on the held-out split");
    corpus_opt(evaluate);
    checkpoint_opt(evaluate);
    seed_opt(evaluate);
    split_opt(evaluate);
    report_opt(evaluate);
    threshold_opt(evaluate);
    evaluate->add_flag("--full", cfg.full_corpus,
                       "score the whole corpus instead of the held-out split");

    CLI::App* predict =
        app.add_subcommand("predict", "classify individual image files");
    checkpoint_opt(predict);
    threshold_opt(predict);
    predict->add_option("images", images, "image files (png/jpeg/ppm/pgm)")
        ->required();

    CLI::App* synth =
        app.add_subcommand("synth", "generate a deterministic synthetic corpus");
    corpus_opt(synth);
    seed_opt(synth);
    synth->add_option("--spam", cfg.synth_spam, "spam images to generate")
        ->capture_default_str();
    synth->add_option("--ham", cfg.synth_ham, "ham images to generate")
        ->capture_default_str();

    CLI::App* baseline = app.add_subcommand(
        "baseline", "run the classical detectors over the same split");
    corpus_opt(baseline);
    seed_opt(baseline);
    split_opt(baseline);
    report_opt(baseline);
    const std::map<std::string, BaselineKind> kinds{
        {"all", BaselineKind::all},
        {"histogram", BaselineKind::histogram},
        {"hog", BaselineKind::hog}};
    baseline->add_option("--which", cfg.baseline, "which baseline(s) to run")
        ->transform(CLI::CheckedTransformer(kinds, CLI::ignore_case))
        ->capture_default_str();
    baseline->add_option("--top-k", cfg.top_k, "histogram bins counted as peaks")
        ->capture_default_str();
    baseline->add_option("--tau", cfg.tau, "peak-mass cutoff for the histogram rule")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (app.got_subcommand(train))
        cfg.command = Command::train;
    else if (app.got_subcommand(evaluate))
        cfg.command = Command::evaluate;
    else if (app.got_subcommand(predict))
        cfg.command = Command::predict;
    else if (app.got_subcommand(synth))
        cfg.command = Command::synth;
    else
        cfg.command = Command::baseline;

    return run_command(cfg, images, std::cout, std::cerr);
}
