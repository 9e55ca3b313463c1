#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace spamnet {

// Confusion counts plus derived ratios; spam (label 1) is the positive class.
// A ratio whose denominator is zero stays unset rather than being coerced to
// 0 or 1 — degenerate splits must not masquerade as real scores.
struct EvalReport {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::optional<double> accuracy, precision, recall, f1;
    float threshold = 0.5f;
    std::string dataset;
    std::string model;

    std::size_t total() const { return tp + fp + fn + tn; }
};

// Tallies predicted vs true {0,1} labels. threshold/dataset/model are left to
// the caller. Throws on length mismatch or a label outside {0,1}.
EvalReport evaluate(const std::vector<int>& predicted,
                    const std::vector<int>& truth);

// Line-oriented record: fixed key order (model, dataset, threshold, tp, fp,
// fn, tn, accuracy, precision, recall, f1), counts exact, ratios at 4 decimal
// places, undefined ratios as "null". serialize(parse(s)) == s.
std::string report_serialize(const EvalReport& r);
EvalReport report_parse(const std::string& text);

// splits a concatenation of records (11 lines each) and parses each in turn
std::vector<EvalReport> report_parse_many(const std::string& text);

// aligned two-row table for terminal output; rows stack when chained
std::string report_table(const std::vector<EvalReport>& reports);

}  // namespace spamnet
