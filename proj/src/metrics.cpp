#include "spamnet/metrics.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace spamnet {

EvalReport evaluate(const std::vector<int>& predicted,
                    const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("evaluate: " + std::to_string(predicted.size()) +
                                    " predictions vs " + std::to_string(truth.size()) +
                                    " labels");
    EvalReport r;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const int p = predicted[i], t = truth[i];
        if ((p != 0 && p != 1) || (t != 0 && t != 1))
            throw std::invalid_argument("evaluate: labels must be 0 or 1");
        if (p == 1 && t == 1)
            ++r.tp;
        else if (p == 1 && t == 0)
            ++r.fp;
        else if (p == 0 && t == 1)
            ++r.fn;
        else
            ++r.tn;
    }
    if (r.total() > 0)
        r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(r.total());
    if (r.tp + r.fp > 0)
        r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
    if (r.tp + r.fn > 0)
        r.recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
    if (r.precision && r.recall && *r.precision + *r.recall > 0.0)
        r.f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
    return r;
}

namespace {

std::string ratio4(const std::optional<double>& v) {
    if (!v) return "null";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *v);
    return buf;
}

const char* const kKeys[11] = {"model",    "dataset", "threshold", "tp",
                               "fp",       "fn",      "tn",        "accuracy",
                               "precision", "recall",  "f1"};

}  // namespace

std::string report_serialize(const EvalReport& r) {
    char thr[32];
    std::snprintf(thr, sizeof(thr), "%.4f", static_cast<double>(r.threshold));
    std::string out;
    out += "model " + r.model + "\n";
    out += "dataset " + r.dataset + "\n";
    out += std::string("threshold ") + thr + "\n";
    out += "tp " + std::to_string(r.tp) + "\n";
    out += "fp " + std::to_string(r.fp) + "\n";
    out += "fn " + std::to_string(r.fn) + "\n";
    out += "tn " + std::to_string(r.tn) + "\n";
    out += "accuracy " + ratio4(r.accuracy) + "\n";
    out += "precision " + ratio4(r.precision) + "\n";
    out += "recall " + ratio4(r.recall) + "\n";
    out += "f1 " + ratio4(r.f1) + "\n";
    return out;
}

EvalReport report_parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> values;
    std::size_t key_idx = 0;
    while (std::getline(in, line)) {
        if (key_idx >= 11)
            throw std::invalid_argument("report has trailing lines");
        const std::string& key = kKeys[key_idx];
        if (line.size() < key.size() + 1 || line.compare(0, key.size(), key) != 0 ||
            line[key.size()] != ' ')
            throw std::invalid_argument("expected key '" + key + "', got line '" +
                                        line + "'");
        values.push_back(line.substr(key.size() + 1));
        ++key_idx;
    }
    if (key_idx != 11) throw std::invalid_argument("report record is incomplete");

    auto count_of = [](const std::string& s) -> std::size_t {
        if (s.empty()) throw std::invalid_argument("empty count");
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("bad count '" + s + "'");
        return static_cast<std::size_t>(v);
    };
    auto ratio_of = [](const std::string& s) -> std::optional<double> {
        if (s == "null") return std::nullopt;
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("bad ratio '" + s + "'");
        return v;
    };

    EvalReport r;
    r.model = values[0];
    r.dataset = values[1];
    {
        std::size_t pos = 0;
        r.threshold = std::stof(values[2], &pos);
        if (pos != values[2].size())
            throw std::invalid_argument("bad threshold '" + values[2] + "'");
    }
    r.tp = count_of(values[3]);
    r.fp = count_of(values[4]);
    r.fn = count_of(values[5]);
    r.tn = count_of(values[6]);
    r.accuracy = ratio_of(values[7]);
    r.precision = ratio_of(values[8]);
    r.recall = ratio_of(values[9]);
    r.f1 = ratio_of(values[10]);
    return r;
}

std::vector<EvalReport> report_parse_many(const std::string& text) {
    std::istringstream in(text);
    std::string line, chunk;
    std::vector<EvalReport> out;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        chunk += line + "\n";
        if (++lines == 11) {
            out.push_back(report_parse(chunk));
            chunk.clear();
            lines = 0;
        }
    }
    if (lines != 0) throw std::invalid_argument("report stream ends mid-record");
    return out;
}

std::string report_table(const std::vector<EvalReport>& reports) {
    const char* const header[9] = {"model",  "dataset",   "accuracy", "precision",
                                   "recall", "f1",        "tp/fp",    "fn/tn",
                                   "thresh"};
    std::vector<std::array<std::string, 9>> rows;
    for (const EvalReport& r : reports) {
        char thr[32];
        std::snprintf(thr, sizeof(thr), "%.2f", static_cast<double>(r.threshold));
        rows.push_back({r.model, r.dataset, ratio4(r.accuracy), ratio4(r.precision),
                        ratio4(r.recall), ratio4(r.f1),
                        std::to_string(r.tp) + "/" + std::to_string(r.fp),
                        std::to_string(r.fn) + "/" + std::to_string(r.tn), thr});
    }
    std::size_t width[9];
    for (int c = 0; c < 9; ++c) {
        width[c] = std::string(header[c]).size();
        for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
    }
    std::string out;
    auto emit = [&](const auto& cells) {
        for (int c = 0; c < 9; ++c) {
            out += cells[c];
            if (c < 8) out.append(width[c] - std::string(cells[c]).size() + 2, ' ');
        }
        out += "\n";
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    return out;
}

}  // namespace spamnet
