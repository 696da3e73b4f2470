#include "knowprobe/reports.hpp"

#include <fstream>

namespace knowprobe {

using ordered_json = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write: " + path);
    }
    return out;
}

} // namespace

ordered_json mks_to_json(const MksResult& mks) {
    ordered_json j;
    j["score"] = mks.score;
    j["per_seed"] = mks.per_seed;
    j["familiarity"] = mks.familiarity;
    j["sigma"] = mks.sigma;
    j["n_scored_tokens"] = mks.n_scored_tokens;
    j["seeds"] = mks.seeds;
    return j;
}

ordered_json alignment_to_json(const AlignmentScore& score) {
    ordered_json j;
    j["overall"] = score.overall;
    j["per_sentence"] = score.per_sentence;
    return j;
}

ordered_json outcome_to_json(const OutcomeRecord& record) {
    const ClassificationOutcome& o = record.outcome;
    ordered_json j;
    j["id"] = o.id;
    j["actual"] = label_name(record.actual);
    j["predicted"] = o.predicted ? label_name(*o.predicted) : "unclassifiable";
    if (!o.predicted) j["reason"] = o.unclassifiable_reason;
    if (o.mks) j["mks"] = mks_to_json(*o.mks);
    if (o.alignment) j["alignment"] = alignment_to_json(*o.alignment);
    j["tau_used"] = o.tau_used;
    j["theta_used"] = o.theta_used;
    return j;
}

OutcomeRecord outcome_from_json(const ordered_json& j) {
    OutcomeRecord record;
    ClassificationOutcome& o = record.outcome;
    o.id = j.at("id").get<std::string>();
    auto actual = parse_label(j.at("actual").get<std::string>());
    if (!actual) {
        throw Error(ErrorCode::ParseError, "outcome record: invalid actual label");
    }
    record.actual = *actual;
    std::string predicted = j.at("predicted").get<std::string>();
    if (predicted != "unclassifiable") {
        auto label = parse_label(predicted);
        if (!label) {
            throw Error(ErrorCode::ParseError, "outcome record: invalid predicted label");
        }
        o.predicted = *label;
    } else if (j.contains("reason")) {
        o.unclassifiable_reason = j["reason"].get<std::string>();
    }
    if (j.contains("mks")) {
        MksResult mks;
        mks.score = j["mks"].at("score").get<double>();
        mks.per_seed = j["mks"].at("per_seed").get<std::vector<double>>();
        mks.familiarity = j["mks"].at("familiarity").get<double>();
        mks.sigma = j["mks"].at("sigma").get<double>();
        mks.n_scored_tokens = j["mks"].at("n_scored_tokens").get<size_t>();
        mks.seeds = j["mks"].at("seeds").get<std::vector<uint64_t>>();
        o.mks = std::move(mks);
    }
    if (j.contains("alignment")) {
        AlignmentScore score;
        score.overall = j["alignment"].at("overall").get<double>();
        score.per_sentence = j["alignment"].at("per_sentence").get<std::vector<double>>();
        o.alignment = std::move(score);
    }
    o.tau_used = j.value("tau_used", 0.0);
    o.theta_used = j.value("theta_used", 0.0);
    return record;
}

void write_outcomes(const std::string& path,
                    const std::vector<OutcomeRecord>& records,
                    const RunConfig& config) {
    auto out = open_out(path);
    ordered_json header;
    header["schema"] = 1;
    header["kind"] = "outcomes";
    header["config"] = run_config_to_json(config);
    out << header.dump() << "\n";
    for (const auto& record : records) {
        out << outcome_to_json(record).dump() << "\n";
    }
}

std::vector<OutcomeRecord> read_outcomes(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open outcomes: " + path);
    }
    std::vector<OutcomeRecord> records;
    std::string line;
    size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ParseError,
                        path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!have_header) {
            if (!j.contains("kind") || j["kind"] != "outcomes") {
                throw Error(ErrorCode::ParseError, path + ": missing outcomes header");
            }
            have_header = true;
            continue;
        }
        records.push_back(outcome_from_json(j));
    }
    return records;
}

void write_calibration_report(const std::string& path,
                              const CalibrationResult& calibration,
                              double theta,
                              const RunConfig& config) {
    auto out = open_out(path);
    ordered_json j;
    j["tau"] = calibration.tau;
    j["theta"] = theta;
    j["ks_statistic"] = calibration.ks_statistic;
    j["p_value"] = calibration.p_value;
    j["n_fabricated"] = calibration.n_fabricated;
    j["n_other"] = calibration.n_other;
    j["small_sample"] = calibration.small_sample;
    j["summary"] = calibration_summary(calibration);
    j["config"] = run_config_to_json(config);
    out << j.dump(2) << "\n";
}

void write_thresholds(const std::string& path, const Thresholds& thresholds) {
    auto out = open_out(path);
    ordered_json j;
    j["tau"] = thresholds.tau;
    j["theta"] = thresholds.theta;
    out << j.dump(2) << "\n";
}

Thresholds read_thresholds(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open thresholds: " + path);
    }
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    Thresholds t;
    t.tau = j.at("tau").get<double>();
    t.theta = j.at("theta").get<double>();
    return t;
}

void write_ecdf_csv(const std::string& path, const Ecdf& ecdf) {
    auto out = open_out(path);
    out << "x,F\n";
    const auto& values = ecdf.sorted_values();
    for (size_t i = 0; i < values.size(); ++i) {
        // skip duplicates; the step height at the last duplicate is final
        if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
        out << values[i] << "," << double(i + 1) / double(values.size()) << "\n";
    }
}

ordered_json evaluation_to_json(const EvaluationSummary& summary, const RunConfig& config) {
    static const char* kLabels[3] = {"aligned", "misaligned", "fabricated"};
    ordered_json j;
    ordered_json counts;
    ordered_json percentages;
    for (size_t pred = 0; pred < 3; ++pred) {
        ordered_json row_counts;
        ordered_json row_pct;
        for (size_t actual = 0; actual < 3; ++actual) {
            row_counts[kLabels[actual]] = summary.matrix.counts[pred][actual];
            row_pct[kLabels[actual]] = summary.matrix.column_percentages[pred][actual];
        }
        counts[kLabels[pred]] = row_counts;
        percentages[kLabels[pred]] = row_pct;
    }
    j["confusion_counts"] = counts;
    j["confusion_percentages"] = percentages;
    ordered_json unclassified;
    for (size_t actual = 0; actual < 3; ++actual) {
        unclassified[kLabels[actual]] = summary.matrix.unclassified[actual];
    }
    j["unclassified"] = unclassified;
    j["class_accuracy"] = {{"aligned", summary.class_accuracy[0]},
                           {"misaligned", summary.class_accuracy[1]},
                           {"fabricated", summary.class_accuracy[2]}};
    j["overall_accuracy"] = summary.overall_accuracy;
    j["n_examples"] = summary.n_examples;
    j["n_unclassified"] = summary.n_unclassified;
    j["config"] = run_config_to_json(config);
    return j;
}

void write_evaluation_report(const std::string& path,
                             const EvaluationSummary& summary,
                             const RunConfig& config) {
    auto out = open_out(path);
    out << evaluation_to_json(summary, config).dump(2) << "\n";
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& matrix) {
    static const char* kLabels[3] = {"aligned", "misaligned", "fabricated"};
    auto out = open_out(path);
    out << "predicted,actual_aligned,actual_misaligned,actual_fabricated\n";
    for (size_t pred = 0; pred < 3; ++pred) {
        out << kLabels[pred];
        for (size_t actual = 0; actual < 3; ++actual) {
            out << "," << matrix.column_percentages[pred][actual];
        }
        out << "\n";
    }
}

} // namespace knowprobe
