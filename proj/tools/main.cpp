#include <filesystem>
#include <fstream>
#include <map>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "knowprobe/calibration.hpp"
#include "knowprobe/config.hpp"
#include "knowprobe/dataset.hpp"
#include "knowprobe/reports.hpp"
#include "knowprobe/toy_lm.hpp"

namespace fs = std::filesystem;
using knowprobe::Error;
using knowprobe::ErrorCode;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
    std::string config_path;
};

knowprobe::RunConfig load_config(const CommonOptions& common) {
    return knowprobe::load_run_config(common.config_path);
}

int run_fixture(const CommonOptions&, uint64_t seed, const std::string& out_path) {
    auto examples = knowprobe::generate_synthetic_fixture(seed);
    knowprobe::save_dataset(out_path, examples);
    std::cout << "wrote " << examples.size() << " examples to " << out_path << "\n";
    return 0;
}

int run_calibrate(const CommonOptions& common,
                  const std::string& dataset_path,
                  const std::string& split,
                  const std::string& out_dir) {
    knowprobe::RunConfig config = load_config(common);
    auto adapter = knowprobe::make_adapter(config.model);
    auto tagger = knowprobe::make_tagger(config.tagger);

    auto dataset = knowprobe::filter_split(knowprobe::load_dataset(dataset_path), split);
    if (dataset.empty()) {
        throw Error(ErrorCode::InvalidArgument,
                    "no examples in split '" + split + "' of " + dataset_path);
    }

    std::vector<double> fabricated_scores;
    std::vector<double> other_scores;
    struct Stage2Input {
        knowprobe::TokenizedPair pair;
        double mks = 0.0;
        bool aligned = false;
    };
    std::vector<Stage2Input> stage2;
    size_t skipped = 0;

    for (const auto& example : dataset) {
        try {
            auto pair = knowprobe::make_tokenized_pair(*adapter, example.prompt, example.text);
            auto attention = adapter->attention_received(pair);
            auto chunks = knowprobe::extract_noun_chunks(example.prompt, *tagger);
            auto subject = knowprobe::select_subject(pair, chunks, attention);
            auto mks = knowprobe::model_knowledge_score(pair, subject, *adapter, *tagger,
                                                        config.probe);
            if (example.label == knowprobe::ReasoningLabel::Fabricated) {
                fabricated_scores.push_back(mks.score);
            } else {
                other_scores.push_back(mks.score);
                stage2.push_back({std::move(pair), mks.score,
                                  example.label == knowprobe::ReasoningLabel::Aligned});
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NoSubjectCandidate ||
                e.code() == ErrorCode::NoScorableTokens ||
                e.code() == ErrorCode::SubjectNotLocated) {
                ++skipped;
                continue;
            }
            throw;
        }
    }
    if (skipped > 0) {
        std::cerr << "warning: skipped " << skipped << " unclassifiable validation examples\n";
    }

    auto calibration = knowprobe::ks_threshold(fabricated_scores, other_scores);

    // Theta is calibrated on the examples stage 2 would actually see:
    // aligned/misaligned validation pairs that pass the knowledge test.
    std::vector<double> aligned_scores;
    std::vector<double> misaligned_scores;
    for (const auto& input : stage2) {
        if (input.mks < calibration.tau) continue;
        auto score = knowprobe::alignment_score(input.pair, *adapter, config.alignment);
        (input.aligned ? aligned_scores : misaligned_scores).push_back(score.overall);
    }
    double theta = knowprobe::calibrate_alignment_threshold(aligned_scores, misaligned_scores);

    fs::create_directories(out_dir);
    knowprobe::RunConfig echoed = config;
    echoed.thresholds = {calibration.tau, theta};
    echoed.has_thresholds = true;
    knowprobe::write_calibration_report((fs::path(out_dir) / "calibration.json").string(),
                                        calibration, theta, echoed);
    knowprobe::write_thresholds((fs::path(out_dir) / "thresholds.json").string(),
                                {calibration.tau, theta});
    knowprobe::write_ecdf_csv((fs::path(out_dir) / "ecdf_fabricated.csv").string(),
                              knowprobe::Ecdf(fabricated_scores));
    knowprobe::write_ecdf_csv((fs::path(out_dir) / "ecdf_other.csv").string(),
                              knowprobe::Ecdf(other_scores));

    std::cout << "KS statistic " << knowprobe::calibration_summary(calibration)
              << " (p-value " << calibration.p_value << ")\n";
    std::cout << "theta " << theta << "\n";
    std::cout << "thresholds written to " << (fs::path(out_dir) / "thresholds.json").string()
              << "\n";
    return 0;
}

int run_classify(const CommonOptions& common,
                 const std::string& dataset_path,
                 const std::string& split,
                 const std::string& thresholds_path,
                 const std::string& out_path) {
    knowprobe::RunConfig config = load_config(common);
    auto adapter = knowprobe::make_adapter(config.model);
    auto tagger = knowprobe::make_tagger(config.tagger);
    knowprobe::Thresholds thresholds = knowprobe::read_thresholds(thresholds_path);

    auto dataset = knowprobe::filter_split(knowprobe::load_dataset(dataset_path), split);
    if (dataset.empty()) {
        throw Error(ErrorCode::InvalidArgument,
                    "no examples in split '" + split + "' of " + dataset_path);
    }

    std::vector<knowprobe::OutcomeRecord> records;
    records.reserve(dataset.size());
    for (const auto& example : dataset) {
        auto outcome = knowprobe::classify(example, *adapter, *tagger, thresholds,
                                           config.probe, config.alignment);
        records.push_back({std::move(outcome), example.label});
    }

    knowprobe::RunConfig echoed = config;
    echoed.thresholds = thresholds;
    echoed.has_thresholds = true;
    knowprobe::write_outcomes(out_path, records, echoed);
    std::cout << "classified " << records.size() << " examples -> " << out_path << "\n";
    return 0;
}

int run_evaluate(const CommonOptions& common,
                 const std::string& outcomes_path,
                 const std::string& dataset_path,
                 const std::string& split,
                 const std::string& out_dir) {
    knowprobe::RunConfig config = load_config(common);
    auto records = knowprobe::read_outcomes(outcomes_path);
    if (records.empty()) {
        throw Error(ErrorCode::InvalidArgument, "no outcome records in " + outcomes_path);
    }

    std::vector<knowprobe::LabeledExample> dataset;
    if (!dataset_path.empty()) {
        dataset = knowprobe::filter_split(knowprobe::load_dataset(dataset_path), split);
    } else {
        // outcomes carry their actual labels; reconstruct the minimal dataset
        for (const auto& record : records) {
            knowprobe::LabeledExample ex;
            ex.id = record.outcome.id;
            ex.label = record.actual;
            dataset.push_back(std::move(ex));
        }
    }
    std::vector<knowprobe::ClassificationOutcome> outcomes;
    outcomes.reserve(records.size());
    for (const auto& record : records) outcomes.push_back(record.outcome);

    if (!dataset_path.empty()) {
        // cross-check labels between dataset and outcome records
        std::map<std::string, knowprobe::ReasoningLabel> actual_by_id;
        for (const auto& record : records) actual_by_id[record.outcome.id] = record.actual;
        for (const auto& example : dataset) {
            auto it = actual_by_id.find(example.id);
            if (it != actual_by_id.end() && it->second != example.label) {
                throw Error(ErrorCode::InvalidArgument,
                            "label mismatch for id '" + example.id + "'");
            }
        }
    }

    auto summary = knowprobe::evaluate(dataset, outcomes);

    fs::create_directories(out_dir);
    knowprobe::write_evaluation_report((fs::path(out_dir) / "evaluation.json").string(),
                                       summary, config);
    knowprobe::write_confusion_csv((fs::path(out_dir) / "confusion_matrix.csv").string(),
                                   summary.matrix);

    static const char* kLabels[3] = {"aligned", "misaligned", "fabricated"};
    std::cout << "confusion matrix (% per actual class):\n";
    for (size_t pred = 0; pred < 3; ++pred) {
        std::cout << "  predicted " << kLabels[pred] << ":";
        for (size_t actual = 0; actual < 3; ++actual) {
            std::cout << " " << summary.matrix.column_percentages[pred][actual];
        }
        std::cout << "\n";
    }
    std::cout << "class accuracy (binary collapse): aligned " << summary.class_accuracy[0]
              << " misaligned " << summary.class_accuracy[1] << " fabricated "
              << summary.class_accuracy[2] << "\n";
    std::cout << "overall " << summary.overall_accuracy << "\n";
    return 0;
}

int run_report(const std::string& in_path, const std::string& format) {
    std::ifstream in(in_path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open report: " + in_path);
    }
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, in_path + ": " + e.what());
    }

    if (format == "json") {
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    // csv
    if (j.contains("ks_statistic")) {
        std::cout << "tau,theta,ks_statistic,p_value\n";
        std::cout << j["tau"].get<double>() << "," << j.value("theta", 0.0) << ","
                  << j["ks_statistic"].get<double>() << "," << j["p_value"].get<double>()
                  << "\n";
        return 0;
    }
    if (j.contains("confusion_percentages")) {
        static const char* kLabels[3] = {"aligned", "misaligned", "fabricated"};
        std::cout << "predicted,actual_aligned,actual_misaligned,actual_fabricated\n";
        for (const char* pred : kLabels) {
            std::cout << pred;
            for (const char* actual : kLabels) {
                std::cout << "," << j["confusion_percentages"][pred][actual].get<double>();
            }
            std::cout << "\n";
        }
        return 0;
    }
    throw Error(ErrorCode::ParseError, in_path + ": unrecognized report file");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-stage knowledge-probe workflow for classifying generated text"};
    app.require_subcommand(1);

    CommonOptions common;
    app.add_option("--config", common.config_path, "JSON run config (defaults when omitted)");

    auto* fixture = app.add_subcommand("fixture", "generate the synthetic toy dataset");
    uint64_t fixture_seed = 0;
    std::string fixture_out = "fixture.jsonl";
    fixture->add_option("--seed", fixture_seed, "fixture seed");
    fixture->add_option("--out", fixture_out, "output JSONL path");

    auto* calibrate = app.add_subcommand("calibrate", "choose tau/theta on a validation split");
    std::string cal_dataset, cal_split = "validation", cal_out_dir = "out";
    calibrate->add_option("--dataset", cal_dataset, "dataset JSONL")->required();
    calibrate->add_option("--split", cal_split, "split to calibrate on");
    calibrate->add_option("--out-dir", cal_out_dir, "output directory");

    auto* classify = app.add_subcommand("classify", "run the two-stage workflow");
    std::string cls_dataset, cls_split = "test", cls_thresholds, cls_out = "outcomes.jsonl";
    classify->add_option("--dataset", cls_dataset, "dataset JSONL")->required();
    classify->add_option("--split", cls_split, "split to classify");
    classify->add_option("--thresholds", cls_thresholds, "thresholds JSON from calibrate")
        ->required();
    classify->add_option("--out", cls_out, "outcomes JSONL path");

    auto* evaluate = app.add_subcommand("evaluate", "confusion matrices and accuracy");
    std::string eval_outcomes, eval_dataset, eval_split, eval_out_dir = "out";
    evaluate->add_option("--outcomes", eval_outcomes, "outcomes JSONL from classify")
        ->required();
    evaluate->add_option("--dataset", eval_dataset, "dataset JSONL for label cross-check");
    evaluate->add_option("--split", eval_split, "dataset split matching the outcomes");
    evaluate->add_option("--out-dir", eval_out_dir, "output directory");

    auto* report = app.add_subcommand("report", "re-emit a JSON report as json or csv");
    std::string report_in, report_format = "json";
    report->add_option("--in", report_in, "calibration or evaluation JSON")->required();
    report->add_option("--format", report_format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (fixture->parsed()) return run_fixture(common, fixture_seed, fixture_out);
        if (calibrate->parsed()) return run_calibrate(common, cal_dataset, cal_split, cal_out_dir);
        if (classify->parsed()) {
            return run_classify(common, cls_dataset, cls_split, cls_thresholds, cls_out);
        }
        if (evaluate->parsed()) {
            return run_evaluate(common, eval_outcomes, eval_dataset, eval_split, eval_out_dir);
        }
        if (report->parsed()) return run_report(report_in, report_format);
    } catch (const Error& e) {
        std::cerr << "error [" << knowprobe::error_code_name(e.code()) << "]: " << e.what()
                  << "\n";
        return e.code() == ErrorCode::IoError ? kExitUsage : kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
