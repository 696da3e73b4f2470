#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "knowprobe/calibration.hpp"
#include "knowprobe/config.hpp"
#include "knowprobe/pipeline.hpp"

namespace knowprobe {

/// One classified example as persisted in the outcomes JSONL.
struct OutcomeRecord {
    ClassificationOutcome outcome;
    ReasoningLabel actual = ReasoningLabel::Aligned;
};

nlohmann::ordered_json mks_to_json(const MksResult& mks);
nlohmann::ordered_json alignment_to_json(const AlignmentScore& score);
nlohmann::ordered_json outcome_to_json(const OutcomeRecord& record);
OutcomeRecord outcome_from_json(const nlohmann::ordered_json& j);

/// Outcomes JSONL: header line {"schema", "kind", "config", "thresholds"},
/// then one record per line. The header pins the exact configuration the
/// outcomes were produced with.
void write_outcomes(const std::string& path,
                    const std::vector<OutcomeRecord>& records,
                    const RunConfig& config);
std::vector<OutcomeRecord> read_outcomes(const std::string& path);

/// Calibration report (KS statistic, tau, theta, p-value, sample sizes,
/// config echo) plus the small thresholds file used by classify/evaluate.
void write_calibration_report(const std::string& path,
                              const CalibrationResult& calibration,
                              double theta,
                              const RunConfig& config);
void write_thresholds(const std::string& path, const Thresholds& thresholds);
Thresholds read_thresholds(const std::string& path);

/// Two-column CSV (x, F) of an empirical CDF, for external plotting.
void write_ecdf_csv(const std::string& path, const Ecdf& ecdf);

nlohmann::ordered_json evaluation_to_json(const EvaluationSummary& summary,
                                          const RunConfig& config);
void write_evaluation_report(const std::string& path,
                             const EvaluationSummary& summary,
                             const RunConfig& config);
void write_confusion_csv(const std::string& path, const ConfusionMatrix& matrix);

} // namespace knowprobe
