#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "knowprobe/alignment.hpp"
#include "knowprobe/probe.hpp"

namespace knowprobe {

enum class ReasoningLabel { Aligned, Misaligned, Fabricated };

const char* label_name(ReasoningLabel label);
std::optional<ReasoningLabel> parse_label(const std::string& name);

/// Binary collapse for comparison with binary detectors: aligned is
/// faithful, misaligned and fabricated are both hallucinated.
inline bool is_hallucinated(ReasoningLabel label) {
    return label != ReasoningLabel::Aligned;
}

struct LabeledExample {
    std::string id;
    std::string prompt;
    std::string text;
    ReasoningLabel label = ReasoningLabel::Aligned;
    std::string split;  // "validation" | "test" | ""
};

struct Thresholds {
    double tau = 0.0;
    double theta = 0.0;
};

/// Result of running the two-stage workflow on one example. `predicted` is
/// empty when the example could not be scored (no subject candidate, no
/// POS-qualifying token); such examples are reported in their own bucket.
struct ClassificationOutcome {
    std::string id;
    std::optional<ReasoningLabel> predicted;
    std::string unclassifiable_reason;
    std::optional<MksResult> mks;
    std::optional<AlignmentScore> alignment;
    double tau_used = 0.0;
    double theta_used = 0.0;
};

/// Stage 1 gates stage 2: a knowledge score strictly below tau is
/// fabricated and no samples are ever drawn for it (a score equal to tau
/// passes). At or above tau, the alignment score decides between aligned
/// (below theta) and misaligned (at or above theta).
ClassificationOutcome classify(const LabeledExample& example,
                               const ModelAdapter& adapter,
                               const PosTagger& tagger,
                               const Thresholds& thresholds,
                               const ProbeConfig& probe_config,
                               const AlignmentConfig& alignment_config);

/// 3x3 confusion matrix, predicted x actual, plus an unclassifiable bucket
/// per actual class. Percentages are per actual-class column over the
/// classified examples of that class.
struct ConfusionMatrix {
    std::array<std::array<size_t, 3>, 3> counts{};        // [predicted][actual]
    std::array<size_t, 3> unclassified{};                 // per actual class
    std::array<std::array<double, 3>, 3> column_percentages{};

    static ConfusionMatrix from_counts(const std::array<std::array<size_t, 3>, 3>& counts);

    size_t total() const;
    size_t column_total(size_t actual) const;
};

/// Aggregate metrics in the three-way and collapsed binary views.
struct EvaluationSummary {
    ConfusionMatrix matrix;
    /// Per-class accuracy under the binary collapse: aligned predicted
    /// faithful; misaligned/fabricated predicted hallucinated (confusing
    /// the two hallucinated classes with each other still counts).
    std::array<double, 3> class_accuracy{};
    double overall_accuracy = 0.0;   // mean per-example correctness
    size_t n_examples = 0;
    size_t n_unclassified = 0;
};

EvaluationSummary summarize(const ConfusionMatrix& matrix);

/// Tallies outcomes against the dataset's actual labels. Outcomes must
/// cover the dataset exactly (matched by id).
EvaluationSummary evaluate(const std::vector<LabeledExample>& dataset,
                           const std::vector<ClassificationOutcome>& outcomes);

} // namespace knowprobe
