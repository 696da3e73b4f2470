#include "knowprobe/pipeline.hpp"

#include <unordered_map>

namespace knowprobe {

const char* label_name(ReasoningLabel label) {
    switch (label) {
        case ReasoningLabel::Aligned:    return "aligned";
        case ReasoningLabel::Misaligned: return "misaligned";
        case ReasoningLabel::Fabricated: return "fabricated";
    }
    return "unknown";
}

std::optional<ReasoningLabel> parse_label(const std::string& name) {
    if (name == "aligned") return ReasoningLabel::Aligned;
    if (name == "misaligned") return ReasoningLabel::Misaligned;
    if (name == "fabricated") return ReasoningLabel::Fabricated;
    return std::nullopt;
}

ClassificationOutcome classify(const LabeledExample& example,
                               const ModelAdapter& adapter,
                               const PosTagger& tagger,
                               const Thresholds& thresholds,
                               const ProbeConfig& probe_config,
                               const AlignmentConfig& alignment_config) {
    ClassificationOutcome outcome;
    outcome.id = example.id;
    outcome.tau_used = thresholds.tau;
    outcome.theta_used = thresholds.theta;

    try {
        TokenizedPair pair = make_tokenized_pair(adapter, example.prompt, example.text);
        AttentionSummary attention = adapter.attention_received(pair);
        std::vector<NounChunk> chunks = extract_noun_chunks(example.prompt, tagger);
        Subject subject = select_subject(pair, chunks, attention);
        outcome.mks = model_knowledge_score(pair, subject, adapter, tagger, probe_config);

        if (outcome.mks->score < thresholds.tau) {
            outcome.predicted = ReasoningLabel::Fabricated;
            return outcome;  // stage 2 never runs for fabricated predictions
        }

        AlignmentConfig stage2 = alignment_config;
        stage2.threshold = outcome.theta_used;
        outcome.alignment = alignment_score(pair, adapter, stage2);
        outcome.predicted = outcome.alignment->overall >= outcome.theta_used
                                ? ReasoningLabel::Misaligned
                                : ReasoningLabel::Aligned;
        return outcome;
    } catch (const Error& e) {
        switch (e.code()) {
            case ErrorCode::NoSubjectCandidate:
            case ErrorCode::SubjectNotLocated:
            case ErrorCode::NoScorableTokens:
            case ErrorCode::EmptyInput:
                outcome.predicted.reset();
                outcome.unclassifiable_reason = error_code_name(e.code());
                return outcome;
            default:
                throw;
        }
    }
}

ConfusionMatrix ConfusionMatrix::from_counts(
    const std::array<std::array<size_t, 3>, 3>& counts) {
    ConfusionMatrix m;
    m.counts = counts;
    for (size_t actual = 0; actual < 3; ++actual) {
        size_t total = m.column_total(actual);
        for (size_t pred = 0; pred < 3; ++pred) {
            m.column_percentages[pred][actual] =
                total == 0 ? 0.0 : 100.0 * double(counts[pred][actual]) / double(total);
        }
    }
    return m;
}

size_t ConfusionMatrix::column_total(size_t actual) const {
    return counts[0][actual] + counts[1][actual] + counts[2][actual];
}

size_t ConfusionMatrix::total() const {
    size_t n = 0;
    for (size_t pred = 0; pred < 3; ++pred) {
        for (size_t actual = 0; actual < 3; ++actual) n += counts[pred][actual];
    }
    for (size_t actual = 0; actual < 3; ++actual) n += unclassified[actual];
    return n;
}

EvaluationSummary summarize(const ConfusionMatrix& matrix) {
    EvaluationSummary s;
    s.matrix = matrix;
    s.n_examples = matrix.total();
    for (size_t actual = 0; actual < 3; ++actual) s.n_unclassified += matrix.unclassified[actual];

    // Binary collapse: an actual-aligned example is correct iff predicted
    // aligned; a hallucinated one iff predicted misaligned or fabricated.
    size_t correct_total = 0;
    size_t counted_total = 0;
    for (size_t actual = 0; actual < 3; ++actual) {
        size_t correct = actual == 0 ? matrix.counts[0][0]
                                     : matrix.counts[1][actual] + matrix.counts[2][actual];
        size_t column = matrix.column_total(actual) + matrix.unclassified[actual];
        s.class_accuracy[actual] = column == 0 ? 0.0 : 100.0 * double(correct) / double(column);
        correct_total += correct;
        counted_total += column;
    }
    s.overall_accuracy =
        counted_total == 0 ? 0.0 : 100.0 * double(correct_total) / double(counted_total);
    return s;
}

EvaluationSummary evaluate(const std::vector<LabeledExample>& dataset,
                           const std::vector<ClassificationOutcome>& outcomes) {
    std::unordered_map<std::string, const ClassificationOutcome*> by_id;
    for (const auto& outcome : outcomes) by_id[outcome.id] = &outcome;
    if (by_id.size() != outcomes.size()) {
        throw Error(ErrorCode::InvalidArgument, "evaluate: duplicate outcome ids");
    }

    ConfusionMatrix m;
    std::unordered_map<std::string, bool> consumed;
    for (const auto& example : dataset) {
        auto it = by_id.find(example.id);
        if (it == by_id.end()) {
            throw Error(ErrorCode::InvalidArgument,
                        "evaluate: no outcome for example id '" + example.id + "'");
        }
        if (!consumed.emplace(example.id, true).second) {
            throw Error(ErrorCode::InvalidArgument,
                        "evaluate: duplicate dataset id '" + example.id + "'");
        }
        size_t actual = size_t(example.label);
        const ClassificationOutcome& outcome = *it->second;
        if (outcome.predicted) {
            m.counts[size_t(*outcome.predicted)][actual] += 1;
        } else {
            m.unclassified[actual] += 1;
        }
    }
    if (consumed.size() != outcomes.size()) {
        throw Error(ErrorCode::InvalidArgument, "evaluate: outcomes do not match dataset");
    }

    ConfusionMatrix with_pct = ConfusionMatrix::from_counts(m.counts);
    with_pct.unclassified = m.unclassified;
    return summarize(with_pct);
}

} // namespace knowprobe
