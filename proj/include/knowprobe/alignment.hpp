#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "knowprobe/model.hpp"

namespace knowprobe {

/// Sampling-consistency test parameters. The n-gram scorer is the default
/// variant: it needs no second model and its arithmetic is fully checkable.
struct AlignmentConfig {
    int n_samples = 10;
    double temperature = 1.0;
    std::string scorer = "ngram";
    int ngram_order = 1;
    double threshold = 0.5;      // theta; calibrated per deployment
    uint64_t sample_seed = 0;
};

/// Per-sentence hallucination scores in [0, 1]; higher means less support
/// from the stochastic samples.
struct AlignmentScore {
    std::vector<double> per_sentence;
    double overall = 0.0;        // mean of per_sentence
};

/// Rule-based sentence splitting on terminal punctuation with a small
/// abbreviation guard. Text without a terminator comes back whole.
std::vector<std::string> split_sentences(const std::string& text);

/// Add-one smoothed n-gram model over a sample corpus. The vocabulary size
/// used by the smoothing is the number of distinct sample tokens plus one
/// shared bucket for unseen words.
class NgramModel {
public:
    NgramModel(const std::vector<std::string>& samples, int order);

    /// Mean token log-probability of the sentence under the model.
    double mean_logprob(const std::string& sentence) const;

    size_t vocab_size() const { return vocab_; }
    size_t total_tokens() const { return total_tokens_; }

private:
    int order_;
    size_t vocab_ = 0;
    size_t total_tokens_ = 0;
    std::unordered_map<std::string, size_t> unigram_;
    std::unordered_map<std::string, size_t> context_;   // joined history
    std::unordered_map<std::string, size_t> ngram_;     // joined history + token
};

/// Score of one sentence against the samples:
///   1 - exp(mean token log-prob), clamped to [0, 1].
double consistency_score(const std::string& sentence,
                         const std::vector<std::string>& samples,
                         const AlignmentConfig& config);

/// Draws config.n_samples stochastic generations for the pair's prompt and
/// scores every sentence of the generation; overall is the sentence mean.
AlignmentScore alignment_score(const TokenizedPair& pair,
                               const ModelAdapter& adapter,
                               const AlignmentConfig& config);

/// theta maximizing balanced accuracy (aligned below, misaligned at or
/// above) over the union of observed scores; ties go to the smallest theta.
double calibrate_alignment_threshold(const std::vector<double>& aligned_scores,
                                     const std::vector<double>& misaligned_scores);

} // namespace knowprobe
