#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "knowprobe/model.hpp"
#include "knowprobe/subject.hpp"
#include "knowprobe/tagger.hpp"

namespace knowprobe {

/// Knowledge-probe parameters. Defaults match the reference configuration:
/// base noise scale 0.1, ten seeds, natural-log KL, and the five
/// semantically meaningful POS classes.
struct ProbeConfig {
    double sigma_prime = 0.1;
    std::vector<uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::set<std::string> pos_set = {"NOUN", "PROPN", "NUM", "VERB", "ADJ"};
    double kl_log_base = 0.0;   // 0 = natural log

    size_t n_seeds() const { return seeds.size(); }
};

/// Model Knowledge Score for one (prompt, generation, subject) triple.
struct MksResult {
    std::vector<double> per_seed;
    double score = 0.0;          // arithmetic mean of per_seed
    double familiarity = 1.0;
    double sigma = 0.0;          // sigma_prime * familiarity
    size_t n_scored_tokens = 0;
    std::vector<uint64_t> seeds; // recorded for reproducibility
};

/// Position-scaled negative log-likelihood of the subject tokens, plus one:
///   fam(S) = -(1/K) * sum_i sqrt(i-1) * log Pr(t_i | t_1..t_{i-1}) + 1
/// Always >= 1; single-token subjects score exactly 1.
double familiarity(const TokenSequence& subject_tokens, const ModelAdapter& adapter);

/// Adds one shared Gaussian noise sample eps ~ N(0, sigma^2) of shape K x d
/// to every K-token occurrence window; every other position is returned
/// bitwise unchanged. The draw is a portable Box-Muller over mt19937_64, so
/// a given seed produces the same noise on every platform. Overlapping
/// windows cannot all receive the same eps and are rejected.
EmbeddingSequence perturb(const EmbeddingSequence& emb,
                          const std::set<size_t>& occurrences,
                          size_t k,
                          double sigma,
                          uint64_t seed);

/// Mask over generated tokens: true when the token's character span
/// overlaps a word whose tag is in pos_set.
std::vector<bool> pos_mask(const TokenizedPair& pair,
                           const PosTagger& tagger,
                           const std::set<std::string>& pos_set);

/// KL(p || q) = sum p * log(p/q), natural log by default. q is floored at
/// 1e-12 before the ratio; 0 * log 0 is taken as 0. Result clamped at 0.
double kl_divergence(std::span<const double> p,
                     std::span<const double> q,
                     double log_base = 0.0);

/// Steps 2-3 of the knowledge test. Per seed: perturb the subject
/// embeddings, re-run the forward pass and average the per-position KL
/// divergence over POS-qualifying generated tokens; the final score is the
/// mean over seeds. The unperturbed distribution is computed once.
/// Per-seed passes are independent, so callers may fan them out with one
/// adapter instance per worker; the mean is order-independent.
MksResult model_knowledge_score(const TokenizedPair& pair,
                                const Subject& subject,
                                const ModelAdapter& adapter,
                                const PosTagger& tagger,
                                const ProbeConfig& config);

} // namespace knowprobe
