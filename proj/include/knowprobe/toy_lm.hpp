#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "knowprobe/model.hpp"

namespace knowprobe {

/**
 * Deterministic fixed-weight language model used for oracle tests and the
 * synthetic fixture.
 *
 * Architecture (fully published so every score can be checked by hand):
 *
 *   tokenizer   one symbol per whitespace-separated word, fixed vocabulary
 *   embedding   id k -> k-th standard basis vector, d = |vocab|
 *   forward     logits_i = W * mean(e_0..e_i), rows = softmax(logits_i)
 *               W[next][src] = max(ln T[src -> next], kLogFloor)
 *   attention   single layer, single head; query i attends to key j <= i
 *               with weight softmax_j(salience(t_j))
 *
 * The transition table T encodes a tiny closed world:
 *   - letters a..f with pinned edges for bigram unit tests
 *     (P(b|a) = 1, c self-loops, P(e|d) = 1/4, P(f|d e) = 1/10 exactly)
 *   - eight "known" creatures, each emitting its own habitat/diet/activity
 *     fact nouns uniformly (facts are shared pairwise across creatures)
 *   - eight "unknown" creatures emitting generic filler nouns with mildly
 *     varied weights, so perturbing them barely moves the output
 *   - function words, verbs, adjectives, numerals with uniform rows
 *
 * Everything is seeded and pure: the same inputs give bit-identical
 * outputs on a given platform.
 */
class ToyLm : public ModelAdapter {
public:
    static constexpr double kLogFloor = -800.0;  // exp underflows to exactly 0
    static constexpr int kMaxNewTokens = 8;

    ToyLm();

    size_t vocab_size() const override { return symbols_.size(); }
    size_t embedding_dim() const override { return symbols_.size(); }

    TokenSequence tokenize(const std::string& text) const override;
    std::string detokenize(const TokenSequence& tokens) const override;
    EmbeddingSequence embed(const TokenSequence& tokens) const override;
    DistributionMatrix forward_from_embeddings(const EmbeddingSequence& emb) const override;
    AttentionSummary attention_received(const TokenizedPair& pair) const override;
    std::vector<double> token_logprobs(const TokenSequence& tokens) const override;
    std::vector<std::string> sample_generations(const std::string& prompt,
                                                int n,
                                                double temperature,
                                                uint64_t seed) const override;

    // --- published structure, exposed for oracles and the fixture ---

    /// Token-input forward pass (column means of W). Must agree with
    /// forward_from_embeddings(embed(t)) to within float noise.
    DistributionMatrix forward_tokens(const TokenSequence& tokens) const;

    /// Raw (M+N)x(M+N) lower-triangular attention map of the single head.
    std::vector<std::vector<double>> attention_matrix(const TokenizedPair& pair) const;

    /// Next-token distribution after the beginning-of-sequence token.
    std::vector<double> bos_distribution() const;

    /// Published transition probability T[src -> next] (0 where floored).
    double transition(TokenId src, TokenId next) const;

    const std::vector<std::string>& symbols() const { return symbols_; }
    TokenId id_of(const std::string& symbol) const;
    double salience(TokenId id) const { return salience_[id]; }

    /// Known creatures and their (habitat, diet, activity) fact symbols.
    struct CreatureFacts {
        std::string name;
        std::array<std::string, 3> facts;
    };
    static const std::vector<CreatureFacts>& known_creatures();
    static const std::vector<std::string>& unknown_creatures();
    static const std::vector<std::string>& filler_nouns();

private:
    std::vector<double> logits_for_mean(std::span<const double> mean) const;
    static void softmax_inplace(std::span<double> logits);

    std::vector<std::string> symbols_;
    std::unordered_map<std::string, TokenId> symbol_ids_;
    std::vector<double> salience_;
    std::vector<double> weight_;  // W, row-major [next * vocab + src]
};

/// Registers the "toy" backend with the global registry. Called once from
/// make_adapter; safe to call repeatedly.
void register_toy_backend();

} // namespace knowprobe
