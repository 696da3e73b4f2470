#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "knowprobe/types.hpp"

namespace knowprobe {

/**
 * Uniform boundary over a causal LM.
 *
 * Exposes exactly what the scoring pipeline needs: tokenization, token
 * embeddings, forward passes from raw embedding vectors (so perturbed
 * embeddings flow through unmodified), attention summaries, conditional
 * token log-probs, and seeded stochastic generation.
 *
 * Instances are not required to be thread-safe; hold one instance per
 * worker or serialize calls.
 */
class ModelAdapter {
public:
    virtual ~ModelAdapter() = default;

    virtual size_t vocab_size() const = 0;
    virtual size_t embedding_dim() const = 0;

    /// Splits text into tokens with character offsets. Throws EmptyInput
    /// on empty text, OutOfVocabulary on unmappable words.
    virtual TokenSequence tokenize(const std::string& text) const = 0;

    /// Inverse of tokenize up to whitespace normalization.
    virtual std::string detokenize(const TokenSequence& tokens) const = 0;

    /// Deterministic id -> vector lookup. Throws OutOfVocabulary.
    virtual EmbeddingSequence embed(const TokenSequence& tokens) const = 0;

    /// Next-token distributions from raw embedding vectors. Row i is the
    /// distribution after positions 0..i. Must not re-derive embeddings
    /// from token ids. Throws DimensionMismatch.
    virtual DistributionMatrix forward_from_embeddings(const EmbeddingSequence& emb) const = 0;

    /// Attention mass each prompt token receives from generated-token
    /// queries, mean over layers and heads. Backends without attention
    /// exposure throw CapabilityUnsupported.
    virtual AttentionSummary attention_received(const TokenizedPair& pair) const = 0;

    /// Entry i is log Pr(token i | tokens 0..i-1); entry 0 conditions on
    /// the backend's beginning-of-sequence context. All entries <= 0.
    virtual std::vector<double> token_logprobs(const TokenSequence& tokens) const = 0;

    /// n seeded stochastic continuations of prompt. Fixed seed reproduces
    /// the list bit-for-bit. Throws InvalidArgument on n < 1 or
    /// temperature <= 0.
    virtual std::vector<std::string> sample_generations(const std::string& prompt,
                                                        int n,
                                                        double temperature,
                                                        uint64_t seed) const = 0;
};

struct ModelConfig {
    std::string backend = "toy";
    std::string name;
    std::string device = "cpu";
};

using BackendFactory = std::function<std::unique_ptr<ModelAdapter>(const ModelConfig&)>;

/// Registry keyed by the `model.backend` config value. "toy" is registered
/// at startup; external backends can register themselves before config load.
class BackendRegistry {
public:
    static BackendRegistry& instance();

    void register_backend(const std::string& name, BackendFactory factory);
    std::unique_ptr<ModelAdapter> create(const ModelConfig& config) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, BackendFactory> factories_;
};

/// Convenience wrapper around the registry.
std::unique_ptr<ModelAdapter> make_adapter(const ModelConfig& config);

/// Builds a TokenizedPair from raw prompt/generation text, validating that
/// the generation is non-empty.
TokenizedPair make_tokenized_pair(const ModelAdapter& adapter,
                                  const std::string& prompt,
                                  const std::string& text);

} // namespace knowprobe
