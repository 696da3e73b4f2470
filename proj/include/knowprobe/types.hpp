#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "knowprobe/errors.hpp"

namespace knowprobe {

using TokenId = int32_t;

/// Character span [begin, end) into the source text of one token.
struct CharSpan {
    size_t begin = 0;
    size_t end = 0;

    bool overlaps(const CharSpan& other) const {
        return begin < other.end && other.begin < end;
    }
};

/// Token ids plus the character span each token covers in the source text.
/// Offsets are non-overlapping and strictly increasing.
struct TokenSequence {
    std::vector<TokenId> ids;
    std::vector<CharSpan> offsets;

    size_t size() const { return ids.size(); }
    bool empty() const { return ids.empty(); }

    TokenSequence slice(size_t begin, size_t end) const {
        TokenSequence out;
        out.ids.assign(ids.begin() + begin, ids.begin() + end);
        out.offsets.assign(offsets.begin() + begin, offsets.begin() + end);
        return out;
    }
};

/// Dense row-major sequence of d-dimensional embedding vectors.
struct EmbeddingSequence {
    std::vector<double> data;   // length * dim
    size_t dim = 0;

    size_t length() const { return dim == 0 ? 0 : data.size() / dim; }

    std::span<double> row(size_t i) { return {data.data() + i * dim, dim}; }
    std::span<const double> row(size_t i) const { return {data.data() + i * dim, dim}; }
};

/// One probability row over the vocabulary per input position.
/// Row i is the next-token distribution after reading tokens 0..i.
struct DistributionMatrix {
    std::vector<double> data;   // rows * vocab
    size_t vocab = 0;

    size_t rows() const { return vocab == 0 ? 0 : data.size() / vocab; }

    std::span<double> row(size_t i) { return {data.data() + i * vocab, vocab}; }
    std::span<const double> row(size_t i) const { return {data.data() + i * vocab, vocab}; }
};

/// Per-prompt-token attention mass, aggregated over generation steps
/// (summed over generated-token queries, averaged over layers and heads).
struct AttentionSummary {
    std::vector<double> received;

    size_t size() const { return received.size(); }
};

/// Prompt and generation token sequences with their source texts.
/// boundary() is the prompt length M; the concatenated sequence (P,G) has
/// M+N tokens.
struct TokenizedPair {
    TokenSequence prompt_tokens;
    TokenSequence gen_tokens;
    std::string prompt_text;
    std::string gen_text;

    size_t boundary() const { return prompt_tokens.size(); }
    size_t total() const { return prompt_tokens.size() + gen_tokens.size(); }

    /// Token ids of (P,G). Offsets are kept per-source; the generation's
    /// spans are rebased as if the two texts were joined by one space.
    TokenSequence concat_tokens() const {
        TokenSequence out = prompt_tokens;
        out.ids.insert(out.ids.end(), gen_tokens.ids.begin(), gen_tokens.ids.end());
        const size_t shift = prompt_text.size() + 1;
        for (const CharSpan& s : gen_tokens.offsets) {
            out.offsets.push_back({s.begin + shift, s.end + shift});
        }
        return out;
    }

    TokenId token_at(size_t i) const {
        return i < boundary() ? prompt_tokens.ids[i] : gen_tokens.ids[i - boundary()];
    }
};

} // namespace knowprobe
