#pragma once

#include <set>
#include <string>
#include <vector>

#include "knowprobe/tagger.hpp"
#include "knowprobe/types.hpp"

namespace knowprobe {

/// A candidate noun phrase in the prompt.
struct NounChunk {
    std::string text;
    CharSpan char_span;                  // in the prompt text
    size_t token_begin = 0;              // token indices into the prompt
    size_t token_end = 0;                // (filled during selection)
    double attention_mass = 0.0;
};

/// The selected subject: its token ids and every start position where the
/// subject occurs in the concatenated (prompt, generation) sequence.
struct Subject {
    TokenSequence tokens;                // length K
    std::set<size_t> occurrences;        // start indices into (P,G)
    NounChunk source_chunk;
};

/// Noun phrases of the prompt (DET? ADJ* (NOUN|PROPN|NUM)+), ordered by
/// character span, non-overlapping. attention_mass and token spans are left
/// unset. Throws NoSubjectCandidate when nothing matches.
std::vector<NounChunk> extract_noun_chunks(const std::string& prompt,
                                           const PosTagger& tagger);

/// Token index range [begin, end) of prompt tokens overlapping chars
/// [span.begin, span.end).
std::pair<size_t, size_t> token_span_for_chars(const TokenSequence& tokens,
                                               const CharSpan& span);

/// Start indices of every exact token-subsequence match of subject_tokens
/// in (P,G); overlapping matches count. When exact matching finds nothing
/// and subject_text is non-empty, falls back to aligning character-level
/// occurrences of subject_text through token offsets. Throws
/// SubjectNotLocated when both routes come up empty.
std::set<size_t> find_occurrences(const TokenizedPair& pair,
                                  const TokenSequence& subject_tokens,
                                  const std::string& subject_text = "");

/// Picks the chunk with the highest received attention (ties: latest
/// char start), slices its tokens out of the prompt and locates all
/// occurrences across (P,G).
Subject select_subject(const TokenizedPair& pair,
                       const std::vector<NounChunk>& chunks,
                       const AttentionSummary& attention);

} // namespace knowprobe
