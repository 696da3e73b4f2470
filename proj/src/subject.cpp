#include "knowprobe/subject.hpp"

#include <algorithm>
#include <cctype>

namespace knowprobe {

namespace {

struct Word {
    std::string text;
    CharSpan span;
    std::string pos;  // empty when the tagger does not know the word
};

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\'';
}

std::vector<Word> split_words(const std::string& text, const PosTagger& tagger) {
    std::vector<Word> words;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_word_char(text[i])) ++i;
        if (i >= text.size()) break;
        size_t begin = i;
        while (i < text.size() && is_word_char(text[i])) ++i;
        Word w;
        w.text = text.substr(begin, i - begin);
        w.span = {begin, i};
        w.pos = tagger.tag(w.text).value_or("");
        words.push_back(std::move(w));
    }
    return words;
}

bool is_nominal(const std::string& pos) {
    return pos == "NOUN" || pos == "PROPN" || pos == "NUM";
}

} // namespace

std::vector<NounChunk> extract_noun_chunks(const std::string& prompt,
                                           const PosTagger& tagger) {
    if (prompt.empty()) {
        throw Error(ErrorCode::EmptyInput, "extract_noun_chunks: empty prompt");
    }
    std::vector<Word> words = split_words(prompt, tagger);
    std::vector<NounChunk> chunks;

    size_t i = 0;
    while (i < words.size()) {
        size_t start = i;
        size_t j = i;
        if (j < words.size() && words[j].pos == "DET") ++j;
        while (j < words.size() && words[j].pos == "ADJ") ++j;
        size_t head_begin = j;
        while (j < words.size() && is_nominal(words[j].pos)) ++j;
        if (j == head_begin) {
            // no nominal head; the DET/ADJ prefix was not a chunk after all
            ++i;
            continue;
        }
        NounChunk chunk;
        chunk.char_span = {words[start].span.begin, words[j - 1].span.end};
        chunk.text = prompt.substr(chunk.char_span.begin,
                                   chunk.char_span.end - chunk.char_span.begin);
        chunks.push_back(std::move(chunk));
        i = j;
    }

    if (chunks.empty()) {
        throw Error(ErrorCode::NoSubjectCandidate,
                    "no noun chunk found in prompt: '" + prompt + "'");
    }
    return chunks;
}

std::pair<size_t, size_t> token_span_for_chars(const TokenSequence& tokens,
                                               const CharSpan& span) {
    size_t begin = tokens.size();
    size_t end = 0;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (tokens.offsets[i].overlaps(span)) {
            begin = std::min(begin, i);
            end = std::max(end, i + 1);
        }
    }
    if (begin >= end) return {0, 0};
    return {begin, end};
}

std::set<size_t> find_occurrences(const TokenizedPair& pair,
                                  const TokenSequence& subject_tokens,
                                  const std::string& subject_text) {
    const size_t k = subject_tokens.size();
    if (k == 0) {
        throw Error(ErrorCode::InvalidArgument, "find_occurrences: empty subject");
    }
    TokenSequence concat = pair.concat_tokens();
    std::set<size_t> hits;
    if (concat.size() >= k) {
        for (size_t i = 0; i + k <= concat.size(); ++i) {
            bool match = true;
            for (size_t j = 0; j < k; ++j) {
                if (concat.ids[i + j] != subject_tokens.ids[j]) {
                    match = false;
                    break;
                }
            }
            if (match) hits.insert(i);
        }
    }
    if (!hits.empty()) return hits;

    // Retokenization fallback: align character occurrences of the chunk text
    // through token offsets. A hit is kept only when a K-token window fits.
    if (!subject_text.empty()) {
        auto scan = [&](const std::string& text, const TokenSequence& tokens, size_t index_base) {
            size_t pos = 0;
            while ((pos = text.find(subject_text, pos)) != std::string::npos) {
                bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
                size_t right = pos + subject_text.size();
                bool right_ok = right >= text.size() || !is_word_char(text[right]);
                if (left_ok && right_ok) {
                    auto [begin, end] = token_span_for_chars(tokens, {pos, right});
                    if (end > begin && index_base + begin + k <= pair.total()) {
                        hits.insert(index_base + begin);
                    }
                }
                pos += 1;
            }
        };
        scan(pair.prompt_text, pair.prompt_tokens, 0);
        scan(pair.gen_text, pair.gen_tokens, pair.boundary());
    }

    if (hits.empty()) {
        throw Error(ErrorCode::SubjectNotLocated,
                    "subject not located in (P,G): '" + subject_text + "'");
    }
    return hits;
}

Subject select_subject(const TokenizedPair& pair,
                       const std::vector<NounChunk>& chunks,
                       const AttentionSummary& attention) {
    if (chunks.empty()) {
        throw Error(ErrorCode::InvalidArgument, "select_subject: no chunks");
    }
    if (attention.size() != pair.boundary()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "select_subject: attention length != prompt length");
    }

    std::vector<NounChunk> scored = chunks;
    for (NounChunk& chunk : scored) {
        auto [begin, end] = token_span_for_chars(pair.prompt_tokens, chunk.char_span);
        chunk.token_begin = begin;
        chunk.token_end = end;
        chunk.attention_mass = 0.0;
        for (size_t i = begin; i < end; ++i) chunk.attention_mass += attention.received[i];
    }

    // Highest attention wins; on ties prefer the chunk starting latest in
    // the prompt (entities usually trail the question scaffolding).
    const NounChunk* best = &scored.front();
    for (const NounChunk& chunk : scored) {
        if (chunk.attention_mass > best->attention_mass ||
            (chunk.attention_mass == best->attention_mass &&
             chunk.char_span.begin >= best->char_span.begin)) {
            best = &chunk;
        }
    }
    if (best->token_end <= best->token_begin) {
        throw Error(ErrorCode::SubjectNotLocated,
                    "selected chunk covers no prompt tokens: '" + best->text + "'");
    }

    Subject subject;
    subject.source_chunk = *best;
    subject.tokens = pair.prompt_tokens.slice(best->token_begin, best->token_end);
    subject.occurrences = find_occurrences(pair, subject.tokens, best->text);
    return subject;
}

} // namespace knowprobe
