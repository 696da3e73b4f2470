#include "knowprobe/alignment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace knowprobe {

namespace {

const std::set<std::string> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "st", "vs", "etc", "eg", "ie",
    "fig", "vol", "no", "inc", "co",
};

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == ')' || c == ']' || c == '"' || c == '\''; }

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

/// Word immediately before position i, letters and internal periods only,
/// lowercased with periods stripped ("e.g" -> "eg").
std::string preceding_word(const std::string& text, size_t i) {
    size_t e = i;
    size_t b = e;
    while (b > 0 && (std::isalpha(static_cast<unsigned char>(text[b - 1])) || text[b - 1] == '.')) {
        --b;
    }
    std::string out;
    for (size_t j = b; j < e; ++j) {
        char c = text[j];
        if (c == '.') continue;
        out += char(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::vector<std::string> word_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\'') {
            cur += char(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

constexpr char kSep = '\x1f';

std::string join_context(const std::vector<std::string>& tokens, size_t begin, size_t end) {
    std::string key;
    for (size_t i = begin; i < end; ++i) {
        key += tokens[i];
        key += kSep;
    }
    return key;
}

} // namespace

std::vector<std::string> split_sentences(const std::string& text) {
    if (text.empty()) {
        throw Error(ErrorCode::EmptyInput, "split_sentences: empty text");
    }
    std::vector<std::string> sentences;
    size_t start = 0;
    size_t i = 0;
    while (i < text.size()) {
        if (is_terminal(text[i])) {
            // a terminator glued to a following word char is not a boundary
            // ("e.g.", "3.14"); neither is a period after a known abbreviation
            if (i + 1 < text.size() && (std::isalnum(static_cast<unsigned char>(text[i + 1])))) {
                ++i;
                continue;
            }
            if (text[i] == '.' && kAbbreviations.count(preceding_word(text, i))) {
                ++i;
                continue;
            }
            // swallow the terminator run and any closing quotes/brackets
            size_t end = i + 1;
            while (end < text.size() && (is_terminal(text[end]) || is_closer(text[end]))) ++end;
            std::string sentence = trim(text.substr(start, end - start));
            if (!sentence.empty()) sentences.push_back(std::move(sentence));
            start = end;
            i = end;
        } else {
            ++i;
        }
    }
    std::string tail = trim(text.substr(start));
    if (!tail.empty()) sentences.push_back(std::move(tail));
    if (sentences.empty()) sentences.push_back(trim(text));
    return sentences;
}

NgramModel::NgramModel(const std::vector<std::string>& samples, int order) : order_(order) {
    if (samples.empty()) {
        throw Error(ErrorCode::EmptyInput, "ngram model: no samples");
    }
    if (order < 1) {
        throw Error(ErrorCode::InvalidArgument, "ngram model: order must be >= 1");
    }
    for (const std::string& sample : samples) {
        std::vector<std::string> tokens = word_tokens(sample);
        total_tokens_ += tokens.size();
        for (size_t i = 0; i < tokens.size(); ++i) {
            ++unigram_[tokens[i]];
            if (order_ > 1) {
                size_t h = size_t(order_ - 1) <= i ? i - size_t(order_ - 1) : 0;
                std::string ctx = join_context(tokens, h, i);
                ++context_[ctx];
                ++ngram_[ctx + tokens[i]];
            }
        }
    }
    vocab_ = unigram_.size() + 1;  // one shared bucket for unseen words
}

double NgramModel::mean_logprob(const std::string& sentence) const {
    std::vector<std::string> tokens = word_tokens(sentence);
    if (tokens.empty()) return 0.0;

    double acc = 0.0;
    for (size_t i = 0; i < tokens.size(); ++i) {
        size_t hits = 0;
        size_t context_total = 0;
        if (order_ == 1) {
            auto it = unigram_.find(tokens[i]);
            hits = it == unigram_.end() ? 0 : it->second;
            context_total = total_tokens_;
        } else {
            size_t h = size_t(order_ - 1) <= i ? i - size_t(order_ - 1) : 0;
            std::string ctx = join_context(tokens, h, i);
            auto cit = context_.find(ctx);
            context_total = cit == context_.end() ? 0 : cit->second;
            auto nit = ngram_.find(ctx + tokens[i]);
            hits = nit == ngram_.end() ? 0 : nit->second;
        }
        acc += std::log(double(hits + 1) / double(context_total + vocab_));
    }
    return acc / double(tokens.size());
}

double consistency_score(const std::string& sentence,
                         const std::vector<std::string>& samples,
                         const AlignmentConfig& config) {
    NgramModel model(samples, config.ngram_order);
    double score = 1.0 - std::exp(model.mean_logprob(sentence));
    return std::clamp(score, 0.0, 1.0);
}

AlignmentScore alignment_score(const TokenizedPair& pair,
                               const ModelAdapter& adapter,
                               const AlignmentConfig& config) {
    std::vector<std::string> samples = adapter.sample_generations(
        pair.prompt_text, config.n_samples, config.temperature, config.sample_seed);
    NgramModel model(samples, config.ngram_order);

    AlignmentScore result;
    for (const std::string& sentence : split_sentences(pair.gen_text)) {
        double score = 1.0 - std::exp(model.mean_logprob(sentence));
        result.per_sentence.push_back(std::clamp(score, 0.0, 1.0));
    }
    double total = 0.0;
    for (double s : result.per_sentence) total += s;
    result.overall = total / double(result.per_sentence.size());
    return result;
}

double calibrate_alignment_threshold(const std::vector<double>& aligned_scores,
                                     const std::vector<double>& misaligned_scores) {
    if (aligned_scores.empty() || misaligned_scores.empty()) {
        throw Error(ErrorCode::EmptyInput, "calibrate_alignment_threshold: empty sample");
    }
    std::vector<double> candidates = aligned_scores;
    candidates.insert(candidates.end(), misaligned_scores.begin(), misaligned_scores.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    double best_theta = candidates.front();
    double best_acc = -1.0;
    for (double theta : candidates) {
        size_t aligned_ok = 0;
        for (double s : aligned_scores) {
            if (s < theta) ++aligned_ok;
        }
        size_t misaligned_ok = 0;
        for (double s : misaligned_scores) {
            if (s >= theta) ++misaligned_ok;
        }
        double acc = 0.5 * (double(aligned_ok) / double(aligned_scores.size()) +
                            double(misaligned_ok) / double(misaligned_scores.size()));
        if (acc > best_acc) {
            best_acc = acc;
            best_theta = theta;  // ties keep the smallest candidate
        }
    }
    return best_theta;
}

} // namespace knowprobe
