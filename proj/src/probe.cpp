#include "knowprobe/probe.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>

namespace knowprobe {

namespace {

constexpr double kQFloor = 1e-12;

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\'';
}

/// Portable standard normal draws: Box-Muller over mt19937_64 uniforms.
/// std::normal_distribution is not bit-stable across standard libraries.
class GaussianSource {
public:
    explicit GaussianSource(uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = unit_open();
        double u2 = unit_open();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    double unit_open() {
        // (0, 1): never returns 0, so log(u1) is finite
        return (double(rng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace

double familiarity(const TokenSequence& subject_tokens, const ModelAdapter& adapter) {
    if (subject_tokens.empty()) {
        throw Error(ErrorCode::InvalidArgument, "familiarity: empty subject");
    }
    std::vector<double> logprobs = adapter.token_logprobs(subject_tokens);
    const size_t k = logprobs.size();
    double acc = 0.0;
    for (size_t i = 0; i < k; ++i) {
        acc += std::sqrt(double(i)) * logprobs[i];  // sqrt(i-1) in 1-based terms
    }
    return -acc / double(k) + 1.0;
}

EmbeddingSequence perturb(const EmbeddingSequence& emb,
                          const std::set<size_t>& occurrences,
                          size_t k,
                          double sigma,
                          uint64_t seed) {
    if (k == 0) {
        throw Error(ErrorCode::InvalidArgument, "perturb: window length must be >= 1");
    }
    if (sigma < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "perturb: sigma must be >= 0");
    }
    const size_t len = emb.length();
    size_t prev_start = 0;
    bool first = true;
    for (size_t start : occurrences) {
        if (start + k > len) {
            throw Error(ErrorCode::InvalidArgument,
                        "perturb: occurrence window out of bounds");
        }
        if (!first && start < prev_start + k) {
            throw Error(ErrorCode::OverlappingOccurrences,
                        "perturb: occurrence windows overlap");
        }
        prev_start = start;
        first = false;
    }

    EmbeddingSequence out = emb;
    if (sigma == 0.0 || occurrences.empty()) return out;

    const size_t d = emb.dim;
    std::vector<double> noise(k * d);
    GaussianSource gauss(seed);
    for (double& x : noise) x = sigma * gauss.next();

    for (size_t start : occurrences) {
        for (size_t j = 0; j < k; ++j) {
            auto row = out.row(start + j);
            const double* n = noise.data() + j * d;
            for (size_t c = 0; c < d; ++c) row[c] += n[c];
        }
    }
    return out;
}

std::vector<bool> pos_mask(const TokenizedPair& pair,
                           const PosTagger& tagger,
                           const std::set<std::string>& pos_set) {
    if (pair.gen_tokens.empty()) {
        throw Error(ErrorCode::EmptyInput, "pos_mask: no generated tokens");
    }
    const std::string& text = pair.gen_text;

    // Character spans of words whose tag qualifies.
    std::vector<CharSpan> qualifying;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_word_char(text[i])) ++i;
        if (i >= text.size()) break;
        size_t begin = i;
        while (i < text.size() && is_word_char(text[i])) ++i;
        auto tag = tagger.tag(text.substr(begin, i - begin));
        if (tag && pos_set.count(*tag)) qualifying.push_back({begin, i});
    }

    std::vector<bool> mask(pair.gen_tokens.size(), false);
    for (size_t t = 0; t < pair.gen_tokens.size(); ++t) {
        const CharSpan& span = pair.gen_tokens.offsets[t];
        for (const CharSpan& q : qualifying) {
            if (span.overlaps(q)) {
                mask[t] = true;
                break;
            }
        }
    }
    return mask;
}

double kl_divergence(std::span<const double> p,
                     std::span<const double> q,
                     double log_base) {
    if (p.size() != q.size()) {
        throw Error(ErrorCode::DimensionMismatch, "kl_divergence: length mismatch");
    }
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) {
            acc += p[i] * std::log(p[i] / std::max(q[i], kQFloor));
        }
    }
    if (log_base > 0.0) acc /= std::log(log_base);
    return std::max(acc, 0.0);
}

MksResult model_knowledge_score(const TokenizedPair& pair,
                                const Subject& subject,
                                const ModelAdapter& adapter,
                                const PosTagger& tagger,
                                const ProbeConfig& config) {
    if (config.seeds.empty()) {
        throw Error(ErrorCode::InvalidArgument, "model_knowledge_score: no seeds");
    }
    if (config.sigma_prime < 0.0) {
        throw Error(ErrorCode::InvalidArgument,
                    "model_knowledge_score: sigma_prime must be >= 0");
    }

    std::vector<bool> mask = pos_mask(pair, tagger, config.pos_set);
    const size_t n_scored = size_t(std::count(mask.begin(), mask.end(), true));
    if (n_scored == 0) {
        throw Error(ErrorCode::NoScorableTokens,
                    "no generated token qualifies for the POS set");
    }

    MksResult result;
    result.familiarity = familiarity(subject.tokens, adapter);
    result.sigma = config.sigma_prime * result.familiarity;
    result.n_scored_tokens = n_scored;
    result.seeds = config.seeds;

    TokenSequence concat = pair.concat_tokens();
    EmbeddingSequence emb = adapter.embed(concat);
    DistributionMatrix base = adapter.forward_from_embeddings(emb);

    const size_t m = pair.boundary();
    const size_t k = subject.tokens.size();
    result.per_seed.reserve(config.seeds.size());
    for (uint64_t seed : config.seeds) {
        EmbeddingSequence noisy = perturb(emb, subject.occurrences, k, result.sigma, seed);
        DistributionMatrix hat = adapter.forward_from_embeddings(noisy);
        double acc = 0.0;
        for (size_t g = 0; g < pair.gen_tokens.size(); ++g) {
            if (!mask[g]) continue;
            acc += kl_divergence(base.row(m + g), hat.row(m + g), config.kl_log_base);
        }
        result.per_seed.push_back(acc / double(n_scored));
    }

    double total = 0.0;
    for (double s : result.per_seed) total += s;
    result.score = total / double(result.per_seed.size());
    return result;
}

} // namespace knowprobe
