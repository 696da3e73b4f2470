#include "knowprobe/toy_lm.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

namespace knowprobe {

namespace {

// Fixed vocabulary. Order is load-bearing: ids are published and tests pin
// them (e.g. "a b a" -> [1, 2, 1]).
const std::vector<std::string> kSymbols = {
    "<s>",                                                        // 0
    "a", "b", "c", "d", "e", "f",                                 // 1..6 letters
    "what", "is", "the", "of", "in", "at", "it", "and",           // 7..14 function words
    "habitat", "food", "time",                                    // 15..17 category nouns
    "lives", "likes", "shows",                                    // 18..20 verbs
    "big", "small",                                               // 21..22 adjectives
    "one", "two",                                                 // 23..24 numerals
    "grib", "tove", "marl", "plik", "dorn", "vex", "brum", "snat",        // 25..32 known
    "cliffs", "marsh", "dunes", "tundra",                         // 33..36 habitats
    "moss", "bugs", "roots", "kelp",                              // 37..40 diets
    "dawn", "dusk", "night", "noon",                              // 41..44 activities
    "thing", "place", "stuff", "kind", "sort", "bit", "part", "lot",      // 45..52 filler
    "vrax", "zorp", "quen", "yilt", "nubb", "osk", "pell", "gorv",        // 53..60 unknown
};

const std::vector<ToyLm::CreatureFacts> kKnownCreatures = {
    {"grib", {"cliffs", "moss", "dawn"}},
    {"tove", {"marsh", "bugs", "dusk"}},
    {"marl", {"cliffs", "bugs", "night"}},
    {"plik", {"dunes", "kelp", "dawn"}},
    {"dorn", {"tundra", "roots", "dusk"}},
    {"vex", {"dunes", "moss", "night"}},
    {"brum", {"tundra", "kelp", "noon"}},
    {"snat", {"marsh", "roots", "noon"}},
};

const std::vector<std::string> kUnknownCreatures = {
    "vrax", "zorp", "quen", "yilt", "nubb", "osk", "pell", "gorv",
};

const std::vector<std::string> kFillerNouns = {
    "thing", "place", "stuff", "kind", "sort", "bit", "part", "lot",
};

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

} // namespace

const std::vector<ToyLm::CreatureFacts>& ToyLm::known_creatures() { return kKnownCreatures; }
const std::vector<std::string>& ToyLm::unknown_creatures() { return kUnknownCreatures; }
const std::vector<std::string>& ToyLm::filler_nouns() { return kFillerNouns; }

ToyLm::ToyLm() {
    symbols_ = kSymbols;
    for (TokenId i = 0; i < static_cast<TokenId>(symbols_.size()); ++i) {
        symbol_ids_[symbols_[i]] = i;
    }

    const size_t v = symbols_.size();

    // Salience drives the toy attention head: creatures stand out, content
    // nouns mildly, everything else is background.
    salience_.assign(v, 0.0);
    for (const auto& c : kKnownCreatures) salience_[symbol_ids_[c.name]] = 4.0;
    for (const auto& u : kUnknownCreatures) salience_[symbol_ids_[u]] = 4.0;
    for (TokenId id = symbol_ids_["habitat"]; id <= symbol_ids_["time"]; ++id) salience_[id] = 1.0;
    for (TokenId id = symbol_ids_["cliffs"]; id <= symbol_ids_["lot"]; ++id) salience_[id] = 1.0;

    // Transition table T[src][next], then W[next][src] = ln T (floored).
    std::vector<std::vector<double>> t(v, std::vector<double>(v, 0.0));

    auto uniform_row = [&](TokenId src) {
        for (size_t next = 1; next < v; ++next) t[src][next] = 1.0 / double(v - 1);
    };

    uniform_row(0);  // <s>

    // Letters: pinned edges for the bigram oracles.
    t[symbol_ids_["a"]][symbol_ids_["b"]] = 1.0;
    t[symbol_ids_["b"]][symbol_ids_["a"]] = 1.0;
    t[symbol_ids_["c"]][symbol_ids_["c"]] = 1.0;
    t[symbol_ids_["d"]][symbol_ids_["e"]] = 1.0 / 4.0;
    t[symbol_ids_["d"]][symbol_ids_["f"]] = 3.0 / 4.0;
    // Tuned so that P(f | d e) under mean pooling is exactly 1/10:
    // odds(e:f | d e) = sqrt((1/4 * 243/244) / (3/4 * 1/244)) = sqrt(81) = 9.
    t[symbol_ids_["e"]][symbol_ids_["e"]] = 243.0 / 244.0;
    t[symbol_ids_["e"]][symbol_ids_["f"]] = 1.0 / 244.0;
    t[symbol_ids_["f"]][symbol_ids_["f"]] = 1.0;

    // Function words, category nouns, verbs, adjectives, numerals, facts and
    // filler all have uniform rows: their columns are constant, so they are
    // transparent to the softmax and only creatures carry signal.
    for (TokenId id = symbol_ids_["what"]; id <= symbol_ids_["two"]; ++id) uniform_row(id);
    for (TokenId id = symbol_ids_["cliffs"]; id <= symbol_ids_["lot"]; ++id) uniform_row(id);

    // Known creatures emit their three facts uniformly.
    for (const auto& c : kKnownCreatures) {
        for (const auto& fact : c.facts) {
            t[symbol_ids_[c.name]][symbol_ids_[fact]] = 1.0 / 3.0;
        }
    }

    // Unknown creatures emit filler nouns with mildly varied weights
    // (8 + (j + k) mod 8, normalized). The variation keeps per-filler rows
    // of W from being exactly identical without giving any creature real
    // structure to lose under perturbation.
    for (size_t j = 0; j < kUnknownCreatures.size(); ++j) {
        TokenId src = symbol_ids_[kUnknownCreatures[j]];
        double total = 0.0;
        std::vector<double> w(kFillerNouns.size());
        for (size_t k = 0; k < kFillerNouns.size(); ++k) {
            w[k] = 8.0 + double((j + k) % 8);
            total += w[k];
        }
        for (size_t k = 0; k < kFillerNouns.size(); ++k) {
            t[src][symbol_ids_[kFillerNouns[k]]] = w[k] / total;
        }
    }

    weight_.assign(v * v, kLogFloor);
    for (size_t src = 0; src < v; ++src) {
        for (size_t next = 0; next < v; ++next) {
            if (t[src][next] > 0.0) {
                weight_[next * v + src] = std::max(std::log(t[src][next]), kLogFloor);
            }
        }
    }
}

TokenId ToyLm::id_of(const std::string& symbol) const {
    auto it = symbol_ids_.find(symbol);
    if (it == symbol_ids_.end()) {
        throw Error(ErrorCode::OutOfVocabulary, "unknown toy symbol: '" + symbol + "'");
    }
    return it->second;
}

double ToyLm::transition(TokenId src, TokenId next) const {
    const size_t v = symbols_.size();
    double w = weight_[size_t(next) * v + size_t(src)];
    return w <= kLogFloor ? 0.0 : std::exp(w);
}

TokenSequence ToyLm::tokenize(const std::string& text) const {
    if (text.empty()) {
        throw Error(ErrorCode::EmptyInput, "tokenize: empty input");
    }
    TokenSequence out;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        if (i >= text.size()) break;
        size_t begin = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        std::string word = text.substr(begin, i - begin);
        out.ids.push_back(id_of(word));
        out.offsets.push_back({begin, i});
    }
    if (out.ids.empty()) {
        throw Error(ErrorCode::EmptyInput, "tokenize: no tokens in input");
    }
    return out;
}

std::string ToyLm::detokenize(const TokenSequence& tokens) const {
    std::string out;
    for (size_t i = 0; i < tokens.ids.size(); ++i) {
        TokenId id = tokens.ids[i];
        if (id < 0 || size_t(id) >= symbols_.size()) {
            throw Error(ErrorCode::OutOfVocabulary, "detokenize: id out of range");
        }
        if (i > 0) out += ' ';
        out += symbols_[id];
    }
    return out;
}

EmbeddingSequence ToyLm::embed(const TokenSequence& tokens) const {
    const size_t v = symbols_.size();
    EmbeddingSequence emb;
    emb.dim = v;
    emb.data.assign(tokens.size() * v, 0.0);
    for (size_t i = 0; i < tokens.size(); ++i) {
        TokenId id = tokens.ids[i];
        if (id < 0 || size_t(id) >= v) {
            throw Error(ErrorCode::OutOfVocabulary, "embed: id out of range");
        }
        emb.data[i * v + size_t(id)] = 1.0;
    }
    return emb;
}

std::vector<double> ToyLm::logits_for_mean(std::span<const double> mean) const {
    const size_t v = symbols_.size();
    std::vector<double> logits(v, 0.0);
    for (size_t next = 0; next < v; ++next) {
        const double* row = weight_.data() + next * v;
        double acc = 0.0;
        for (size_t src = 0; src < v; ++src) acc += row[src] * mean[src];
        logits[next] = acc;
    }
    return logits;
}

void ToyLm::softmax_inplace(std::span<double> logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& x : logits) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : logits) x /= sum;
}

DistributionMatrix ToyLm::forward_from_embeddings(const EmbeddingSequence& emb) const {
    const size_t v = symbols_.size();
    if (emb.dim != v) {
        throw Error(ErrorCode::DimensionMismatch,
                    "forward_from_embeddings: dim " + std::to_string(emb.dim) +
                        " != " + std::to_string(v));
    }
    const size_t n = emb.length();
    if (n == 0) {
        throw Error(ErrorCode::EmptyInput, "forward_from_embeddings: empty sequence");
    }
    DistributionMatrix out;
    out.vocab = v;
    out.data.resize(n * v);

    std::vector<double> running(v, 0.0);
    for (size_t i = 0; i < n; ++i) {
        auto e = emb.row(i);
        for (size_t k = 0; k < v; ++k) running[k] += e[k];
        std::vector<double> mean(v);
        for (size_t k = 0; k < v; ++k) mean[k] = running[k] / double(i + 1);
        std::vector<double> logits = logits_for_mean(mean);
        softmax_inplace(logits);
        std::copy(logits.begin(), logits.end(), out.data.begin() + i * v);
    }
    return out;
}

DistributionMatrix ToyLm::forward_tokens(const TokenSequence& tokens) const {
    // Column-mean route: mean of one-hot embeddings selects columns of W.
    const size_t v = symbols_.size();
    if (tokens.empty()) {
        throw Error(ErrorCode::EmptyInput, "forward_tokens: empty sequence");
    }
    DistributionMatrix out;
    out.vocab = v;
    out.data.resize(tokens.size() * v);

    std::vector<double> colsum(v, 0.0);
    for (size_t i = 0; i < tokens.size(); ++i) {
        TokenId id = tokens.ids[i];
        if (id < 0 || size_t(id) >= v) {
            throw Error(ErrorCode::OutOfVocabulary, "forward_tokens: id out of range");
        }
        for (size_t next = 0; next < v; ++next) colsum[next] += weight_[next * v + size_t(id)];
        std::vector<double> logits(v);
        for (size_t next = 0; next < v; ++next) logits[next] = colsum[next] / double(i + 1);
        softmax_inplace(logits);
        std::copy(logits.begin(), logits.end(), out.data.begin() + i * v);
    }
    return out;
}

std::vector<double> ToyLm::bos_distribution() const {
    const size_t v = symbols_.size();
    std::vector<double> logits(v);
    for (size_t next = 0; next < v; ++next) logits[next] = weight_[next * v + 0];
    softmax_inplace(logits);
    return logits;
}

std::vector<std::vector<double>> ToyLm::attention_matrix(const TokenizedPair& pair) const {
    const size_t total = pair.total();
    std::vector<std::vector<double>> att(total, std::vector<double>(total, 0.0));
    for (size_t q = 0; q < total; ++q) {
        double sum = 0.0;
        for (size_t k = 0; k <= q; ++k) {
            double w = std::exp(salience_[pair.token_at(k)]);
            att[q][k] = w;
            sum += w;
        }
        for (size_t k = 0; k <= q; ++k) att[q][k] /= sum;
    }
    return att;
}

AttentionSummary ToyLm::attention_received(const TokenizedPair& pair) const {
    if (pair.gen_tokens.empty()) {
        throw Error(ErrorCode::EmptyInput, "attention_received: no generated tokens");
    }
    const size_t m = pair.boundary();
    auto att = attention_matrix(pair);
    AttentionSummary summary;
    summary.received.assign(m, 0.0);
    for (size_t q = m; q < pair.total(); ++q) {
        for (size_t k = 0; k < m; ++k) summary.received[k] += att[q][k];
    }
    return summary;
}

std::vector<double> ToyLm::token_logprobs(const TokenSequence& tokens) const {
    if (tokens.empty()) {
        throw Error(ErrorCode::EmptyInput, "token_logprobs: empty sequence");
    }
    std::vector<double> out;
    out.reserve(tokens.size());

    std::vector<double> bos = bos_distribution();
    out.push_back(std::min(std::log(bos[tokens.ids[0]]), 0.0));

    if (tokens.size() > 1) {
        DistributionMatrix dist = forward_tokens(tokens);
        for (size_t i = 1; i < tokens.size(); ++i) {
            double p = dist.row(i - 1)[tokens.ids[i]];
            out.push_back(std::min(std::log(p), 0.0));
        }
    }
    return out;
}

std::vector<std::string> ToyLm::sample_generations(const std::string& prompt,
                                                   int n,
                                                   double temperature,
                                                   uint64_t seed) const {
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "sample_generations: n must be >= 1");
    }
    if (!(temperature > 0.0)) {
        throw Error(ErrorCode::InvalidArgument,
                    "sample_generations: temperature must be > 0");
    }
    TokenSequence prompt_tokens = tokenize(prompt);
    const size_t v = symbols_.size();

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::string> out;
    out.reserve(size_t(n));
    for (int s = 0; s < n; ++s) {
        TokenSequence seq = prompt_tokens;
        std::vector<double> colsum(v, 0.0);
        for (TokenId id : seq.ids) {
            for (size_t next = 0; next < v; ++next) colsum[next] += weight_[next * v + size_t(id)];
        }
        std::string text;
        for (int step = 0; step < kMaxNewTokens; ++step) {
            std::vector<double> logits(v);
            for (size_t next = 0; next < v; ++next) {
                logits[next] = colsum[next] / double(seq.ids.size()) / temperature;
            }
            softmax_inplace(logits);
            double r = unit(rng);
            double acc = 0.0;
            TokenId pick = TokenId(v - 1);
            for (size_t next = 0; next < v; ++next) {
                acc += logits[next];
                if (r < acc) {
                    pick = TokenId(next);
                    break;
                }
            }
            if (step > 0) text += ' ';
            text += symbols_[pick];
            seq.ids.push_back(pick);
            for (size_t next = 0; next < v; ++next) colsum[next] += weight_[next * v + size_t(pick)];
        }
        out.push_back(std::move(text));
    }
    return out;
}

void register_toy_backend() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        BackendRegistry::instance().register_backend(
            "toy", [](const ModelConfig&) { return std::make_unique<ToyLm>(); });
    });
}

} // namespace knowprobe
