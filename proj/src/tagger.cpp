#include "knowprobe/tagger.hpp"

#include <algorithm>
#include <fstream>

#include "knowprobe/toy_lm.hpp"

namespace knowprobe {

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return s;
}

} // namespace

LexiconTagger::LexiconTagger(std::unordered_map<std::string, std::string> lexicon) {
    lexicon_.reserve(lexicon.size());
    for (auto& [word, pos] : lexicon) {
        lexicon_[to_lower(word)] = pos;
    }
}

LexiconTagger LexiconTagger::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open lexicon file: " + path);
    }
    std::unordered_map<std::string, std::string> lexicon;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
            throw Error(ErrorCode::ParseError,
                        path + ":" + std::to_string(lineno) + ": expected token<TAB>POS");
        }
        lexicon[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return LexiconTagger(std::move(lexicon));
}

std::optional<std::string> LexiconTagger::tag(const std::string& word) const {
    auto it = lexicon_.find(to_lower(word));
    if (it == lexicon_.end()) return std::nullopt;
    return it->second;
}

std::unique_ptr<PosTagger> make_toy_tagger() {
    std::unordered_map<std::string, std::string> lex = {
        {"what", "PRON"}, {"is", "AUX"}, {"the", "DET"}, {"of", "ADP"},
        {"in", "ADP"}, {"at", "ADP"}, {"it", "PRON"}, {"and", "CCONJ"},
        {"habitat", "NOUN"}, {"food", "NOUN"}, {"time", "NOUN"},
        {"lives", "VERB"}, {"likes", "VERB"}, {"shows", "VERB"},
        {"big", "ADJ"}, {"small", "ADJ"},
        {"one", "NUM"}, {"two", "NUM"},
        // letters are deliberately untagged playground symbols
        {"a", "X"}, {"b", "X"}, {"c", "X"}, {"d", "X"}, {"e", "X"}, {"f", "X"},
    };
    for (const auto& c : ToyLm::known_creatures()) lex[c.name] = "PROPN";
    for (const auto& u : ToyLm::unknown_creatures()) lex[u] = "PROPN";
    for (const auto& fact : {"cliffs", "marsh", "dunes", "tundra", "moss", "bugs",
                             "roots", "kelp", "dawn", "dusk", "night", "noon"}) {
        lex[fact] = "NOUN";
    }
    for (const auto& filler : ToyLm::filler_nouns()) lex[filler] = "NOUN";
    return std::make_unique<LexiconTagger>(std::move(lex));
}

std::unique_ptr<PosTagger> make_tagger(const TaggerConfig& config) {
    if (config.backend == "toy") {
        return make_toy_tagger();
    }
    if (config.backend == "lexicon") {
        if (config.lexicon_path.empty()) {
            throw Error(ErrorCode::InvalidArgument,
                        "tagger.backend=lexicon requires tagger.lexicon_path");
        }
        return std::make_unique<LexiconTagger>(LexiconTagger::from_file(config.lexicon_path));
    }
    throw Error(ErrorCode::CapabilityUnsupported,
                "unknown tagger backend '" + config.backend + "'");
}

} // namespace knowprobe
