#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>

#include "knowprobe/errors.hpp"

namespace knowprobe {

/// Word-level part-of-speech tagger. Tags are universal POS strings
/// ("NOUN", "PROPN", "VERB", "ADJ", "NUM", "DET", "ADP", "AUX", ...).
class PosTagger {
public:
    virtual ~PosTagger() = default;

    /// Tag for a single word, or nullopt when the word is unknown.
    /// Lookup is case-insensitive.
    virtual std::optional<std::string> tag(const std::string& word) const = 0;
};

/// Fixed lookup-table tagger. Deterministic by construction; the backing
/// table comes either from a TSV lexicon file (token<TAB>POS per line) or
/// from an in-memory map.
class LexiconTagger : public PosTagger {
public:
    explicit LexiconTagger(std::unordered_map<std::string, std::string> lexicon);

    static LexiconTagger from_file(const std::string& path);

    std::optional<std::string> tag(const std::string& word) const override;

    size_t size() const { return lexicon_.size(); }

private:
    std::unordered_map<std::string, std::string> lexicon_;  // lowercased keys
};

struct TaggerConfig {
    std::string backend = "toy";   // "toy" | "lexicon"
    std::string lexicon_path;      // required for "lexicon"
};

/// Built-in lexicon covering the toy vocabulary plus a few words used in
/// documentation examples.
std::unique_ptr<PosTagger> make_toy_tagger();

std::unique_ptr<PosTagger> make_tagger(const TaggerConfig& config);

} // namespace knowprobe
