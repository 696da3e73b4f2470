#include "knowprobe/dataset.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "knowprobe/toy_lm.hpp"

namespace knowprobe {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail_at(const std::string& path, size_t lineno, const std::string& msg) {
    throw Error(ErrorCode::ParseError,
                path + ":" + std::to_string(lineno) + ": " + msg);
}

} // namespace

std::vector<LabeledExample> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open dataset: " + path);
    }
    std::vector<LabeledExample> examples;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ordered_json obj;
        try {
            obj = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail_at(path, lineno, std::string("malformed JSON: ") + e.what());
        }
        if (!obj.is_object()) fail_at(path, lineno, "expected a JSON object");

        if (!have_header) {
            if (!obj.contains("schema")) fail_at(path, lineno, "missing schema header line");
            if (obj["schema"] != kDatasetSchemaVersion) {
                fail_at(path, lineno, "unsupported schema version");
            }
            have_header = true;
            continue;
        }

        LabeledExample ex;
        for (const char* field : {"id", "prompt", "text", "label"}) {
            if (!obj.contains(field) || !obj[field].is_string()) {
                fail_at(path, lineno, std::string("missing string field '") + field + "'");
            }
        }
        ex.id = obj["id"].get<std::string>();
        ex.prompt = obj["prompt"].get<std::string>();
        ex.text = obj["text"].get<std::string>();
        auto label = parse_label(obj["label"].get<std::string>());
        if (!label) {
            fail_at(path, lineno, "invalid label '" + obj["label"].get<std::string>() + "'");
        }
        ex.label = *label;
        if (obj.contains("split")) {
            ex.split = obj["split"].get<std::string>();
            if (ex.split != "validation" && ex.split != "test") {
                fail_at(path, lineno, "invalid split '" + ex.split + "'");
            }
        }
        if (ex.id.empty()) fail_at(path, lineno, "empty id");
        if (!seen_ids.insert(ex.id).second) {
            fail_at(path, lineno, "duplicate id '" + ex.id + "'");
        }
        examples.push_back(std::move(ex));
    }
    if (!have_header) {
        throw Error(ErrorCode::ParseError, path + ": empty dataset (no schema header)");
    }
    return examples;
}

void save_dataset(const std::string& path, const std::vector<LabeledExample>& examples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write dataset: " + path);
    }
    out << ordered_json{{"schema", kDatasetSchemaVersion}}.dump() << "\n";
    for (const auto& ex : examples) {
        ordered_json obj;
        obj["id"] = ex.id;
        obj["prompt"] = ex.prompt;
        obj["text"] = ex.text;
        obj["label"] = label_name(ex.label);
        if (!ex.split.empty()) obj["split"] = ex.split;
        out << obj.dump() << "\n";
    }
}

std::vector<LabeledExample> filter_split(const std::vector<LabeledExample>& examples,
                                         const std::string& split) {
    if (split.empty()) return examples;
    std::vector<LabeledExample> out;
    for (const auto& ex : examples) {
        if (ex.split == split) out.push_back(ex);
    }
    return out;
}

namespace {

uint64_t mix_seed(uint64_t base, uint64_t salt) {
    uint64_t x = base ^ (salt * 0x9e3779b97f4a7c15ULL);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

const std::array<std::string, 3> kPromptCategories = {"habitat", "food", "time"};

/// Swap each fact token to the next fact in its pool that does not belong
/// to the creature; non-fact tokens pass through.
std::string swap_facts(const std::string& text, const ToyLm::CreatureFacts& creature) {
    static const std::vector<std::vector<std::string>> pools = {
        {"cliffs", "marsh", "dunes", "tundra"},
        {"moss", "bugs", "roots", "kelp"},
        {"dawn", "dusk", "night", "noon"},
    };
    std::istringstream in(text);
    std::ostringstream out;
    std::string word;
    bool first = true;
    while (in >> word) {
        std::string replaced = word;
        for (const auto& pool : pools) {
            for (size_t i = 0; i < pool.size(); ++i) {
                if (pool[i] != word) continue;
                size_t j = (i + 1) % pool.size();
                while (std::find(creature.facts.begin(), creature.facts.end(), pool[j]) !=
                       creature.facts.end()) {
                    j = (j + 1) % pool.size();
                }
                replaced = pool[j];
            }
        }
        if (!first) out << ' ';
        out << replaced;
        first = false;
    }
    return out.str();
}

/// Interleave extra subject mentions into the sampled words.
std::string restate_subject(const std::string& name, const std::string& sample, int every) {
    std::istringstream in(sample);
    std::ostringstream out;
    out << name;
    std::string word;
    int count = 0;
    while (in >> word) {
        out << ' ' << word;
        if (++count % every == 0) out << ' ' << name;
    }
    return out.str();
}

} // namespace

std::vector<LabeledExample> generate_synthetic_fixture(uint64_t seed) {
    ToyLm model;
    std::vector<LabeledExample> examples;

    auto prompt_for = [](const std::string& category, const std::string& name) {
        return "what is the " + category + " of " + name;
    };
    auto split_for = [](size_t template_idx) {
        return template_idx == 0 ? std::string("validation") : std::string("test");
    };

    const auto& known = ToyLm::known_creatures();
    for (size_t c = 0; c < known.size(); ++c) {
        for (size_t t = 0; t < kPromptCategories.size(); ++t) {
            std::string prompt = prompt_for(kPromptCategories[t], known[c].name);
            uint64_t sample_seed = mix_seed(seed, c * 16 + t);
            std::string sample = model.sample_generations(prompt, 1, 1.0, sample_seed)[0];

            LabeledExample aligned;
            aligned.id = "aligned-" + known[c].name + "-" + kPromptCategories[t];
            aligned.prompt = prompt;
            aligned.text = known[c].name + " " + sample;
            aligned.label = ReasoningLabel::Aligned;
            aligned.split = split_for(t);
            examples.push_back(std::move(aligned));

            LabeledExample misaligned;
            misaligned.id = "misaligned-" + known[c].name + "-" + kPromptCategories[t];
            misaligned.prompt = prompt;
            misaligned.text = known[c].name + " " + swap_facts(sample, known[c]);
            misaligned.label = ReasoningLabel::Misaligned;
            misaligned.split = split_for(t);
            examples.push_back(std::move(misaligned));
        }
    }

    const auto& unknown = ToyLm::unknown_creatures();
    for (size_t c = 0; c < unknown.size(); ++c) {
        for (size_t t = 0; t < kPromptCategories.size(); ++t) {
            std::string prompt = prompt_for(kPromptCategories[t], unknown[c]);
            uint64_t sample_seed = mix_seed(seed, 0x1000 + c * 16 + t);
            std::string sample = model.sample_generations(prompt, 1, 1.0, sample_seed)[0];

            LabeledExample fabricated;
            fabricated.id = "fabricated-" + unknown[c] + "-" + kPromptCategories[t];
            fabricated.prompt = prompt;
            // Validation texts restate the subject so that the fabricated
            // score range seen at calibration covers the test range.
            fabricated.text = t == 0 ? restate_subject(unknown[c], sample, 2)
                                     : unknown[c] + " " + sample;
            fabricated.label = ReasoningLabel::Fabricated;
            fabricated.split = split_for(t);
            examples.push_back(std::move(fabricated));
        }
    }
    return examples;
}

} // namespace knowprobe
