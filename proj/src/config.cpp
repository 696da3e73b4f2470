#include "knowprobe/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace knowprobe {

using ordered_json = nlohmann::ordered_json;

namespace {

const char* env(const char* name) { return std::getenv(name); }

std::vector<uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<uint64_t> seeds;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) {
        throw Error(ErrorCode::InvalidArgument, "seed list must not be empty");
    }
    return seeds;
}

} // namespace

RunConfig run_config_from_json(const ordered_json& j) {
    RunConfig c;
    if (j.contains("model")) {
        const auto& m = j["model"];
        if (m.contains("backend")) c.model.backend = m["backend"].get<std::string>();
        if (m.contains("name")) c.model.name = m["name"].get<std::string>();
        if (m.contains("device")) c.model.device = m["device"].get<std::string>();
    }
    if (j.contains("tagger")) {
        const auto& t = j["tagger"];
        if (t.contains("backend")) c.tagger.backend = t["backend"].get<std::string>();
        if (t.contains("lexicon_path")) c.tagger.lexicon_path = t["lexicon_path"].get<std::string>();
    }
    if (j.contains("probe")) {
        const auto& p = j["probe"];
        if (p.contains("sigma_prime")) c.probe.sigma_prime = p["sigma_prime"].get<double>();
        if (p.contains("seeds")) c.probe.seeds = p["seeds"].get<std::vector<uint64_t>>();
        if (p.contains("pos_set")) {
            c.probe.pos_set.clear();
            for (const auto& tag : p["pos_set"]) c.probe.pos_set.insert(tag.get<std::string>());
        }
        if (p.contains("kl_log_base")) c.probe.kl_log_base = p["kl_log_base"].get<double>();
    }
    if (j.contains("alignment")) {
        const auto& a = j["alignment"];
        if (a.contains("n_samples")) c.alignment.n_samples = a["n_samples"].get<int>();
        if (a.contains("temperature")) c.alignment.temperature = a["temperature"].get<double>();
        if (a.contains("scorer")) c.alignment.scorer = a["scorer"].get<std::string>();
        if (a.contains("ngram_order")) c.alignment.ngram_order = a["ngram_order"].get<int>();
        if (a.contains("threshold")) c.alignment.threshold = a["threshold"].get<double>();
        if (a.contains("sample_seed")) c.alignment.sample_seed = a["sample_seed"].get<uint64_t>();
    }
    if (j.contains("thresholds")) {
        c.thresholds.tau = j["thresholds"].value("tau", 0.0);
        c.thresholds.theta = j["thresholds"].value("theta", 0.0);
        c.has_thresholds = true;
    }
    if (j.contains("output")) {
        if (j["output"].contains("dir")) c.output_dir = j["output"]["dir"].get<std::string>();
    }
    return c;
}

ordered_json run_config_to_json(const RunConfig& c) {
    ordered_json j;
    j["model"] = {{"backend", c.model.backend}, {"name", c.model.name}, {"device", c.model.device}};
    j["tagger"] = {{"backend", c.tagger.backend}, {"lexicon_path", c.tagger.lexicon_path}};
    j["probe"] = {{"sigma_prime", c.probe.sigma_prime},
                  {"seeds", c.probe.seeds},
                  {"pos_set", std::vector<std::string>(c.probe.pos_set.begin(), c.probe.pos_set.end())},
                  {"kl_log_base", c.probe.kl_log_base}};
    j["alignment"] = {{"n_samples", c.alignment.n_samples},
                      {"temperature", c.alignment.temperature},
                      {"scorer", c.alignment.scorer},
                      {"ngram_order", c.alignment.ngram_order},
                      {"threshold", c.alignment.threshold},
                      {"sample_seed", c.alignment.sample_seed}};
    if (c.has_thresholds) {
        j["thresholds"] = {{"tau", c.thresholds.tau}, {"theta", c.thresholds.theta}};
    }
    j["output"] = {{"dir", c.output_dir}};
    return j;
}

RunConfig load_run_config(const std::string& path) {
    RunConfig config;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) {
            throw Error(ErrorCode::IoError, "cannot open config: " + path);
        }
        ordered_json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ParseError, path + ": " + e.what());
        }
        config = run_config_from_json(j);
    }
    apply_env_overrides(config);
    return config;
}

void apply_env_overrides(RunConfig& c) {
    if (const char* v = env("KNOWPROBE_MODEL_BACKEND")) c.model.backend = v;
    if (const char* v = env("KNOWPROBE_MODEL_NAME")) c.model.name = v;
    if (const char* v = env("KNOWPROBE_MODEL_DEVICE")) c.model.device = v;
    if (const char* v = env("KNOWPROBE_TAGGER_BACKEND")) c.tagger.backend = v;
    if (const char* v = env("KNOWPROBE_TAGGER_LEXICON_PATH")) c.tagger.lexicon_path = v;
    if (const char* v = env("KNOWPROBE_PROBE_SIGMA_PRIME")) c.probe.sigma_prime = std::stod(v);
    if (const char* v = env("KNOWPROBE_PROBE_SEEDS")) c.probe.seeds = parse_seed_list(v);
    if (const char* v = env("KNOWPROBE_ALIGNMENT_N_SAMPLES")) c.alignment.n_samples = std::stoi(v);
    if (const char* v = env("KNOWPROBE_ALIGNMENT_TEMPERATURE")) c.alignment.temperature = std::stod(v);
    if (const char* v = env("KNOWPROBE_ALIGNMENT_NGRAM_ORDER")) c.alignment.ngram_order = std::stoi(v);
    if (const char* v = env("KNOWPROBE_ALIGNMENT_SAMPLE_SEED")) c.alignment.sample_seed = std::stoull(v);
    if (const char* v = env("KNOWPROBE_OUTPUT_DIR")) c.output_dir = v;
}

} // namespace knowprobe
