#pragma once

#include <string>

#include <json.hpp>

#include "knowprobe/alignment.hpp"
#include "knowprobe/model.hpp"
#include "knowprobe/pipeline.hpp"
#include "knowprobe/probe.hpp"
#include "knowprobe/tagger.hpp"

namespace knowprobe {

/// Full run configuration. Every report echoes the materialized config so
/// results carry their provenance.
struct RunConfig {
    ModelConfig model;
    TaggerConfig tagger;
    ProbeConfig probe;
    AlignmentConfig alignment;
    Thresholds thresholds;
    bool has_thresholds = false;
    std::string output_dir = "out";
};

/// Reads a JSON config file (all keys optional, defaults fill the gaps),
/// then applies KNOWPROBE_* environment overrides. An empty path yields the
/// default config plus overrides.
RunConfig load_run_config(const std::string& path);

/// Environment overrides, applied on top of whatever was loaded:
///   KNOWPROBE_MODEL_BACKEND, KNOWPROBE_MODEL_NAME, KNOWPROBE_MODEL_DEVICE,
///   KNOWPROBE_TAGGER_BACKEND, KNOWPROBE_TAGGER_LEXICON_PATH,
///   KNOWPROBE_PROBE_SIGMA_PRIME, KNOWPROBE_PROBE_SEEDS (comma-separated),
///   KNOWPROBE_ALIGNMENT_N_SAMPLES, KNOWPROBE_ALIGNMENT_TEMPERATURE,
///   KNOWPROBE_ALIGNMENT_NGRAM_ORDER, KNOWPROBE_ALIGNMENT_SAMPLE_SEED,
///   KNOWPROBE_OUTPUT_DIR
void apply_env_overrides(RunConfig& config);

RunConfig run_config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json run_config_to_json(const RunConfig& config);

} // namespace knowprobe
