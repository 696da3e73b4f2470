#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "knowprobe/pipeline.hpp"

namespace knowprobe {

inline constexpr int kDatasetSchemaVersion = 1;

/// Strict JSONL loader. The first line must be the schema header
/// {"schema": 1}; each following line is one example object
/// {id, prompt, text, label[, split]}. Malformed lines, bad labels and
/// duplicate ids are reported with their line number.
std::vector<LabeledExample> load_dataset(const std::string& path);

void save_dataset(const std::string& path, const std::vector<LabeledExample>& examples);

std::vector<LabeledExample> filter_split(const std::vector<LabeledExample>& examples,
                                         const std::string& split);

/// Deterministic three-class dataset for the toy backend:
///   aligned     known creature, text sampled from the model itself
///   misaligned  known creature, the sampled facts swapped to other
///               creatures' facts
///   fabricated  unknown creature, sampled filler text
/// One template per creature goes to the validation split, the rest to
/// test. Validation fabricated texts restate the subject several times so
/// the calibrated threshold covers the high end of the fabricated range.
/// The same seed always produces the same examples, byte for byte.
std::vector<LabeledExample> generate_synthetic_fixture(uint64_t seed);

} // namespace knowprobe
