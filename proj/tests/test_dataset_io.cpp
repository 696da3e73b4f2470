#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "knowprobe/config.hpp"
#include "knowprobe/dataset.hpp"
#include "knowprobe/reports.hpp"

using namespace knowprobe;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("dataset round-trips through JSONL") {
    TempFile tmp("roundtrip.jsonl");
    std::vector<LabeledExample> examples;
    LabeledExample ex;
    ex.id = "nec-pika-1";
    ex.prompt = "What is the habitat of Pika?";
    ex.text = "Pika is found in rocky areas with sparse vegetation.";
    ex.label = ReasoningLabel::Aligned;
    ex.split = "validation";
    examples.push_back(ex);
    ex.id = "nec-pika-2";
    ex.text = "Pika is found in open steppe land.";
    ex.label = ReasoningLabel::Misaligned;
    ex.split = "test";
    examples.push_back(ex);
    ex.id = "line\nbreak";
    ex.prompt = "multi\nline \"quoted\" prompt";
    ex.label = ReasoningLabel::Fabricated;
    ex.split = "";
    examples.push_back(ex);

    save_dataset(tmp.path, examples);
    auto loaded = load_dataset(tmp.path);
    REQUIRE(loaded.size() == examples.size());
    for (size_t i = 0; i < examples.size(); ++i) {
        CHECK(loaded[i].id == examples[i].id);
        CHECK(loaded[i].prompt == examples[i].prompt);
        CHECK(loaded[i].text == examples[i].text);
        CHECK(loaded[i].label == examples[i].label);
        CHECK(loaded[i].split == examples[i].split);
    }
}

TEST_CASE("loader reports the offending line") {
    TempFile tmp("bad.jsonl");
    {
        std::ofstream out(tmp.path);
        out << R"({"schema": 1})" << "\n";
        out << R"({"id": "a", "prompt": "p", "text": "t", "label": "aligned"})" << "\n";
        out << R"({"id": "b", "prompt": "p", "text": "t", "label": "unknown"})" << "\n";
    }
    try {
        load_dataset(tmp.path);
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
        CHECK(std::string(e.what()).find("unknown") != std::string::npos);
    }
}

TEST_CASE("loader rejects duplicates, bad JSON and missing header") {
    TempFile tmp("bad2.jsonl");
    {
        std::ofstream out(tmp.path);
        out << R"({"schema": 1})" << "\n";
        out << R"({"id": "a", "prompt": "p", "text": "t", "label": "aligned"})" << "\n";
        out << R"({"id": "a", "prompt": "p", "text": "t", "label": "aligned"})" << "\n";
    }
    CHECK_THROWS_AS(load_dataset(tmp.path), Error);

    {
        std::ofstream out(tmp.path);
        out << R"({"schema": 1})" << "\n";
        out << "{not json\n";
    }
    CHECK_THROWS_AS(load_dataset(tmp.path), Error);

    {
        std::ofstream out(tmp.path);
        out << R"({"id": "a", "prompt": "p", "text": "t", "label": "aligned"})" << "\n";
    }
    CHECK_THROWS_AS(load_dataset(tmp.path), Error);

    CHECK_THROWS_AS(load_dataset("does-not-exist.jsonl"), Error);
}

TEST_CASE("synthetic fixture is balanced and deterministic") {
    auto first = generate_synthetic_fixture(0);
    auto second = generate_synthetic_fixture(0);
    REQUIRE(first.size() == second.size());
    size_t per_label[3] = {};
    for (size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].id == second[i].id);
        CHECK(first[i].text == second[i].text);
        per_label[size_t(first[i].label)] += 1;
    }
    CHECK(per_label[0] == per_label[1]);
    CHECK(per_label[1] == per_label[2]);
    CHECK(per_label[0] == 24);

    // byte-identical files for a fixed seed
    TempFile a("fixture_a.jsonl"), b("fixture_b.jsonl");
    save_dataset(a.path, first);
    save_dataset(b.path, second);
    CHECK(slurp(a.path) == slurp(b.path));

    // a different seed changes the sampled texts
    auto other = generate_synthetic_fixture(1);
    bool any_diff = false;
    for (size_t i = 0; i < first.size(); ++i) {
        if (other[i].text != first[i].text) any_diff = true;
    }
    CHECK(any_diff);

    // every example has both splits populated and validation is nonempty
    size_t validation = 0;
    for (const auto& ex : first) {
        CHECK((ex.split == "validation" || ex.split == "test"));
        if (ex.split == "validation") ++validation;
    }
    CHECK(validation == 24);
}

TEST_CASE("outcome records round-trip through JSONL") {
    TempFile tmp("outcomes.jsonl");
    RunConfig config;
    std::vector<OutcomeRecord> records(2);
    records[0].outcome.id = "x1";
    records[0].outcome.predicted = ReasoningLabel::Fabricated;
    records[0].outcome.mks = MksResult{{0.1, 0.2}, 0.15, 1.0, 0.1, 3, {0, 1}};
    records[0].outcome.tau_used = 0.3;
    records[0].outcome.theta_used = 0.9;
    records[0].actual = ReasoningLabel::Fabricated;
    records[1].outcome.id = "x2";
    records[1].outcome.unclassifiable_reason = "NoSubjectCandidate";
    records[1].actual = ReasoningLabel::Aligned;

    write_outcomes(tmp.path, records, config);
    auto loaded = read_outcomes(tmp.path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].outcome.id == "x1");
    CHECK(loaded[0].actual == ReasoningLabel::Fabricated);
    REQUIRE(loaded[0].outcome.predicted.has_value());
    CHECK(*loaded[0].outcome.predicted == ReasoningLabel::Fabricated);
    REQUIRE(loaded[0].outcome.mks.has_value());
    CHECK(loaded[0].outcome.mks->score == 0.15);
    CHECK(loaded[0].outcome.mks->per_seed == std::vector<double>{0.1, 0.2});
    CHECK(loaded[0].outcome.tau_used == 0.3);
    CHECK_FALSE(loaded[1].outcome.predicted.has_value());
    CHECK(loaded[1].outcome.unclassifiable_reason == "NoSubjectCandidate");
}

TEST_CASE("thresholds file round-trips") {
    TempFile tmp("thresholds.json");
    write_thresholds(tmp.path, {0.023, 0.91});
    Thresholds t = read_thresholds(tmp.path);
    CHECK(t.tau == 0.023);
    CHECK(t.theta == 0.91);
}

TEST_CASE("config defaults, file values and env overrides") {
    RunConfig defaults = load_run_config("");
    CHECK(defaults.model.backend == "toy");
    CHECK(defaults.probe.sigma_prime == 0.1);
    CHECK(defaults.probe.seeds.size() == 10);
    CHECK(defaults.alignment.n_samples == 10);
    CHECK(defaults.probe.pos_set.count("PROPN") == 1);

    TempFile tmp("config.json");
    {
        std::ofstream out(tmp.path);
        out << R"({"probe": {"sigma_prime": 0.25, "seeds": [7, 8]},
                   "alignment": {"n_samples": 4},
                   "thresholds": {"tau": 0.01, "theta": 0.8}})";
    }
    RunConfig loaded = load_run_config(tmp.path);
    CHECK(loaded.probe.sigma_prime == 0.25);
    CHECK(loaded.probe.seeds == std::vector<uint64_t>{7, 8});
    CHECK(loaded.alignment.n_samples == 4);
    CHECK(loaded.has_thresholds);
    CHECK(loaded.thresholds.tau == 0.01);

    setenv("KNOWPROBE_PROBE_SIGMA_PRIME", "0.5", 1);
    setenv("KNOWPROBE_ALIGNMENT_N_SAMPLES", "2", 1);
    RunConfig overridden = load_run_config(tmp.path);
    CHECK(overridden.probe.sigma_prime == 0.5);
    CHECK(overridden.alignment.n_samples == 2);
    unsetenv("KNOWPROBE_PROBE_SIGMA_PRIME");
    unsetenv("KNOWPROBE_ALIGNMENT_N_SAMPLES");

    // the echoed config materializes every default
    auto echoed = run_config_to_json(defaults);
    CHECK(echoed.contains("model"));
    CHECK(echoed["probe"]["seeds"].size() == 10);
    CHECK(echoed["alignment"]["temperature"] == 1.0);
}

TEST_CASE("ecdf csv has x,F rows with final step at one") {
    TempFile tmp("ecdf.csv");
    write_ecdf_csv(tmp.path, Ecdf({0.5, 0.25, 0.5, 1.0}));
    std::istringstream in(slurp(tmp.path));
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,F");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    REQUIRE(rows.size() == 3);  // duplicate 0.5 collapses to one step
    CHECK(rows[0] == "0.25,0.25");
    CHECK(rows[1] == "0.5,0.75");
    CHECK(rows[2] == "1,1");
}
