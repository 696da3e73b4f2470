// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 1-5 pin the scoring arithmetic against independent
// oracles and published reference fixtures; 6-8 exercise the end-to-end
// workflow on the deterministic synthetic dataset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "knowprobe/calibration.hpp"
#include "knowprobe/config.hpp"
#include "knowprobe/dataset.hpp"
#include "knowprobe/reports.hpp"
#include "knowprobe/toy_lm.hpp"
#include "test_helpers.hpp"

namespace fs = std::filesystem;
using namespace knowprobe;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw Failure(msg);
}

void require_near(double actual, double expected, double tol, const std::string& what) {
    if (!(std::abs(actual - expected) <= tol)) {
        std::ostringstream msg;
        msg << what << ": got " << actual << ", expected " << expected << " +- " << tol;
        throw Failure(msg.str());
    }
}

struct ToyStack {
    ToyLm model;
    std::unique_ptr<PosTagger> tagger = make_toy_tagger();
};

Subject subject_for(const ToyStack& stack, const TokenizedPair& pair) {
    auto chunks = extract_noun_chunks(pair.prompt_text, *stack.tagger);
    return select_subject(pair, chunks, stack.model.attention_received(pair));
}

struct EndToEnd {
    std::vector<LabeledExample> fixture;
    Thresholds thresholds;
    std::vector<OutcomeRecord> records;
    EvaluationSummary summary;
};

/// The calibrate -> classify -> evaluate flow, in process, identical to the
/// CLI path: tau from the KS construction on the validation split, theta
/// from balanced accuracy on validation pairs passing the knowledge test.
EndToEnd run_end_to_end(const ToyStack& stack, uint64_t fixture_seed) {
    EndToEnd result;
    result.fixture = generate_synthetic_fixture(fixture_seed);
    ProbeConfig probe;
    AlignmentConfig alignment;

    std::vector<double> fab_scores;
    std::vector<double> other_scores;
    struct Pending {
        TokenizedPair pair;
        double mks;
        bool aligned;
    };
    std::vector<Pending> stage2;
    for (const auto& ex : filter_split(result.fixture, "validation")) {
        auto pair = make_tokenized_pair(stack.model, ex.prompt, ex.text);
        auto subject = subject_for(stack, pair);
        auto mks = model_knowledge_score(pair, subject, stack.model, *stack.tagger, probe);
        if (ex.label == ReasoningLabel::Fabricated) {
            fab_scores.push_back(mks.score);
        } else {
            other_scores.push_back(mks.score);
            stage2.push_back({std::move(pair), mks.score,
                              ex.label == ReasoningLabel::Aligned});
        }
    }
    CalibrationResult calibration = ks_threshold(fab_scores, other_scores);
    std::vector<double> aligned_scores, misaligned_scores;
    for (const auto& pending : stage2) {
        if (pending.mks < calibration.tau) continue;
        auto score = alignment_score(pending.pair, stack.model, alignment);
        (pending.aligned ? aligned_scores : misaligned_scores).push_back(score.overall);
    }
    result.thresholds.tau = calibration.tau;
    result.thresholds.theta = calibrate_alignment_threshold(aligned_scores, misaligned_scores);

    std::vector<LabeledExample> test = filter_split(result.fixture, "test");
    std::vector<ClassificationOutcome> outcomes;
    for (const auto& ex : test) {
        auto outcome = classify(ex, stack.model, *stack.tagger, result.thresholds, probe,
                                alignment);
        result.records.push_back({outcome, ex.label});
        outcomes.push_back(std::move(outcome));
    }
    result.summary = evaluate(test, outcomes);
    return result;
}

// --------------------------------------------------------------------------

void criterion_familiarity(const ToyStack& stack) {
    auto start = std::chrono::steady_clock::now();

    for (const char* name : {"grib", "vrax", "c", "and"}) {
        double fam = familiarity(stack.model.tokenize(name), stack.model);
        require(fam == 1.0, std::string("single-token familiarity != 1 for ") + name);
    }

    double fam = familiarity(stack.model.tokenize("d e f"), stack.model);
    double expected =
        -(std::sqrt(0.0) * 0.0 + std::sqrt(1.0) * std::log(0.25) +
          std::sqrt(2.0) * std::log(0.1)) /
            3.0 +
        1.0;
    require_near(fam, expected, 1e-9, "multi-token familiarity vs hand summation");

    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(elapsed < 1.0, "familiarity checks exceeded 1 s");
}

void criterion_mks(const ToyStack& stack) {
    TokenizedPair pair = make_tokenized_pair(stack.model, "what is the habitat of grib",
                                             "grib cliffs moss dawn");
    Subject subject = subject_for(stack, pair);

    ProbeConfig zero;
    zero.sigma_prime = 0.0;
    MksResult at_zero = model_knowledge_score(pair, subject, stack.model, *stack.tagger, zero);
    require(at_zero.score == 0.0, "MKS with sigma = 0 is not exactly 0");

    ProbeConfig one_seed;
    one_seed.seeds = {5};
    MksResult result = model_knowledge_score(pair, subject, stack.model, *stack.tagger, one_seed);
    double naive = oracle::naive_mks(stack.model, *stack.tagger, pair.prompt_text,
                                     pair.gen_text, subject, result.sigma, 5,
                                     one_seed.pos_set);
    require_near(result.score, naive, 1e-9, "MKS vs naive recomputation");

    // nonnegativity on randomized cases
    std::mt19937_64 rng(61);
    const auto& known = ToyLm::known_creatures();
    const auto& unknown = ToyLm::unknown_creatures();
    const auto& fillers = ToyLm::filler_nouns();
    std::vector<std::string> content = {"cliffs", "marsh", "moss", "bugs", "dawn", "dusk"};
    for (int trial = 0; trial < 1000; ++trial) {
        bool use_known = rng() % 2 == 0;
        std::string name = use_known ? known[rng() % known.size()].name
                                     : unknown[rng() % unknown.size()];
        std::string prompt = "what is the habitat of " + name;
        std::string text = name;
        int words = 2 + int(rng() % 4);
        for (int w = 0; w < words; ++w) {
            text += ' ';
            text += (rng() % 2 == 0) ? content[rng() % content.size()]
                                     : fillers[rng() % fillers.size()];
        }
        TokenizedPair p = make_tokenized_pair(stack.model, prompt, text);
        Subject s = subject_for(stack, p);
        ProbeConfig config;
        config.seeds = {rng()};
        MksResult r = model_knowledge_score(p, s, stack.model, *stack.tagger, config);
        require(r.score >= 0.0, "MKS went negative on randomized case");
    }
}

void criterion_kl(const ToyStack&) {
    std::vector<double> p = {1.0, 0.0};
    std::vector<double> q = {0.5, 0.5};
    require(kl_divergence(p, p) == 0.0, "KL(p||p) != 0");
    require_near(kl_divergence(p, q), std::numbers::ln2, 1e-12, "KL([1,0]||[.5,.5]) vs ln 2");

    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        size_t dim = 2 + rng() % 49;
        std::vector<double> a(dim), b(dim);
        double sa = 0.0, sb = 0.0;
        for (size_t i = 0; i < dim; ++i) {
            a[i] = unit(rng);
            b[i] = unit(rng);
            if (trial % 6 == 0 && i % 3 == 0) a[i] = 0.0;
            if (trial % 9 == 0 && i % 4 == 1) b[i] = 0.0;
            sa += a[i];
            sb += b[i];
        }
        for (size_t i = 0; i < dim; ++i) {
            a[i] /= sa;
            b[i] /= sb;
        }
        require_near(kl_divergence(a, b), oracle::kl(a, b), 1e-9, "KL vs direct summation");
    }
}

void criterion_ks(const ToyStack&) {
    CalibrationResult separated = ks_threshold({1.0, 2.0}, {3.0, 4.0});
    require(separated.ks_statistic == 1.0, "separated samples KS != 1");

    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 500; ++trial) {
        size_t m = 1 + rng() % 20;
        size_t n = 1 + rng() % 20;
        std::vector<double> fab(m), other(n);
        for (double& x : fab) x = double(rng() % 16) / 4.0;
        for (double& x : other) x = double(rng() % 16) / 4.0 + 0.5;

        std::vector<double> candidates = fab;
        candidates.insert(candidates.end(), other.begin(), other.end());
        std::sort(candidates.begin(), candidates.end());
        double best_d = -2.0, best_x = candidates.front();
        for (double x : candidates) {
            size_t cf = 0, co = 0;
            for (double s : fab) {
                if (s <= x) ++cf;
            }
            for (double s : other) {
                if (s <= x) ++co;
            }
            double d = double(cf) / double(m) - double(co) / double(n);
            if (d > best_d) {
                best_d = d;
                best_x = x;
            }
        }
        CalibrationResult r = ks_threshold(fab, other);
        require(r.tau == best_x, "KS tau differs from exhaustive scan");
        require_near(r.ks_statistic, best_d, 1e-12, "KS statistic differs from scan");
    }

    // published summary statistics as formatter fixtures
    CalibrationResult nec;
    nec.ks_statistic = 0.75;
    nec.tau = 0.023;
    require(calibration_summary(nec) == "75.00% at τ of 0.023",
            "formatter does not reproduce the NEC summary line verbatim");
    CalibrationResult bio;
    bio.ks_statistic = 0.8333;
    bio.tau = 0.198;
    require(calibration_summary(bio) == "83.33% at τ of 0.198",
            "formatter does not reproduce the Biography summary line verbatim");
}

void criterion_confusion(const ToyStack&) {
    // raw counts consistent with the published percentage tables
    std::array<std::array<size_t, 3>, 3> nec = {{{267, 49, 64}, {2, 216, 3}, {20, 24, 222}}};
    ConfusionMatrix m = ConfusionMatrix::from_counts(nec);
    const double expected_nec[3][3] = {
        {92.39, 16.96, 22.15}, {0.69, 74.74, 1.04}, {6.92, 8.30, 76.82}};
    for (size_t pred = 0; pred < 3; ++pred) {
        for (size_t actual = 0; actual < 3; ++actual) {
            require_near(m.column_percentages[pred][actual], expected_nec[pred][actual], 0.01,
                         "NEC confusion cell");
        }
    }
    EvaluationSummary s = summarize(m);
    require_near(s.overall_accuracy, 84.43, 0.01, "NEC overall accuracy");
    require_near(s.class_accuracy[0], 92.39, 0.01, "NEC aligned class accuracy");
    require_near(s.class_accuracy[1], 83.04, 0.01, "NEC misaligned class accuracy");
    require_near(s.class_accuracy[2], 77.85, 0.01, "NEC fabricated class accuracy");

    std::array<std::array<size_t, 3>, 3> bio = {{{75, 1, 1}, {0, 71, 0}, {13, 16, 103}}};
    ConfusionMatrix b = ConfusionMatrix::from_counts(bio);
    const double expected_bio[3][3] = {
        {85.23, 1.14, 0.96}, {0.00, 80.68, 0.00}, {14.77, 18.18, 99.04}};
    for (size_t pred = 0; pred < 3; ++pred) {
        for (size_t actual = 0; actual < 3; ++actual) {
            require_near(b.column_percentages[pred][actual], expected_bio[pred][actual], 0.01,
                         "Biography confusion cell");
        }
    }
    EvaluationSummary sb = summarize(b);
    require_near(sb.overall_accuracy, 94.64, 0.01, "Biography overall accuracy");
    require_near(sb.class_accuracy[0], 85.23, 0.01, "Biography aligned class accuracy");
    require_near(sb.class_accuracy[1], 98.86, 0.01, "Biography misaligned class accuracy");
    require_near(sb.class_accuracy[2], 99.04, 0.01, "Biography fabricated class accuracy");

    // column sums stay at 100 within 0.01
    for (size_t actual = 0; actual < 3; ++actual) {
        double sum = 0.0;
        for (size_t pred = 0; pred < 3; ++pred) sum += m.column_percentages[pred][actual];
        require_near(sum, 100.0, 0.01, "column percentage sum");
    }
}

void criterion_end_to_end(const ToyStack& stack) {
    auto start = std::chrono::steady_clock::now();
    EndToEnd run = run_end_to_end(stack, 0);

    require(run.summary.n_unclassified == 0, "unclassifiable examples in the fixture");
    for (size_t c = 0; c < 3; ++c) {
        std::ostringstream what;
        what << "per-class accuracy for class " << c << " below 90% ("
             << run.summary.class_accuracy[c] << ")";
        require(run.summary.class_accuracy[c] >= 90.0, what.str());
    }

    // fabricated recall: predicted fabricated among actual fabricated
    size_t fab_total = run.summary.matrix.column_total(2);
    size_t fab_hit = run.summary.matrix.counts[2][2];
    require(fab_total > 0, "no fabricated test examples");
    double recall = 100.0 * double(fab_hit) / double(fab_total);
    std::ostringstream what;
    what << "fabricated recall " << recall << " below 95%";
    require(recall >= 95.0, what.str());

    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(elapsed < 60.0, "end-to-end run exceeded 60 s");
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(bool(in), "cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void criterion_cli_determinism(const ToyStack&) {
#ifndef KNOWPROBE_CLI_PATH
    throw Failure("CLI path not compiled in");
#else
    fs::path dir = fs::temp_directory_path() / "knowprobe_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string cli = KNOWPROBE_CLI_PATH;
    auto sh = [&](const std::string& args) {
        std::string cmd = cli + " " + args + " > /dev/null 2>&1";
        int rc = std::system(cmd.c_str());
        require(rc == 0, "CLI command failed: " + cmd);
    };
    std::string fixture = (dir / "fixture.jsonl").string();
    sh("fixture --seed 0 --out " + fixture);
    sh("calibrate --dataset " + fixture + " --split validation --out-dir " +
       (dir / "cal").string());
    std::string thresholds = (dir / "cal" / "thresholds.json").string();
    sh("classify --dataset " + fixture + " --split test --thresholds " + thresholds +
       " --out " + (dir / "outcomes_a.jsonl").string());
    sh("classify --dataset " + fixture + " --split test --thresholds " + thresholds +
       " --out " + (dir / "outcomes_b.jsonl").string());
    require(slurp(dir / "outcomes_a.jsonl") == slurp(dir / "outcomes_b.jsonl"),
            "two identical classify runs differ byte-for-byte");

    // the fixture file itself is reproducible as well
    std::string fixture2 = (dir / "fixture2.jsonl").string();
    sh("fixture --seed 0 --out " + fixture2);
    require(slurp(fixture) == slurp(fixture2), "fixture files differ across runs");
    fs::remove_all(dir);
#endif
}

void criterion_stage2_gating(const ToyStack& stack) {
    EndToEnd run = run_end_to_end(stack, 0);
    ProbeConfig probe;
    AlignmentConfig alignment;

    CountingAdapter counting(stack.model);
    size_t fabricated_predictions = 0;
    for (const auto& ex : filter_split(run.fixture, "test")) {
        size_t before = counting.sample_calls;
        auto outcome = classify(ex, counting, *stack.tagger, run.thresholds, probe, alignment);
        require(outcome.predicted.has_value(), "unclassifiable example in gating check");
        if (*outcome.predicted == ReasoningLabel::Fabricated) {
            ++fabricated_predictions;
            require(counting.sample_calls == before,
                    "stage-2 sampling ran for a fabricated prediction");
            require(!outcome.alignment.has_value(),
                    "alignment score present on a fabricated prediction");
        } else {
            require(counting.sample_calls == before + 1,
                    "stage-2 sampling did not run exactly once for a passing example");
            require(outcome.alignment.has_value(),
                    "alignment score missing on a passing example");
        }
    }
    require(fabricated_predictions > 0, "no fabricated predictions to check");
}

} // namespace

int main() {
    ToyStack stack;
    struct Criterion {
        int number;
        const char* description;
        std::function<void(const ToyStack&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "familiarity: single-token = 1 exactly, multi-token matches hand sum, < 1 s",
         criterion_familiarity},
        {2, "knowledge score: sigma=0 gives 0, matches naive recomputation, >= 0 on 1000 cases",
         criterion_mks},
        {3, "KL divergence matches direct summation; closed forms exact", criterion_kl},
        {4, "KS threshold matches exhaustive scan; summary formatter verbatim", criterion_ks},
        {5, "confusion-matrix arithmetic reproduces published tables within 0.01",
         criterion_confusion},
        {6, "end-to-end separation on the seed-0 fixture: >= 90% per class, >= 95% fabricated "
            "recall, < 60 s",
         criterion_end_to_end},
        {7, "two identical CLI runs produce byte-identical JSONL outcomes",
         criterion_cli_determinism},
        {8, "fabricated predictions trigger zero stage-2 sampling calls",
         criterion_stage2_gating},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        try {
            criterion.run(stack);
            std::printf("[PASS] criterion %d: %s\n", criterion.number, criterion.description);
        } catch (const std::exception& e) {
            ++failures;
            std::printf("[FAIL] criterion %d: %s\n       %s\n", criterion.number,
                        criterion.description, e.what());
        }
        std::fflush(stdout);
    }
    if (failures > 0) {
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
