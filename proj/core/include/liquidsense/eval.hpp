#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "liquidsense/agent.hpp"
#include "liquidsense/core.hpp"
#include "liquidsense/perception.hpp"
#include "liquidsense/sloshsim.hpp"

namespace liquidsense {

// ---------------------------------------------------------------------------
// Pairwise viscosity experiment
// ---------------------------------------------------------------------------

struct PairwiseResult {
    int liquid_a = 0;
    int liquid_b = 0;
    FillLevel fill = FillLevel::TwoThirds;
    int trial = 0;
    PromptVariant variant = PromptVariant::KnowledgeEnhanced;
    PairwiseDecision decision = PairwiseDecision::Invalid;
    /// Present iff decision != Invalid.
    std::optional<bool> correct;
    bool a_on_left = true;
};

struct EvalConfig {
    int trials = 10;
    std::vector<FillLevel> fills{FillLevel::OneThird, FillLevel::Half, FillLevel::TwoThirds};
    std::uint64_t seed_base = 1;
    /// Seed schedule: seed = base + pair_index * seed_stride + trial.
    std::uint64_t seed_stride = 1000;
    std::vector<double> bin_edges{0.0, 10.0, 100.0, 1000.0};  // mPa·s, open-ended last bin
    int workers = 4;
};

/// Run every unordered pair x fill x trial: simulate both signals, condition,
/// render, concat (presentation side seeded per trial), prompt, parse.
/// Invalid decisions are recorded but never scored.
std::vector<PairwiseResult> pairwise_experiment(const Registry& registry,
                                                const EvalConfig& eval, PromptVariant variant,
                                                Backend& backend, const SimConfig& sim,
                                                const PromptLibrary& lib,
                                                const PlotStyle& style = {});

/// Same, appending into `results`. A backend error aborts the run but the
/// trials completed so far stay in `results`, so callers can flush partial
/// output before propagating.
void pairwise_experiment_into(std::vector<PairwiseResult>& results, const Registry& registry,
                              const EvalConfig& eval, PromptVariant variant, Backend& backend,
                              const SimConfig& sim, const PromptLibrary& lib,
                              const PlotStyle& style = {});

/// 100 * correct / (total - invalid). Throws AllInvalid when no valid
/// decisions exist.
double accuracy(const std::vector<PairwiseResult>& results);

struct ErrorBreakdown {
    std::vector<double> edges;     // finite bin edges; last bin is open-ended
    std::vector<int> errors;       // per bin
    std::vector<int> valid;        // per bin
    std::size_t bins() const { return edges.size(); }
    double rate(std::size_t bin) const;
};

/// Assign every erroneous valid result to the |viscosity difference| bin of
/// its pair.
ErrorBreakdown error_breakdown(const std::vector<PairwiseResult>& results,
                               const Registry& registry, std::vector<double> bin_edges);

// ---------------------------------------------------------------------------
// Recognition experiment
// ---------------------------------------------------------------------------

class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int n = 0);
    int size() const { return n_; }
    void record(int truth, int predicted);
    void record_invalid(int truth);
    int count(int truth, int predicted) const;
    int row_invalid(int truth) const;
    int excluded_invalid() const;
    int total() const;
    int diagonal() const;
    /// 100 * diagonal / (total valid); throws AllInvalid when empty.
    double accuracy() const;

private:
    int n_ = 0;
    std::vector<int> counts_;
    std::vector<int> row_invalid_;
};

struct RecognitionResultRow {
    SceneSetting setting = SceneSetting::WithoutLabels;
    std::string mask;  // ActionMask::to_string form
    int liquid_id = 0;
    int trial = 0;
    EpisodeOutcome outcome = EpisodeOutcome::Invalid;
    int answer = -1;
};

struct RecognitionOutcome {
    ConfusionMatrix matrix;
    std::vector<RecognitionResultRow> rows;
    double accuracy_percent = 0.0;
};

using BackendFactory = std::function<std::unique_ptr<Backend>(std::uint64_t episode_seed)>;

/// Run `trials` episodes per liquid; Answered(i) increments cell (truth, i),
/// Invalid/StepBudgetExhausted are counted as excluded. When `trace_dir` is
/// set, every episode writes trace.jsonl plus its step-indexed image
/// artifacts into a per-episode subdirectory.
RecognitionOutcome recognition_experiment(const Registry& registry,
                                          const EnvironmentHandle& env, const ActionMask& mask,
                                          int trials, const BackendFactory& backend_factory,
                                          const PromptLibrary& lib, std::uint64_t seed_base,
                                          std::uint64_t seed_stride = 1000,
                                          const std::optional<std::filesystem::path>&
                                              trace_dir = std::nullopt);

// ---------------------------------------------------------------------------
// Published reference numbers
// ---------------------------------------------------------------------------

/// Accuracy tables as published; not reproducible without the original LVLM
/// and physical liquids. Indexed by fill (one-third, half, two-thirds).
struct PaperReference {
    std::array<double, 3> pairwise_plain;
    std::array<double, 3> pairwise_knowledge;
    struct RecognitionRow {
        const char* method;
        double without_labels;
        double with_labels;
    };
    std::array<RecognitionRow, 4> recognition;
};

const PaperReference& reference_tables();

// ---------------------------------------------------------------------------
// Result files and reports
// ---------------------------------------------------------------------------

void write_pairwise_csv(const std::vector<PairwiseResult>& results,
                        const std::filesystem::path& path);
std::vector<PairwiseResult> read_pairwise_csv(const std::filesystem::path& path);

void write_recognition_csv(const std::vector<RecognitionResultRow>& rows,
                           const std::filesystem::path& path);
std::vector<RecognitionResultRow> read_recognition_csv(const std::filesystem::path& path);

/// Markdown table shaped like the published pairwise accuracy table
/// (fill rows x prompt columns) with the reference values adjacent, plus an
/// error-breakdown section.
std::string pairwise_report_markdown(const std::vector<PairwiseResult>& results,
                                     const Registry& registry,
                                     const std::vector<double>& bin_edges);

/// Markdown table shaped like the published recognition table (method rows x
/// setting columns) with the reference values adjacent.
std::string recognition_report_markdown(const std::vector<RecognitionResultRow>& rows);

/// n x n counts grid with liquid-name headers.
std::string confusion_csv(const ConfusionMatrix& matrix, const Registry& registry);

/// Deterministic grayscale heatmap with per-cell counts.
std::string confusion_heatmap_svg(const ConfusionMatrix& matrix, const Registry& registry);

ConfusionMatrix matrix_from_rows(const std::vector<RecognitionResultRow>& rows, int n,
                                 SceneSetting setting, const std::string& mask);

}  // namespace liquidsense
