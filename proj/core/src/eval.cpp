#include "liquidsense/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "liquidsense/dsp.hpp"
#include "liquidsense/render.hpp"

namespace liquidsense {

// ---------------------------------------------------------------------------
// Pairwise experiment
// ---------------------------------------------------------------------------

namespace {

struct TrialSlot {
    int pair_index;
    int liquid_a, liquid_b;
    FillLevel fill;
    int trial;
};

}  // namespace

std::vector<PairwiseResult> pairwise_experiment(const Registry& registry,
                                                const EvalConfig& eval, PromptVariant variant,
                                                Backend& backend, const SimConfig& sim,
                                                const PromptLibrary& lib,
                                                const PlotStyle& style) {
    std::vector<PairwiseResult> results;
    pairwise_experiment_into(results, registry, eval, variant, backend, sim, lib, style);
    return results;
}

void pairwise_experiment_into(std::vector<PairwiseResult>& out, const Registry& registry,
                              const EvalConfig& eval, PromptVariant variant, Backend& backend,
                              const SimConfig& sim, const PromptLibrary& lib,
                              const PlotStyle& style) {
    if (eval.trials < 1) throw Error("trials must be >= 1");

    // Enumerate unordered pairs (a < b), then fills, then trials.
    std::vector<TrialSlot> slots;
    int pair_index = 0;
    for (std::size_t a = 0; a < registry.size(); ++a) {
        for (std::size_t b = a + 1; b < registry.size(); ++b) {
            for (const FillLevel fill : eval.fills)
                for (int trial = 0; trial < eval.trials; ++trial)
                    slots.push_back({pair_index, static_cast<int>(a), static_cast<int>(b),
                                     fill, trial});
            ++pair_index;
        }
    }

    std::vector<PairwiseResult> results(slots.size());
    std::vector<char> done(slots.size(), 0);

    const auto run_slot = [&](std::size_t slot_index) {
        const TrialSlot& slot = slots[slot_index];
        const std::uint64_t seed = eval.seed_base +
                                   static_cast<std::uint64_t>(slot.pair_index) * eval.seed_stride +
                                   static_cast<std::uint64_t>(slot.trial);
        std::mt19937_64 gen(seed);
        const std::uint64_t seed_a = gen();
        const std::uint64_t seed_b = gen();
        const bool a_on_left = (gen() & 1) == 0;

        const LiquidSpec& liquid_a = registry[static_cast<std::size_t>(slot.liquid_a)];
        const LiquidSpec& liquid_b = registry[static_cast<std::size_t>(slot.liquid_b)];

        TorqueSignal raw_a = simulate_shake(params_from(liquid_a, slot.fill, sim), 10.0, 100.0,
                                            seed_a);
        raw_a.meta.liquid_id = liquid_a.id;
        raw_a.meta.fill = slot.fill;
        TorqueSignal raw_b = simulate_shake(params_from(liquid_b, slot.fill, sim), 10.0, 100.0,
                                            seed_b);
        raw_b.meta.liquid_id = liquid_b.id;
        raw_b.meta.fill = slot.fill;

        const TorqueSignal& raw_left = a_on_left ? raw_a : raw_b;
        const TorqueSignal& raw_right = a_on_left ? raw_b : raw_a;

        PairwiseResult result;
        result.liquid_a = slot.liquid_a;
        result.liquid_b = slot.liquid_b;
        result.fill = slot.fill;
        result.trial = slot.trial;
        result.variant = variant;
        result.a_on_left = a_on_left;

        const PlotImage plot_left = render_timeseries(standardize(lowpass(raw_left)), style);
        const PlotImage plot_right = render_timeseries(standardize(lowpass(raw_right)), style);
        const PlotImage pair_plot = concat_horizontal(plot_left, plot_right);
        const Prompt prompt = build_pairwise_prompt(pair_plot, variant, lib);

        SideChannel side;
        side.signals.push_back(raw_left);
        side.signals.push_back(raw_right);

        const std::string reply = backend.answer(prompt, &side);
        result.decision = parse_pairwise(reply);

        if (result.decision != PairwiseDecision::Invalid) {
            const double nu_left = a_on_left ? liquid_a.viscosity_mpas : liquid_b.viscosity_mpas;
            const double nu_right = a_on_left ? liquid_b.viscosity_mpas : liquid_a.viscosity_mpas;
            const PairwiseDecision truth =
                nu_left > nu_right ? PairwiseDecision::Left : PairwiseDecision::Right;
            result.correct = result.decision == truth;
        }
        results[slot_index] = result;
        done[slot_index] = 1;
    };

    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::atomic<bool> aborted{false};

    const int workers = std::max(1, eval.workers);
    if (workers == 1) {
        for (std::size_t i = 0; i < slots.size() && !aborted.load(); ++i) {
            try {
                run_slot(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failure = std::current_exception();
                aborted.store(true);
            }
        }
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (std::size_t i = cursor.fetch_add(1);
                     i < slots.size() && !aborted.load(); i = cursor.fetch_add(1)) {
                    try {
                        run_slot(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        aborted.store(true);
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    // Completed trials survive an abort so callers can flush them.
    for (std::size_t i = 0; i < slots.size(); ++i)
        if (done[i]) out.push_back(results[i]);
    if (failure) std::rethrow_exception(failure);
}

double accuracy(const std::vector<PairwiseResult>& results) {
    int valid = 0, correct = 0;
    for (const auto& r : results) {
        if (!r.correct) continue;
        ++valid;
        if (*r.correct) ++correct;
    }
    if (valid == 0) throw AllInvalid("every decision in the result set was invalid");
    return 100.0 * static_cast<double>(correct) / static_cast<double>(valid);
}

double ErrorBreakdown::rate(std::size_t bin) const {
    if (bin >= errors.size() || valid[bin] == 0) return 0.0;
    return static_cast<double>(errors[bin]) / static_cast<double>(valid[bin]);
}

ErrorBreakdown error_breakdown(const std::vector<PairwiseResult>& results,
                               const Registry& registry, std::vector<double> bin_edges) {
    if (bin_edges.empty()) throw Error("at least one bin edge is required");
    for (std::size_t i = 1; i < bin_edges.size(); ++i)
        if (!(bin_edges[i] > bin_edges[i - 1]))
            throw Error("bin edges must be strictly increasing");

    ErrorBreakdown breakdown;
    breakdown.edges = std::move(bin_edges);
    breakdown.errors.assign(breakdown.edges.size(), 0);
    breakdown.valid.assign(breakdown.edges.size(), 0);

    for (const auto& r : results) {
        if (!r.correct) continue;
        const double delta =
            std::abs(liquid_by_id(registry, r.liquid_a).viscosity_mpas -
                     liquid_by_id(registry, r.liquid_b).viscosity_mpas);
        std::size_t bin = 0;
        for (std::size_t i = 0; i < breakdown.edges.size(); ++i)
            if (delta >= breakdown.edges[i]) bin = i;
        ++breakdown.valid[bin];
        if (!*r.correct) ++breakdown.errors[bin];
    }
    return breakdown;
}

// ---------------------------------------------------------------------------
// Confusion matrix
// ---------------------------------------------------------------------------

ConfusionMatrix::ConfusionMatrix(int n) : n_(n) {
    counts_.assign(static_cast<std::size_t>(n) * n, 0);
    row_invalid_.assign(static_cast<std::size_t>(n), 0);
}

void ConfusionMatrix::record(int truth, int predicted) {
    if (truth < 0 || truth >= n_ || predicted < 0 || predicted >= n_)
        throw UnknownIndex("confusion cell out of range");
    ++counts_[static_cast<std::size_t>(truth) * n_ + predicted];
}

void ConfusionMatrix::record_invalid(int truth) {
    if (truth < 0 || truth >= n_) throw UnknownIndex("confusion row out of range");
    ++row_invalid_[static_cast<std::size_t>(truth)];
}

int ConfusionMatrix::count(int truth, int predicted) const {
    return counts_.at(static_cast<std::size_t>(truth) * n_ + predicted);
}

int ConfusionMatrix::row_invalid(int truth) const {
    return row_invalid_.at(static_cast<std::size_t>(truth));
}

int ConfusionMatrix::excluded_invalid() const {
    int total = 0;
    for (int v : row_invalid_) total += v;
    return total;
}

int ConfusionMatrix::total() const {
    int total = 0;
    for (int v : counts_) total += v;
    return total;
}

int ConfusionMatrix::diagonal() const {
    int total = 0;
    for (int i = 0; i < n_; ++i) total += count(i, i);
    return total;
}

double ConfusionMatrix::accuracy() const {
    const int valid = total();
    if (valid == 0) throw AllInvalid("confusion matrix holds no valid episodes");
    return 100.0 * static_cast<double>(diagonal()) / static_cast<double>(valid);
}

// ---------------------------------------------------------------------------
// Recognition experiment
// ---------------------------------------------------------------------------

RecognitionOutcome recognition_experiment(const Registry& registry,
                                          const EnvironmentHandle& env, const ActionMask& mask,
                                          int trials, const BackendFactory& backend_factory,
                                          const PromptLibrary& lib, std::uint64_t seed_base,
                                          std::uint64_t seed_stride,
                                          const std::optional<std::filesystem::path>&
                                              trace_dir) {
    if (trials < 1) throw Error("trials must be >= 1");

    RecognitionOutcome outcome;
    outcome.matrix = ConfusionMatrix(static_cast<int>(registry.size()));

    for (const auto& liquid : registry) {
        for (int trial = 0; trial < trials; ++trial) {
            const std::uint64_t episode_seed =
                seed_base + static_cast<std::uint64_t>(liquid.id) * seed_stride +
                static_cast<std::uint64_t>(trial);

            RecognitionTask task;
            task.question = "Which container holds the " + liquid.name + "?";
            task.target_name = liquid.name;
            task.environment = env;

            EpisodeOptions options;
            options.mask = mask;
            options.episode_seed = episode_seed;
            std::optional<std::filesystem::path> episode_dir;
            if (trace_dir) {
                episode_dir = *trace_dir / ("liquid" + std::to_string(liquid.id) + "_trial" +
                                            std::to_string(trial));
                std::filesystem::create_directories(*episode_dir);
                options.artifact_dir = episode_dir;
            }

            const auto backend = backend_factory(episode_seed);
            const EpisodeTrace trace = run_episode(task, *backend, lib, options);
            if (episode_dir) write_trace_jsonl(trace, *episode_dir / "trace.jsonl");

            RecognitionResultRow row;
            row.setting = env.fixture.setting;
            row.mask = mask.to_string();
            row.liquid_id = liquid.id;
            row.trial = trial;
            row.outcome = trace.outcome;
            row.answer = trace.answer_index;
            outcome.rows.push_back(row);

            if (trace.outcome == EpisodeOutcome::Answered)
                outcome.matrix.record(liquid.id, trace.answer_index);
            else
                outcome.matrix.record_invalid(liquid.id);
        }
    }
    outcome.accuracy_percent = outcome.matrix.accuracy();
    return outcome;
}

// ---------------------------------------------------------------------------
// Reference numbers
// ---------------------------------------------------------------------------

const PaperReference& reference_tables() {
    static const PaperReference ref{
        {66.4, 67.8, 66.4},
        {77.1, 77.5, 79.9},
        {{{"Look[Scn.]", 62.0, 76.0},
          {"Look[Scn.]+Shake[Cnt.]", 56.0, 67.0},
          {"Look[Scn.]+Look[Cnt.]", 69.0, 97.0},
          {"Look[Scn.]+Look[Cnt.]+Shake[Cnt.]", 86.0, 93.0}}},
    };
    return ref;
}

// ---------------------------------------------------------------------------
// CSV I/O
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    return cells;
}

const char* mask_label(const std::string& mask) {
    if (mask == "scene") return "Look[Scn.]";
    if (mask == "scene,shake") return "Look[Scn.]+Shake[Cnt.]";
    if (mask == "scene,container") return "Look[Scn.]+Look[Cnt.]";
    if (mask == "scene,container,shake") return "Look[Scn.]+Look[Cnt.]+Shake[Cnt.]";
    return mask.c_str();
}

std::string format_percent(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", value);
    return buf;
}

}  // namespace

void write_pairwise_csv(const std::vector<PairwiseResult>& results,
                        const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write results: " + path.string());
    out << "liquid_a,liquid_b,fill,trial,variant,decision,correct,a_on_left\n";
    for (const auto& r : results) {
        out << r.liquid_a << ',' << r.liquid_b << ',' << to_string(r.fill) << ',' << r.trial
            << ',' << to_string(r.variant) << ',' << to_string(r.decision) << ','
            << (r.correct ? (*r.correct ? "true" : "false") : "") << ','
            << (r.a_on_left ? "true" : "false") << "\n";
    }
}

std::vector<PairwiseResult> read_pairwise_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open results: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("liquid_a,", 0) != 0)
        throw IoError("unexpected pairwise CSV header in " + path.string());

    std::vector<PairwiseResult> results;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_row(line);
        if (cells.size() < 8) throw IoError("malformed pairwise CSV row: " + line);
        PairwiseResult r;
        r.liquid_a = std::stoi(cells[0]);
        r.liquid_b = std::stoi(cells[1]);
        r.fill = fill_level_from_string(cells[2]);
        r.trial = std::stoi(cells[3]);
        r.variant = prompt_variant_from_string(cells[4]);
        if (cells[5] == "left") r.decision = PairwiseDecision::Left;
        else if (cells[5] == "right") r.decision = PairwiseDecision::Right;
        else r.decision = PairwiseDecision::Invalid;
        if (!cells[6].empty()) r.correct = cells[6] == "true";
        r.a_on_left = cells[7] == "true";
        results.push_back(r);
    }
    return results;
}

void write_recognition_csv(const std::vector<RecognitionResultRow>& rows,
                           const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write results: " + path.string());
    out << "setting,mask,liquid_id,trial,outcome,answer\n";
    for (const auto& r : rows) {
        out << to_string(r.setting) << ',' << r.mask << ',' << r.liquid_id << ',' << r.trial
            << ',' << to_string(r.outcome) << ',' << r.answer << "\n";
    }
}

std::vector<RecognitionResultRow> read_recognition_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open results: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("setting,", 0) != 0)
        throw IoError("unexpected recognition CSV header in " + path.string());

    std::vector<RecognitionResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_row(line);
        // The mask cell itself contains commas; stitch the row back together
        // from both ends (setting is first; the last four cells are fixed).
        if (cells.size() < 6) throw IoError("malformed recognition CSV row: " + line);
        RecognitionResultRow r;
        r.setting = scene_setting_from_string(cells[0]);
        std::string mask = cells[1];
        for (std::size_t i = 2; i + 4 < cells.size(); ++i) mask += "," + cells[i];
        r.mask = mask;
        const std::size_t base = cells.size() - 4;
        r.liquid_id = std::stoi(cells[base]);
        r.trial = std::stoi(cells[base + 1]);
        if (cells[base + 2] == "answered") r.outcome = EpisodeOutcome::Answered;
        else if (cells[base + 2] == "step_budget_exhausted")
            r.outcome = EpisodeOutcome::StepBudgetExhausted;
        else r.outcome = EpisodeOutcome::Invalid;
        r.answer = std::stoi(cells[base + 3]);
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string pairwise_report_markdown(const std::vector<PairwiseResult>& results,
                                     const Registry& registry,
                                     const std::vector<double>& bin_edges) {
    const PaperReference& ref = reference_tables();
    const std::array<FillLevel, 3> fills{FillLevel::OneThird, FillLevel::Half,
                                         FillLevel::TwoThirds};
    const std::array<const char*, 3> fill_names{"One third", "Half", "Two thirds"};

    const auto cell = [&](FillLevel fill, PromptVariant variant) -> std::string {
        std::vector<PairwiseResult> subset;
        for (const auto& r : results)
            if (r.fill == fill && r.variant == variant) subset.push_back(r);
        if (subset.empty()) return "—";
        try {
            return format_percent(accuracy(subset));
        } catch (const AllInvalid&) {
            return "n/a";
        }
    };

    std::ostringstream out;
    out << "# Pairwise viscosity accuracy\n\n";
    out << "Accuracy (%) of pairwise viscosity decisions; invalid outputs are excluded from "
           "the denominator. Reference columns hold the published GPT-4V results, which this "
           "desk-scale rig does not attempt to reproduce.\n\n";
    out << "| Fill level | Plain | Knowledge-Enhanced | Reference: Plain | Reference: "
           "Knowledge-Enhanced |\n";
    out << "|---|---|---|---|---|\n";
    for (std::size_t i = 0; i < fills.size(); ++i) {
        out << "| " << fill_names[i] << " | " << cell(fills[i], PromptVariant::Plain) << " | "
            << cell(fills[i], PromptVariant::KnowledgeEnhanced) << " | "
            << format_percent(ref.pairwise_plain[i]) << " | "
            << format_percent(ref.pairwise_knowledge[i]) << " |\n";
    }

    // Error breakdown over |viscosity difference| bins.
    out << "\n## Error breakdown by |viscosity difference|\n\n";
    out << "| Bin (mPa·s) | Valid | Errors | Error rate |\n";
    out << "|---|---|---|---|\n";
    for (const PromptVariant variant :
         {PromptVariant::Plain, PromptVariant::KnowledgeEnhanced}) {
        std::vector<PairwiseResult> subset;
        for (const auto& r : results)
            if (r.variant == variant) subset.push_back(r);
        if (subset.empty()) continue;
        const ErrorBreakdown breakdown = error_breakdown(subset, registry, bin_edges);
        for (std::size_t bin = 0; bin < breakdown.bins(); ++bin) {
            std::string label = "[" + format_percent(breakdown.edges[bin]) + ", ";
            label += bin + 1 < breakdown.bins()
                         ? format_percent(breakdown.edges[bin + 1]) + ")"
                         : std::string("inf)");
            out << "| " << to_string(variant) << " " << label << " | " << breakdown.valid[bin]
                << " | " << breakdown.errors[bin] << " | "
                << format_percent(100.0 * breakdown.rate(bin)) << "% |\n";
        }
    }
    return out.str();
}

std::string recognition_report_markdown(const std::vector<RecognitionResultRow>& rows) {
    const PaperReference& ref = reference_tables();
    const std::array<const char*, 4> masks{"scene", "scene,shake", "scene,container",
                                           "scene,container,shake"};

    int n = 0;
    for (const auto& row : rows) n = std::max(n, std::max(row.liquid_id, row.answer) + 1);

    const auto cell = [&](const std::string& mask, SceneSetting setting) -> std::string {
        int valid = 0, correct = 0;
        bool present = false;
        for (const auto& row : rows) {
            if (row.mask != mask || row.setting != setting) continue;
            present = true;
            if (row.outcome != EpisodeOutcome::Answered) continue;
            ++valid;
            if (row.answer == row.liquid_id) ++correct;
        }
        if (!present) return "—";
        if (valid == 0) return "n/a";
        return format_percent(100.0 * correct / valid);
    };

    std::ostringstream out;
    out << "# Liquid recognition accuracy\n\n";
    out << "Accuracy (%) per action-space variant and labelling setting; invalid episodes "
           "are excluded. Reference columns hold the published GPT-4V results.\n\n";
    out << "| Method | W/o labels | W/ labels | Reference: W/o labels | Reference: W/ labels "
           "|\n";
    out << "|---|---|---|---|---|\n";
    for (std::size_t i = 0; i < masks.size(); ++i) {
        out << "| " << mask_label(masks[i]) << " | "
            << cell(masks[i], SceneSetting::WithoutLabels) << " | "
            << cell(masks[i], SceneSetting::WithLabels) << " | "
            << format_percent(ref.recognition[i].without_labels) << " | "
            << format_percent(ref.recognition[i].with_labels) << " |\n";
    }
    return out.str();
}

ConfusionMatrix matrix_from_rows(const std::vector<RecognitionResultRow>& rows, int n,
                                 SceneSetting setting, const std::string& mask) {
    ConfusionMatrix matrix(n);
    for (const auto& row : rows) {
        if (row.setting != setting || row.mask != mask) continue;
        if (row.outcome == EpisodeOutcome::Answered)
            matrix.record(row.liquid_id, row.answer);
        else
            matrix.record_invalid(row.liquid_id);
    }
    return matrix;
}

std::string confusion_csv(const ConfusionMatrix& matrix, const Registry& registry) {
    std::ostringstream out;
    out << "truth\\predicted";
    for (int j = 0; j < matrix.size(); ++j) out << ',' << liquid_by_id(registry, j).name;
    out << ",invalid\n";
    for (int i = 0; i < matrix.size(); ++i) {
        out << liquid_by_id(registry, i).name;
        for (int j = 0; j < matrix.size(); ++j) out << ',' << matrix.count(i, j);
        out << ',' << matrix.row_invalid(i) << "\n";
    }
    return out.str();
}

std::string confusion_heatmap_svg(const ConfusionMatrix& matrix, const Registry& registry) {
    const int n = matrix.size();
    const int cell = 36;
    const int margin = 110;
    const int size = margin + n * cell + 10;

    int max_count = 1;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) max_count = std::max(max_count, matrix.count(i, j));

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\""
        << size << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << size << "\" height=\"" << size
        << "\" fill=\"#ffffff\"/>\n";
    for (int i = 0; i < n; ++i) {
        out << "<text x=\"" << margin - 6 << "\" y=\"" << margin + i * cell + cell / 2 + 4
            << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
            << liquid_by_id(registry, i).name << "</text>\n";
        out << "<text x=\"" << margin + i * cell + cell / 2 << "\" y=\"" << margin - 6
            << "\" text-anchor=\"start\" font-family=\"monospace\" font-size=\"11\" "
               "transform=\"rotate(-45 "
            << margin + i * cell + cell / 2 << " " << margin - 6 << ")\">"
            << liquid_by_id(registry, i).name << "</text>\n";
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int count = matrix.count(i, j);
            const int shade = 255 - (230 * count) / max_count;
            char color[8];
            std::snprintf(color, sizeof(color), "#%02x%02x%02x", shade, shade, 255);
            out << "<rect x=\"" << margin + j * cell << "\" y=\"" << margin + i * cell
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << color
                << "\" stroke=\"#888888\" stroke-width=\"0.5\"/>\n";
            if (count > 0)
                out << "<text x=\"" << margin + j * cell + cell / 2 << "\" y=\""
                    << margin + i * cell + cell / 2 + 4
                    << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">"
                    << count << "</text>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace liquidsense
