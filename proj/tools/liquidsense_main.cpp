// Command-line front end: simulate / process / plot / pairwise / recognize /
// report. Every run writes a resolved-config snapshot beside its artifacts.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "liquidsense/agent.hpp"
#include "liquidsense/config.hpp"
#include "liquidsense/core.hpp"
#include "liquidsense/dsp.hpp"
#include "liquidsense/eval.hpp"
#include "liquidsense/perception.hpp"
#include "liquidsense/render.hpp"
#include "liquidsense/signal_io.hpp"
#include "liquidsense/sloshsim.hpp"
#include "liquidsense/vision.hpp"

namespace {

using namespace liquidsense;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitBackend = 2;

struct GlobalFlags {
    std::string config_path;
    std::string registry_path;
    std::string prompts_dir;
    std::string fixtures_dir;
    std::string output_dir;
};

RunConfig resolve_config(const GlobalFlags& flags) {
    RunConfig config =
        flags.config_path.empty() ? default_run_config() : load_run_config(flags.config_path);
    if (!flags.registry_path.empty()) config.registry_path = flags.registry_path;
    if (!flags.prompts_dir.empty()) config.prompts_dir = flags.prompts_dir;
    if (!flags.fixtures_dir.empty()) config.fixtures_dir = flags.fixtures_dir;
    if (!flags.output_dir.empty()) config.output_dir = flags.output_dir;
    return config;
}

void snapshot_into(const RunConfig& config, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_config_snapshot(config, dir / "resolved_config.toml");
}

const LiquidSpec& resolve_liquid(const Registry& registry, const std::string& name_or_id) {
    if (!name_or_id.empty() &&
        name_or_id.find_first_not_of("0123456789") == std::string::npos)
        return liquid_by_id(registry, std::stoi(name_or_id));
    if (const LiquidSpec* liquid = liquid_by_name(registry, name_or_id)) return *liquid;
    throw Error("no liquid named '" + name_or_id + "' in the registry");
}

std::string mask_slug(const std::string& mask_csv) {
    std::string slug = mask_csv;
    for (char& c : slug)
        if (c == ',') c = '-';
    return slug;
}

// -- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string liquid;
    std::string fill = "two-thirds";
    std::uint64_t seed = 0;
    double duration = 10.0;
    double rate = 100.0;
    std::string out = "signal.csv";
};

int cmd_simulate(const RunConfig& config, const SimulateArgs& args) {
    validate_run_config(config);
    const Registry registry = load_registry(config.registry_path);
    const LiquidSpec& liquid = resolve_liquid(registry, args.liquid);
    const FillLevel fill = fill_level_from_string(args.fill);

    TorqueSignal signal = simulate_shake(params_from(liquid, fill, config.sim), args.duration,
                                         args.rate, args.seed);
    signal.meta.liquid_id = liquid.id;
    signal.meta.fill = fill;

    const std::filesystem::path out = args.out;
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    write_signal_csv(signal, out);
    snapshot_into(config, out.has_parent_path() ? out.parent_path()
                                                : std::filesystem::current_path());
    std::cout << "wrote " << out.string() << " (" << signal.samples.size() << " samples, raw)\n";
    return kExitOk;
}

// -- process ----------------------------------------------------------------

struct ProcessArgs {
    std::string in;
    std::string out = "processed.csv";
};

int cmd_process(const RunConfig& config, const ProcessArgs& args) {
    validate_run_config(config);
    const TorqueSignal raw = read_signal_csv(args.in);
    if (raw.meta.stage != SignalStage::Raw)
        throw MalformedConfig("process expects a raw signal; " + args.in + " has stage " +
                              to_string(raw.meta.stage));
    const TorqueSignal standardized = standardize(lowpass(raw, config.dsp));

    const std::filesystem::path out = args.out;
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    write_signal_csv(standardized, out);
    snapshot_into(config, out.has_parent_path() ? out.parent_path()
                                                : std::filesystem::current_path());
    std::cout << "wrote " << out.string() << " (standardized)\n";
    return kExitOk;
}

// -- plot -------------------------------------------------------------------

struct PlotArgs {
    std::string in;
    std::string in2;
    std::string out = "plot.svg";
};

int cmd_plot(const RunConfig& config, const PlotArgs& args) {
    validate_run_config(config);
    PlotStyle style = config.plot;
    const auto ext = std::filesystem::path(args.out).extension().string();
    if (ext == ".png") style.format = ImageFormat::PNG;
    else if (ext == ".svg") style.format = ImageFormat::SVG;

    const TorqueSignal first = read_signal_csv(args.in);
    PlotImage image = render_timeseries(first, style);
    if (!args.in2.empty()) {
        const TorqueSignal second = read_signal_csv(args.in2);
        image = concat_horizontal(image, render_timeseries(second, style));
    }

    const std::filesystem::path out = args.out;
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    save_image(image, out);
    snapshot_into(config, out.has_parent_path() ? out.parent_path()
                                                : std::filesystem::current_path());
    std::cout << "wrote " << out.string() << " (" << image.width << "x" << image.height
              << ")\n";
    return kExitOk;
}

// -- pairwise ---------------------------------------------------------------

struct PairwiseArgs {
    std::string backend;
    std::string prompt = "both";
    std::string fills;
    int trials = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = -1;
    std::string report;
};

std::unique_ptr<Backend> make_flat_backend(const RunConfig& config) {
    switch (config.backend) {
        case BackendKind::HeuristicOracle:
            return std::make_unique<HeuristicOracleBackend>(config.dsp,
                                                            config.delta_thresholds);
        case BackendKind::RemoteLVLM:
            return std::make_unique<RemoteLvlmBackend>(config.lvlm);
        case BackendKind::Replay: {
            if (config.replay_script.empty())
                throw MalformedConfig("replay backend needs backend.replay_script");
            return std::make_unique<ReplayBackend>(
                ReplayBackend::load_script(config.replay_script));
        }
        case BackendKind::RuleBased:
            throw MalformedConfig(
                "the rule-based backend plans episodes; use it with `recognize`");
    }
    throw MalformedConfig("unsupported backend");
}

int cmd_pairwise(RunConfig config, const PairwiseArgs& args) {
    if (!args.backend.empty()) config.backend = backend_kind_from_string(args.backend);
    if (args.trials > 0) config.eval.trials = args.trials;
    if (args.workers > 0) config.eval.workers = args.workers;
    if (args.seed_set) config.eval.seed_base = args.seed;
    if (!args.fills.empty()) {
        config.eval.fills.clear();
        if (args.fills == "all") {
            config.eval.fills = {FillLevel::OneThird, FillLevel::Half, FillLevel::TwoThirds};
        } else {
            std::istringstream in(args.fills);
            std::string token;
            while (std::getline(in, token, ','))
                config.eval.fills.push_back(fill_level_from_string(token));
        }
    }
    validate_run_config(config);

    const Registry registry = load_registry(config.registry_path);
    const PromptLibrary lib = PromptLibrary::load(config.prompts_dir);
    const auto backend = make_flat_backend(config);

    std::vector<PromptVariant> variants;
    if (args.prompt == "both")
        variants = {PromptVariant::Plain, PromptVariant::KnowledgeEnhanced};
    else
        variants = {prompt_variant_from_string(args.prompt)};

    std::filesystem::create_directories(config.output_dir);
    std::vector<PairwiseResult> all;
    for (const PromptVariant variant : variants) {
        std::vector<PairwiseResult> results;
        try {
            pairwise_experiment_into(results, registry, config.eval, variant, *backend,
                                     config.sim, lib, config.plot);
        } catch (...) {
            // Abort, but flush whatever trials completed first.
            write_pairwise_csv(results,
                               config.output_dir / ("pairwise_results_" + to_string(variant) +
                                                    "_partial.csv"));
            throw;
        }
        write_pairwise_csv(results,
                           config.output_dir /
                               ("pairwise_results_" + to_string(variant) + ".csv"));
        std::cout << to_string(variant) << ": " << results.size() << " trials, accuracy "
                  << accuracy(results) << "%\n";
        all.insert(all.end(), results.begin(), results.end());
    }

    const std::string markdown =
        pairwise_report_markdown(all, registry, config.eval.bin_edges);
    const std::filesystem::path report_path =
        args.report.empty() ? config.output_dir / "pairwise_report.md"
                            : std::filesystem::path(args.report);
    if (report_path.has_parent_path())
        std::filesystem::create_directories(report_path.parent_path());
    std::ofstream(report_path) << markdown;
    snapshot_into(config, config.output_dir);
    std::cout << "report: " << report_path.string() << "\n";
    return kExitOk;
}

// -- recognize ----------------------------------------------------------------

struct RecognizeArgs {
    std::string backend;
    std::string setting;
    std::vector<std::string> actions;
    int trials = -1;
    std::string mode;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string report;
    bool save_traces = false;
};

int cmd_recognize(RunConfig config, const RecognizeArgs& args) {
    if (!args.backend.empty()) config.backend = backend_kind_from_string(args.backend);
    if (args.trials > 0) config.eval.trials = args.trials;
    if (!args.mode.empty()) config.mode = env_mode_from_string(args.mode);
    if (args.seed_set) config.eval.seed_base = args.seed;
    validate_run_config(config);

    const Registry registry = load_registry(config.registry_path);
    const PromptLibrary lib = PromptLibrary::load(config.prompts_dir);

    std::vector<SceneSetting> settings;
    if (args.setting == "both")
        settings = {SceneSetting::WithoutLabels, SceneSetting::WithLabels};
    else if (!args.setting.empty())
        settings = {scene_setting_from_string(args.setting)};
    else
        settings = {config.setting};

    std::vector<std::string> mask_specs = args.actions;
    if (mask_specs.empty()) mask_specs = {config.mask.to_string()};

    const BackendFactory factory = [&](std::uint64_t episode_seed) -> std::unique_ptr<Backend> {
        switch (config.backend) {
            case BackendKind::RuleBased:
                return std::make_unique<RuleBasedBackend>(registry, episode_seed, config.dsp,
                                                          config.delta_thresholds,
                                                          config.class_thresholds);
            case BackendKind::Replay:
                if (config.replay_script.empty())
                    throw MalformedConfig("replay backend needs backend.replay_script");
                return std::make_unique<ReplayBackend>(
                    ReplayBackend::load_script(config.replay_script));
            case BackendKind::RemoteLVLM:
                return std::make_unique<RemoteLvlmBackend>(config.lvlm);
            case BackendKind::HeuristicOracle:
                throw MalformedConfig(
                    "the haptic oracle cannot plan episodes; use rule, replay or lvlm");
        }
        throw MalformedConfig("unsupported backend");
    };

    std::filesystem::create_directories(config.output_dir);
    std::vector<RecognitionResultRow> all_rows;
    for (const SceneSetting setting : settings) {
        const auto fixture_dir = config.fixtures_dir / to_string(setting);
        const SceneFixture fixture = load_scene_fixture(fixture_dir);
        const EnvironmentHandle env = make_sim_environment(
            fixture, registry, config.sim, config.mode, config.episode_fill);

        for (const std::string& mask_csv : mask_specs) {
            const ActionMask mask = ActionMask::from_string(mask_csv);
            const std::string slug =
                to_string(setting) + "_" + mask_slug(mask.to_string());
            std::optional<std::filesystem::path> trace_dir;
            if (args.save_traces) trace_dir = config.output_dir / ("traces_" + slug);
            const RecognitionOutcome outcome =
                recognition_experiment(registry, env, mask, config.eval.trials, factory, lib,
                                       config.eval.seed_base, config.eval.seed_stride,
                                       trace_dir);
            all_rows.insert(all_rows.end(), outcome.rows.begin(), outcome.rows.end());
            std::ofstream(config.output_dir / ("confusion_" + slug + ".csv"))
                << confusion_csv(outcome.matrix, registry);
            std::ofstream(config.output_dir / ("confusion_" + slug + ".svg"))
                << confusion_heatmap_svg(outcome.matrix, registry);
            std::cout << to_string(setting) << " / " << mask.to_string() << ": accuracy "
                      << outcome.accuracy_percent << "% (" << outcome.matrix.excluded_invalid()
                      << " invalid excluded)\n";
        }
    }

    write_recognition_csv(all_rows, config.output_dir / "recognition_results.csv");
    const std::string markdown = recognition_report_markdown(all_rows);
    const std::filesystem::path report_path =
        args.report.empty() ? config.output_dir / "recognition_report.md"
                            : std::filesystem::path(args.report);
    if (report_path.has_parent_path())
        std::filesystem::create_directories(report_path.parent_path());
    std::ofstream(report_path) << markdown;
    snapshot_into(config, config.output_dir);
    std::cout << "report: " << report_path.string() << "\n";
    return kExitOk;
}

// -- report -------------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> pairwise_csv;
    std::string recognition_csv;
};

int cmd_report(const RunConfig& config, const ReportArgs& args) {
    validate_run_config(config);
    const Registry registry = load_registry(config.registry_path);
    std::filesystem::create_directories(config.output_dir);

    if (!args.pairwise_csv.empty()) {
        std::vector<PairwiseResult> all;
        for (const auto& path : args.pairwise_csv) {
            const auto results = read_pairwise_csv(path);
            all.insert(all.end(), results.begin(), results.end());
        }
        std::ofstream(config.output_dir / "pairwise_report.md")
            << pairwise_report_markdown(all, registry, config.eval.bin_edges);
        std::cout << "wrote " << (config.output_dir / "pairwise_report.md").string() << "\n";
    }
    if (!args.recognition_csv.empty()) {
        const auto rows = read_recognition_csv(args.recognition_csv);
        std::ofstream(config.output_dir / "recognition_report.md")
            << recognition_report_markdown(rows);

        // Regenerate confusion grids for every (setting, mask) cell present.
        std::vector<std::pair<SceneSetting, std::string>> cells;
        for (const auto& row : rows) {
            const auto cell = std::make_pair(row.setting, row.mask);
            if (std::find(cells.begin(), cells.end(), cell) == cells.end())
                cells.push_back(cell);
        }
        for (const auto& [setting, mask] : cells) {
            const ConfusionMatrix matrix =
                matrix_from_rows(rows, static_cast<int>(registry.size()), setting, mask);
            const std::string slug = to_string(setting) + "_" + mask_slug(mask);
            std::ofstream(config.output_dir / ("confusion_" + slug + ".csv"))
                << confusion_csv(matrix, registry);
            std::ofstream(config.output_dir / ("confusion_" + slug + ".svg"))
                << confusion_heatmap_svg(matrix, registry);
        }
        std::cout << "wrote " << (config.output_dir / "recognition_report.md").string()
                  << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interactive liquid perception at desk scale"};
    app.require_subcommand(1);

    GlobalFlags flags;
    app.add_option("--config", flags.config_path, "TOML run configuration file");
    app.add_option("--registry", flags.registry_path, "registry JSON path override");
    app.add_option("--prompts", flags.prompts_dir, "prompt template directory override");
    app.add_option("--fixtures", flags.fixtures_dir, "fixture directory override");
    app.add_option("--out-dir", flags.output_dir, "output directory override");

    SimulateArgs simulate_args;
    auto* simulate = app.add_subcommand("simulate", "synthesize a raw shake signal");
    simulate->add_option("--liquid", simulate_args.liquid, "liquid name or id")->required();
    simulate->add_option("--fill", simulate_args.fill, "one-third|half|two-thirds");
    simulate->add_option("--seed", simulate_args.seed, "noise seed");
    simulate->add_option("--duration", simulate_args.duration, "seconds");
    simulate->add_option("--rate", simulate_args.rate, "sample rate, Hz");
    simulate->add_option("--out", simulate_args.out, "output CSV path");

    ProcessArgs process_args;
    auto* process = app.add_subcommand("process", "low-pass filter and standardize a raw signal");
    process->add_option("--in", process_args.in, "raw CSV path")->required();
    process->add_option("--out", process_args.out, "output CSV path");

    PlotArgs plot_args;
    auto* plot = app.add_subcommand("plot", "render one or two processed signals");
    plot->add_option("--in", plot_args.in, "standardized CSV path")->required();
    plot->add_option("--in2", plot_args.in2, "second CSV (concatenated horizontally)");
    plot->add_option("--out", plot_args.out, "output .svg or .png path");

    PairwiseArgs pairwise_args;
    auto* pairwise = app.add_subcommand("pairwise", "pairwise viscosity-relation experiment");
    pairwise->add_option("--backend", pairwise_args.backend, "heuristic|lvlm|replay");
    pairwise->add_option("--prompt", pairwise_args.prompt, "plain|knowledge|both");
    pairwise->add_option("--fills", pairwise_args.fills, "all or CSV of fill levels");
    pairwise->add_option("--trials", pairwise_args.trials, "trials per pair per fill");
    pairwise->add_option("--seed", pairwise_args.seed, "seed base")
        ->each([&](const std::string&) { pairwise_args.seed_set = true; });
    pairwise->add_option("--workers", pairwise_args.workers, "worker threads");
    pairwise->add_option("--report", pairwise_args.report, "markdown report path");

    RecognizeArgs recognize_args;
    auto* recognize = app.add_subcommand("recognize", "liquid recognition experiment");
    recognize->add_option("--backend", recognize_args.backend, "rule|replay|lvlm");
    recognize->add_option("--setting", recognize_args.setting, "labels|nolabels|both");
    recognize->add_option("--actions", recognize_args.actions,
                          "action mask, e.g. scene or scene,container,shake (repeatable)");
    recognize->add_option("--trials", recognize_args.trials, "trials per liquid");
    recognize->add_option("--mode", recognize_args.mode, "descriptor|image");
    recognize->add_option("--seed", recognize_args.seed, "seed base")
        ->each([&](const std::string&) { recognize_args.seed_set = true; });
    recognize->add_option("--report", recognize_args.report, "markdown report path");
    recognize->add_flag("--save-traces", recognize_args.save_traces,
                        "write per-episode JSONL traces and step image artifacts");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "regenerate reports from result CSVs");
    report->add_option("--pairwise", report_args.pairwise_csv,
                       "pairwise result CSV (repeatable)");
    report->add_option("--recognition", report_args.recognition_csv,
                       "recognition result CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig config = resolve_config(flags);
        if (simulate->parsed()) return cmd_simulate(config, simulate_args);
        if (process->parsed()) return cmd_process(config, process_args);
        if (plot->parsed()) return cmd_plot(config, plot_args);
        if (pairwise->parsed()) return cmd_pairwise(config, pairwise_args);
        if (recognize->parsed()) return cmd_recognize(config, recognize_args);
        if (report->parsed()) return cmd_report(config, report_args);
        std::cerr << "no subcommand given\n";
        return kExitValidation;
    } catch (const BackendUnavailable& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const ProviderUnavailable& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const ReplayExhausted& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
