#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "liquidsense/agent.hpp"
#include "liquidsense/core.hpp"
#include "liquidsense/dsp.hpp"
#include "liquidsense/eval.hpp"
#include "liquidsense/perception.hpp"
#include "liquidsense/render.hpp"
#include "liquidsense/sloshsim.hpp"

namespace liquidsense {

/// TOML-style key/value document: [section] headers, `key = value` lines,
/// `#` comments. Values are quoted strings, numbers, booleans, or flat
/// arrays of numbers/strings. Keys are addressed as "section.key".
class ConfigDoc {
public:
    static ConfigDoc parse_file(const std::filesystem::path& path);
    static ConfigDoc parse_string(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, std::string fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_double_array(const std::string& key,
                                         std::vector<double> fallback) const;

    std::vector<std::string> keys() const;

private:
    std::map<std::string, std::string> scalars_;
    std::map<std::string, std::vector<std::string>> arrays_;
};

/// Everything a run needs, resolved: paths, backend, simulator, dsp,
/// thresholds, agent and eval parameters, plot style.
struct RunConfig {
    std::filesystem::path registry_path;
    std::filesystem::path fixtures_dir;  // parent of with_labels/ and without_labels/
    std::filesystem::path prompts_dir;
    std::filesystem::path output_dir = "out";

    BackendKind backend = BackendKind::HeuristicOracle;
    LvlmConfig lvlm;
    std::filesystem::path replay_script;

    SimConfig sim;
    DspConfig dsp;
    ClassThresholds class_thresholds;
    DeltaThresholds delta_thresholds;

    int max_steps = 12;
    ActionMask mask;
    EnvMode mode = EnvMode::DescriptorMode;
    FillLevel episode_fill = FillLevel::TwoThirds;
    SceneSetting setting = SceneSetting::WithoutLabels;

    EvalConfig eval;
    PlotStyle plot;
};

/// Defaults rooted at the bundled data directory.
RunConfig default_run_config();

/// Defaults overridden by a config file.
RunConfig load_run_config(const std::filesystem::path& path);

/// Apply a parsed document on top of a config. Unknown keys raise
/// MalformedConfig.
void apply_config(RunConfig& config, const ConfigDoc& doc);

/// Canonical TOML rendering of a resolved config; written next to run
/// artifacts for reproducibility. API keys are never serialized.
std::string serialize_run_config(const RunConfig& config);
void write_config_snapshot(const RunConfig& config, const std::filesystem::path& path);

/// Check paths exist and numeric parameters are in range; throws
/// MalformedConfig with the first violation.
void validate_run_config(const RunConfig& config);

}  // namespace liquidsense
