#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "liquidsense/core.hpp"
#include "liquidsense/dsp.hpp"
#include "liquidsense/render.hpp"
#include "liquidsense/vision.hpp"

namespace liquidsense {

// ---------------------------------------------------------------------------
// Prompts
// ---------------------------------------------------------------------------

struct Prompt {
    std::string system_text;
    std::string user_text;
    std::vector<PlotImage> images;
    double temperature = 0.0;  // fixed at 0 for deterministic inference
};

enum class PromptVariant { Plain, KnowledgeEnhanced };

std::string to_string(PromptVariant v);
PromptVariant prompt_variant_from_string(const std::string& s);

/// Plain-text template files with {placeholder} substitution. Unresolved
/// placeholders in a rendered template raise MalformedTemplate.
class PromptLibrary {
public:
    /// Load every *.txt file in a directory; the stem is the template name.
    static PromptLibrary load(const std::filesystem::path& dir);

    const std::string& raw(const std::string& name) const;
    std::string render(const std::string& name,
                       const std::map<std::string, std::string>& values) const;

private:
    std::map<std::string, std::string> templates_;
};

/// Substitute {key} markers in a template body.
std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& values);

Prompt build_haptic_prompt(const std::string& action_context, const PlotImage& plot,
                           PromptVariant variant, const PromptLibrary& lib);
Prompt build_pairwise_prompt(const PlotImage& pair_plot, PromptVariant variant,
                             const PromptLibrary& lib);
Prompt build_scene_prompt(const PlotImage& annotated, const PromptLibrary& lib);
Prompt build_container_prompt(const PlotImage& cropped, const PromptLibrary& lib);

struct ReactQuery {
    std::string question;
    std::string example;
    std::string serialized_context;
    std::vector<std::string> allowed_actions;  // textual action forms
};

Prompt build_react_prompt(const ReactQuery& query, const PromptLibrary& lib);

// ---------------------------------------------------------------------------
// Parsers (Invalid is a value, not an error)
// ---------------------------------------------------------------------------

/// Case-insensitive keyword extraction of a committed viscosity class.
/// Refusals, hedges without a committed choice, and contradictory committed
/// classes give ViscosityClass::Invalid.
ViscosityClass parse_viscosity(const std::string& text);

enum class PairwiseDecision { Left, Right, Invalid };

std::string to_string(PairwiseDecision d);
PairwiseDecision parse_pairwise(const std::string& text);

/// Grammar: Shake[i], Shake[Container i], Look[Scene], Look[Container i],
/// Look[i], Finish[i]. Returns nullopt for anything else.
std::optional<Action> parse_action(const std::string& text);

/// Split a react reply into (thought text, action). The action comes from the
/// last "Action:" line, or from anywhere in the text as a fallback.
std::pair<std::string, std::optional<Action>> parse_react_reply(const std::string& text);

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

enum class BackendKind { RemoteLVLM, HeuristicOracle, RuleBased, Replay };

std::string to_string(BackendKind k);
BackendKind backend_kind_from_string(const std::string& s);

/// Non-image evidence a backend may use instead of pixels: the signals behind
/// a haptic plot and/or the descriptor behind a visual crop.
struct SideChannel {
    std::vector<TorqueSignal> signals;  // raw; one for haptic, two for pairwise
    std::optional<VisualDescriptor> descriptor;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendKind kind() const = 0;
    /// Answer a prompt. Must be safe to call from multiple threads unless
    /// documented otherwise.
    virtual std::string answer(const Prompt& prompt, const SideChannel* side = nullptr) = 0;
};

/// Thresholds for mapping a measured log decrement onto the class scale.
struct DeltaThresholds {
    double low_below = 0.35;
    double moderate_low_below = 0.7;
    double moderate_below = 1.2;
    double moderate_high_below = 2.0;
};

ViscosityClass class_from_log_decrement(double delta, const DeltaThresholds& t = {});

/// Measure the log decrement of a raw signal through the full conditioning
/// pipeline. Returns +infinity when too few peaks survive (a very damped
/// signal) and nullopt when the signal is degenerate.
std::optional<double> measure_log_decrement(const TorqueSignal& raw, const DspConfig& dsp);

/// Answers haptic questions by running the dsp pipeline on the side-channel
/// signal(s) and verbalizing the resulting class or comparison.
///
/// The oracle analyzes with its own peak prominence (default 0.6): at the
/// default simulator noise, spurious tail peaks reach prominences near 0.25
/// in standardized units and would bias the decrement of rapidly decaying
/// signals downward.
class HeuristicOracleBackend : public Backend {
public:
    explicit HeuristicOracleBackend(DspConfig dsp = {}, DeltaThresholds thresholds = {},
                                    double peak_prominence = 0.6);
    BackendKind kind() const override { return BackendKind::HeuristicOracle; }
    std::string answer(const Prompt& prompt, const SideChannel* side) override;

private:
    DspConfig dsp_;
    DeltaThresholds thresholds_;
};

/// Scripted backend: returns the next line of its script on every call.
/// Calls are serialized internally; the script order is part of the contract.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(std::vector<std::string> script);
    /// Read a JSON array of strings.
    static std::vector<std::string> load_script(const std::filesystem::path& json_array);
    BackendKind kind() const override { return BackendKind::Replay; }
    std::string answer(const Prompt& prompt, const SideChannel* side) override;
    std::size_t consumed() const;

private:
    std::vector<std::string> script_;
    std::size_t next_ = 0;
    mutable std::mutex mutex_;
};

/// Deterministic scene-reasoning policy over descriptors and the registry:
/// picks candidates by coarse color, refines with container attributes and
/// shake feedback, and finishes on the best-matching index.
class RuleBasedBackend : public Backend {
public:
    RuleBasedBackend(Registry registry, std::uint64_t seed, DspConfig dsp = {},
                     DeltaThresholds delta_thresholds = {}, ClassThresholds class_thresholds = {},
                     double peak_prominence = 0.6);
    BackendKind kind() const override { return BackendKind::RuleBased; }
    std::string answer(const Prompt& prompt, const SideChannel* side) override;

private:
    Registry registry_;
    std::uint64_t seed_;
    DspConfig dsp_;
    DeltaThresholds delta_thresholds_;
    ClassThresholds class_thresholds_;
};

struct LvlmConfig {
    std::string endpoint;  // falls back to LVLM_ENDPOINT
    std::string api_key;   // falls back to LVLM_API_KEY
    std::string model = "gpt-4o";
    int timeout_s = 60;
    int max_retries = 2;
    double backoff_initial_s = 0.5;
};

/// Chat-completion client: one request per answer, temperature 0, images
/// attached as base64 data URLs. Raw PNG is required on the wire.
class RemoteLvlmBackend : public Backend {
public:
    explicit RemoteLvlmBackend(LvlmConfig config = {});
    BackendKind kind() const override { return BackendKind::RemoteLVLM; }
    std::string answer(const Prompt& prompt, const SideChannel* side) override;

    /// Request body for a prompt, exposed for wire-format tests.
    std::string request_body(const Prompt& prompt) const;

private:
    LvlmConfig config_;
};

/// Wraps another backend and replaces every refusal_period-th answer with a
/// refusal line (exclusion-rule test helper). Calls are serialized.
class RefusalInjectingBackend : public Backend {
public:
    RefusalInjectingBackend(Backend& inner, int refusal_period);
    BackendKind kind() const override { return inner_.kind(); }
    std::string answer(const Prompt& prompt, const SideChannel* side) override;

private:
    Backend& inner_;
    int period_;
    int calls_ = 0;
    std::mutex mutex_;
};

}  // namespace liquidsense
