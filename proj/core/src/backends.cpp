#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "liquidsense/perception.hpp"

namespace liquidsense {

using nlohmann::json;

std::string to_string(BackendKind k) {
    switch (k) {
        case BackendKind::RemoteLVLM: return "lvlm";
        case BackendKind::HeuristicOracle: return "heuristic";
        case BackendKind::RuleBased: return "rule";
        case BackendKind::Replay: return "replay";
    }
    return "heuristic";
}

BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "lvlm" || s == "remote") return BackendKind::RemoteLVLM;
    if (s == "heuristic" || s == "oracle") return BackendKind::HeuristicOracle;
    if (s == "rule" || s == "rulebased" || s == "rule-based") return BackendKind::RuleBased;
    if (s == "replay") return BackendKind::Replay;
    throw Error("unknown backend kind: " + s);
}

// ---------------------------------------------------------------------------
// Log-decrement measurement and verbalization
// ---------------------------------------------------------------------------

ViscosityClass class_from_log_decrement(double delta, const DeltaThresholds& t) {
    if (delta < t.low_below) return ViscosityClass::Low;
    if (delta < t.moderate_low_below) return ViscosityClass::ModerateLow;
    if (delta < t.moderate_below) return ViscosityClass::Moderate;
    if (delta < t.moderate_high_below) return ViscosityClass::ModerateHigh;
    return ViscosityClass::High;
}

std::optional<double> measure_log_decrement(const TorqueSignal& raw, const DspConfig& dsp) {
    try {
        const TorqueSignal filtered = lowpass(raw, dsp);
        const TorqueSignal standardized = standardize(filtered);
        const PeakList peaks = find_peaks(standardized, dsp.min_prominence);
        return log_decrement(peaks);
    } catch (const InsufficientPeaks&) {
        // So few resolvable peaks that the oscillation dies immediately:
        // treat as maximally damped.
        return std::numeric_limits<double>::infinity();
    } catch (const DegenerateSignal&) {
        return std::nullopt;
    }
}

namespace {

const char* envelope_phrase(ViscosityClass c) {
    switch (c) {
        case ViscosityClass::Low:
        case ViscosityClass::ModerateLow:
            return "peaks with slowly decreasing amplitudes";
        case ViscosityClass::Moderate:
            return "peaks with steadily decreasing amplitudes";
        case ViscosityClass::ModerateHigh:
        case ViscosityClass::High:
            return "peaks with rapidly decaying amplitudes";
        case ViscosityClass::Invalid: break;
    }
    return "an unclear oscillation pattern";
}

std::string verbalize_haptic(std::optional<double> delta, const DeltaThresholds& thresholds) {
    if (!delta)
        return "The signal is flat and carries no oscillation; I cannot estimate the "
               "viscosity from it.";
    const ViscosityClass cls = class_from_log_decrement(*delta, thresholds);
    std::string out = "The plot shows ";
    out += envelope_phrase(cls);
    out += ". The liquid appears to have " + class_phrase(cls) + " viscosity.";
    return out;
}

bool is_react_prompt(const Prompt& prompt) {
    return prompt.user_text.find("Question:") != std::string::npos &&
           prompt.user_text.find("Action:") != std::string::npos;
}

}  // namespace

// ---------------------------------------------------------------------------
// HeuristicOracleBackend
// ---------------------------------------------------------------------------

HeuristicOracleBackend::HeuristicOracleBackend(DspConfig dsp, DeltaThresholds thresholds,
                                               double peak_prominence)
    : dsp_(dsp), thresholds_(thresholds) {
    dsp_.min_prominence = peak_prominence;
}

std::string HeuristicOracleBackend::answer(const Prompt& prompt, const SideChannel* side) {
    if (is_react_prompt(prompt))
        return "I can only interpret haptic feedback, not plan actions.";
    if (!side || side->signals.empty())
        throw MissingSideChannel("the haptic oracle needs the signal behind the plot");

    if (side->signals.size() >= 2) {
        const auto left = measure_log_decrement(side->signals[0], dsp_);
        const auto right = measure_log_decrement(side->signals[1], dsp_);
        if (!left || !right || *left == *right)
            return "I cannot determine which is more viscous.";
        const bool left_wins = *left > *right;
        const char* chosen = left_wins ? "left" : "right";
        return std::string("The ") + chosen +
               " plot shows faster amplitude decay, so the " + chosen +
               " liquid is more viscous.";
    }
    return verbalize_haptic(measure_log_decrement(side->signals[0], dsp_), thresholds_);
}

// ---------------------------------------------------------------------------
// ReplayBackend
// ---------------------------------------------------------------------------

ReplayBackend::ReplayBackend(std::vector<std::string> script) : script_(std::move(script)) {}

std::vector<std::string> ReplayBackend::load_script(const std::filesystem::path& json_array) {
    std::ifstream in(json_array);
    if (!in) throw IoError("cannot open replay script: " + json_array.string());
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw IoError("replay script parse failure: " + std::string(e.what()));
    }
    if (!root.is_array()) throw IoError("replay script must be a JSON array of strings");
    std::vector<std::string> script;
    for (const auto& item : root) script.push_back(item.get<std::string>());
    return script;
}

std::string ReplayBackend::answer(const Prompt& /*prompt*/, const SideChannel* /*side*/) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (next_ >= script_.size())
        throw ReplayExhausted("replay script exhausted after " +
                              std::to_string(script_.size()) + " answers");
    return script_[next_++];
}

std::size_t ReplayBackend::consumed() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return next_;
}

// ---------------------------------------------------------------------------
// RuleBasedBackend
// ---------------------------------------------------------------------------

namespace {

struct ParsedContext {
    std::map<int, std::string> scene_colors;            // from Look[Scene]
    std::map<int, VisualDescriptor> container_views;    // from Look[Container i]
    std::map<int, std::string> container_raw;           // raw observation text
    std::map<int, ViscosityClass> shake_classes;        // from Shake[i]
    std::size_t step_count = 0;
};

/// Parse the structured descriptor line written by textualize_descriptor.
std::optional<VisualDescriptor> parse_descriptor_line(const std::string& text) {
    static const std::regex pattern(
        R"(index\s+(\d+):\s*color\s+([^;]+);\s*transparency\s+(\w+);\s*shape\s+(\w+);\s*material\s+(\w+);\s*label\s+([^.]+)\.)",
        std::regex::icase);
    std::smatch m;
    if (!std::regex_search(text, m, pattern)) return std::nullopt;
    VisualDescriptor d;
    d.index = std::stoi(m[1].str());
    d.color = m[2].str();
    try {
        d.transparency = transparency_from_string(m[3].str());
    } catch (const Error&) {
        d.transparency = Transparency::Opaque;
    }
    d.shape = m[4].str();
    d.material = m[5].str();
    const std::string label = m[6].str();
    if (label != "none") {
        const auto open = label.find('\'');
        const auto close = label.rfind('\'');
        if (open != std::string::npos && close > open)
            d.label_text = label.substr(open + 1, close - open - 1);
    }
    return d;
}

std::map<int, std::string> parse_scene_colors(const std::string& text) {
    std::map<int, std::string> colors;
    static const std::regex pattern(R"(index\s+(\d+):\s*([^.]+)\.)", std::regex::icase);
    for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern);
         it != std::sregex_iterator(); ++it)
        colors[std::stoi((*it)[1].str())] = (*it)[2].str();
    return colors;
}

ParsedContext parse_context_from_prompt(const std::string& user_text) {
    ParsedContext ctx;
    std::istringstream in(user_text);
    std::string line;
    std::optional<Action> last_action;
    while (std::getline(in, line)) {
        if (line.rfind("Action ", 0) == 0) {
            last_action = parse_action(line);
            ++ctx.step_count;
        } else if (line.rfind("Observation ", 0) == 0 && last_action) {
            const auto colon = line.find(": ");
            const std::string obs = colon == std::string::npos ? "" : line.substr(colon + 2);
            switch (last_action->kind) {
                case Action::Kind::LookScene:
                    ctx.scene_colors = parse_scene_colors(obs);
                    break;
                case Action::Kind::LookContainer:
                    ctx.container_raw[last_action->target] = obs;
                    if (auto d = parse_descriptor_line(obs))
                        ctx.container_views[last_action->target] = *d;
                    break;
                case Action::Kind::ShakeContainer:
                    ctx.shake_classes[last_action->target] = parse_viscosity(obs);
                    break;
                case Action::Kind::Finish:
                    break;
            }
            last_action.reset();
        }
    }
    return ctx;
}

std::string trim_copy(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string lower_copy(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool color_matches(const std::string& observed, const std::string& expected) {
    const std::string a = lower_copy(trim_copy(observed));
    const std::string b = lower_copy(trim_copy(expected));
    return a == b || a.find(b) != std::string::npos || b.find(a) != std::string::npos;
}

std::string join_indices(const std::vector<int>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(xs[i]);
    }
    return out;
}

}  // namespace

RuleBasedBackend::RuleBasedBackend(Registry registry, std::uint64_t seed, DspConfig dsp,
                                   DeltaThresholds delta_thresholds,
                                   ClassThresholds class_thresholds, double peak_prominence)
    : registry_(std::move(registry)),
      seed_(seed),
      dsp_(dsp),
      delta_thresholds_(delta_thresholds),
      class_thresholds_(class_thresholds) {
    dsp_.min_prominence = peak_prominence;
}

std::string RuleBasedBackend::answer(const Prompt& prompt, const SideChannel* side) {
    if (!is_react_prompt(prompt)) {
        // Perception question: haptic via the shared pipeline, visual via the
        // descriptor side channel.
        if (side && !side->signals.empty())
            return verbalize_haptic(measure_log_decrement(side->signals[0], dsp_),
                                    delta_thresholds_);
        if (side && side->descriptor) return textualize_descriptor(*side->descriptor);
        throw MissingSideChannel(
            "the rule-based backend needs a signal or descriptor side channel");
    }

    const std::string& user = prompt.user_text;

    // Target liquid: longest registry name mentioned in the question line.
    std::string question;
    {
        const auto pos = user.find("Question:");
        const auto eol = user.find('\n', pos);
        question = lower_copy(user.substr(pos, eol - pos));
    }
    const LiquidSpec* target = nullptr;
    for (const auto& liquid : registry_) {
        if (question.find(lower_copy(liquid.name)) != std::string::npos &&
            (!target || liquid.name.size() > target->name.size()))
            target = &liquid;
    }
    if (!target)
        return "Thought: The question does not name a liquid I know.\nAction: Finish[0]";

    const bool may_look_scene = user.find("Look[Scene]") != std::string::npos;
    const bool may_look_container = user.find("Look[Container") != std::string::npos;
    const bool may_shake = user.find("Shake[") != std::string::npos;

    const ParsedContext ctx = parse_context_from_prompt(user);

    const std::string expected_color = target->color;
    const ViscosityClass expected_class =
        viscosity_class_of(target->viscosity_mpas, class_thresholds_);
    const std::string expected_shape = to_string(target->container.shape);
    const std::string expected_material = to_string(target->container.material);

    if (ctx.scene_colors.empty() && may_look_scene) {
        return "Thought: " + target->name + " should appear " + expected_color + " with " +
               class_phrase(expected_class) +
               " viscosity. I will survey the scene first.\nAction: Look[Scene]";
    }

    // Candidates by coarse color.
    std::vector<int> candidates;
    if (!ctx.scene_colors.empty()) {
        for (const auto& [index, color] : ctx.scene_colors)
            if (color_matches(color, expected_color)) candidates.push_back(index);
        if (candidates.empty())
            for (const auto& [index, color] : ctx.scene_colors) candidates.push_back(index);
    } else {
        for (const auto& liquid : registry_) candidates.push_back(liquid.id);
    }

    // Refine with close-up container views.
    std::vector<int> refined;
    for (int index : candidates) {
        const auto view = ctx.container_views.find(index);
        if (view == ctx.container_views.end()) {
            // Unstructured close-up text still settles label questions.
            const auto raw = ctx.container_raw.find(index);
            if (raw != ctx.container_raw.end()) {
                const std::string obs = lower_copy(raw->second);
                if (obs.find(lower_copy(target->name)) != std::string::npos)
                    return "Thought: The close-up of container " + std::to_string(index) +
                           " names " + target->name + " directly.\nAction: Finish[" +
                           std::to_string(index) + "]";
                bool other = false;
                for (const auto& liquid : registry_)
                    if (liquid.id != target->id &&
                        obs.find(lower_copy(liquid.name)) != std::string::npos)
                        other = true;
                if (other) continue;
            }
            refined.push_back(index);
            continue;
        }
        const VisualDescriptor& d = view->second;
        if (d.label_text) {
            const std::string label = lower_copy(*d.label_text);
            if (label.find(lower_copy(target->name)) != std::string::npos)
                return "Thought: Container " + std::to_string(index) + " is labelled '" +
                       *d.label_text + "', which names the target.\nAction: Finish[" +
                       std::to_string(index) + "]";
            bool other = false;
            for (const auto& liquid : registry_)
                if (liquid.id != target->id &&
                    label.find(lower_copy(liquid.name)) != std::string::npos)
                    other = true;
            if (other) continue;
        }
        if (lower_copy(d.shape) != expected_shape) continue;
        if (lower_copy(d.material) != expected_material) continue;
        const bool observed_opaque = d.transparency == Transparency::Opaque;
        if (observed_opaque != target->container.opaque) continue;
        refined.push_back(index);
    }
    if (!refined.empty()) candidates = refined;

    // Refine with shake feedback: keep candidates within one class rank.
    std::vector<int> consistent;
    for (int index : candidates) {
        const auto it = ctx.shake_classes.find(index);
        if (it == ctx.shake_classes.end() || it->second == ViscosityClass::Invalid) {
            consistent.push_back(index);
            continue;
        }
        if (std::abs(class_rank(it->second) - class_rank(expected_class)) <= 1)
            consistent.push_back(index);
    }
    if (!consistent.empty()) candidates = consistent;

    const std::string thought_prefix =
        "Target " + target->name + ": expecting " + expected_color + " content with " +
        class_phrase(expected_class) + " viscosity; candidates " + join_indices(candidates) +
        ".";

    if (candidates.size() == 1)
        return "Thought: " + thought_prefix +
               " Exactly one candidate remains.\nAction: Finish[" +
               std::to_string(candidates.front()) + "]";

    if (may_look_container) {
        for (int index : candidates)
            if (!ctx.container_views.count(index) && !ctx.container_raw.count(index))
                return "Thought: " + thought_prefix + " I will inspect container " +
                       std::to_string(index) + " closely.\nAction: Look[Container " +
                       std::to_string(index) + "]";
    }
    if (may_shake) {
        for (int index : candidates)
            if (!ctx.shake_classes.count(index))
                return "Thought: " + thought_prefix + " I will shake container " +
                       std::to_string(index) + " to probe its viscosity.\nAction: Shake[" +
                       std::to_string(index) + "]";
    }

    // Nothing left to observe: commit to a seeded choice among the remaining
    // candidates.
    std::mt19937_64 gen(seed_ ^ (0x9e3779b97f4a7c15ULL * (ctx.step_count + 1)));
    const int pick = candidates[gen() % candidates.size()];
    return "Thought: " + thought_prefix +
           " No further observations are available, so I commit to container " +
           std::to_string(pick) + ".\nAction: Finish[" + std::to_string(pick) + "]";
}

// ---------------------------------------------------------------------------
// RefusalInjectingBackend
// ---------------------------------------------------------------------------

RefusalInjectingBackend::RefusalInjectingBackend(Backend& inner, int refusal_period)
    : inner_(inner), period_(refusal_period) {
    if (period_ < 1) throw Error("refusal period must be >= 1");
}

std::string RefusalInjectingBackend::answer(const Prompt& prompt, const SideChannel* side) {
    int call;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        call = calls_++;
    }
    if (call % period_ == period_ - 1)
        return "I cannot determine the answer to this question.";
    return inner_.answer(prompt, side);
}

}  // namespace liquidsense
