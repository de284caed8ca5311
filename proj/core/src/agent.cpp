#include "liquidsense/agent.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "liquidsense/dsp.hpp"
#include "liquidsense/render.hpp"

namespace liquidsense {

using nlohmann::json;

std::string to_string(EnvMode m) {
    return m == EnvMode::ImageMode ? "image" : "descriptor";
}

EnvMode env_mode_from_string(const std::string& s) {
    if (s == "image") return EnvMode::ImageMode;
    if (s == "descriptor") return EnvMode::DescriptorMode;
    throw Error("unknown environment mode: " + s);
}

std::string to_string(EpisodeOutcome o) {
    switch (o) {
        case EpisodeOutcome::Answered: return "answered";
        case EpisodeOutcome::Invalid: return "invalid";
        case EpisodeOutcome::StepBudgetExhausted: return "step_budget_exhausted";
    }
    return "invalid";
}

// ---------------------------------------------------------------------------
// Environment and masks
// ---------------------------------------------------------------------------

EnvironmentHandle make_sim_environment(SceneFixture fixture, const Registry& registry,
                                       const SimConfig& sim, EnvMode mode, FillLevel fill) {
    for (const auto& box : fixture.detections)
        liquid_by_id(registry, box.index);  // throws UnknownIndex on a gap

    EnvironmentHandle env;
    env.fixture = std::move(fixture);
    env.mode = mode;
    env.fill = fill;
    env.signal_source = [registry, sim](int index, FillLevel f, std::uint64_t seed) {
        const SloshParams params = params_from(liquid_by_id(registry, index), f, sim);
        return simulate_shake(params, 10.0, 100.0, seed);
    };
    return env;
}

bool ActionMask::allows(Action::Kind kind) const {
    switch (kind) {
        case Action::Kind::LookScene: return look_scene;
        case Action::Kind::LookContainer: return look_container;
        case Action::Kind::ShakeContainer: return shake;
        case Action::Kind::Finish: return true;
    }
    return false;
}

std::vector<std::string> ActionMask::allowed_action_forms() const {
    std::vector<std::string> forms;
    if (look_scene) forms.push_back("Look[Scene]");
    if (look_container) forms.push_back("Look[Container i]");
    if (shake) forms.push_back("Shake[i]");
    forms.push_back("Finish[i]");
    return forms;
}

ActionMask ActionMask::from_string(const std::string& csv) {
    ActionMask mask{false, false, false};
    std::istringstream in(csv);
    std::string token;
    while (std::getline(in, token, ',')) {
        token.erase(std::remove_if(token.begin(), token.end(), ::isspace), token.end());
        if (token == "all") return ActionMask{};
        if (token == "scene") mask.look_scene = true;
        else if (token == "container") mask.look_container = true;
        else if (token == "shake") mask.shake = true;
        else if (token == "finish" || token.empty()) continue;
        else throw Error("unknown action mask token: " + token);
    }
    return mask;
}

std::string ActionMask::to_string() const {
    std::string out;
    const auto add = [&](const char* name) {
        if (!out.empty()) out += ",";
        out += name;
    };
    if (look_scene) add("scene");
    if (look_container) add("container");
    if (shake) add("shake");
    return out.empty() ? "finish-only" : out;
}

// ---------------------------------------------------------------------------
// react / perceive / run
// ---------------------------------------------------------------------------

namespace {

bool action_valid(const Action& action, const ActionMask& mask, const EnvironmentHandle& env) {
    if (!mask.allows(action.kind)) return false;
    if (action.kind == Action::Kind::LookScene) return true;
    // Every indexed action must reference a detected container.
    return std::any_of(env.fixture.detections.begin(), env.fixture.detections.end(),
                       [&](const BBox& box) { return box.index == action.target; });
}

const BBox& box_for(const EnvironmentHandle& env, int index) {
    for (const auto& box : env.fixture.detections)
        if (box.index == index) return box;
    throw UnknownIndex("no detection with index " + std::to_string(index));
}

void maybe_save(const std::optional<std::filesystem::path>& dir, int step_index,
                const char* tag, const PlotImage& image) {
    if (!dir) return;
    std::filesystem::create_directories(*dir);
    char name[64];
    std::snprintf(name, sizeof(name), "step_%03d_%s.%s", step_index, tag,
                  image.format == ImageFormat::SVG ? "svg" : "png");
    save_image(image, *dir / name);
}

}  // namespace

namespace {

struct ReactResult {
    std::string raw;
    std::string predicted;
    std::optional<Action> action;
};

ReactResult react_step_raw(const RecognitionTask& task, const EpisodeContext& context,
                           Backend& backend, const ActionMask& mask,
                           const PromptLibrary& lib) {
    ReactQuery query;
    query.question = task.question;
    query.example = task.in_context_example;
    query.serialized_context = context.serialize();
    query.allowed_actions = mask.allowed_action_forms();
    const Prompt prompt = build_react_prompt(query, lib);

    auto ask = [&]() -> ReactResult {
        ReactResult result;
        result.raw = backend.answer(prompt, nullptr);
        auto [thought, action] = parse_react_reply(result.raw);
        result.predicted = thought.empty() ? result.raw : thought;
        if (action && !action_valid(*action, mask, task.environment)) action.reset();
        result.action = action;
        return result;
    };

    ReactResult result = ask();
    // One retry on an unparseable or masked action, then the episode is
    // declared invalid by the caller.
    if (!result.action) result = ask();
    return result;
}

}  // namespace

std::pair<std::string, std::optional<Action>> react_step(const RecognitionTask& task,
                                                         const EpisodeContext& context,
                                                         Backend& backend,
                                                         const ActionMask& mask,
                                                         const PromptLibrary& lib) {
    const ReactResult result = react_step_raw(task, context, backend, mask, lib);
    return {result.predicted, result.action};
}

Observation perceive(const Action& action, const EnvironmentHandle& env, Backend& backend,
                     const PromptLibrary& lib, std::uint64_t step_seed,
                     const std::optional<std::filesystem::path>& artifact_dir,
                     int step_index) {
    if (action.kind == Action::Kind::Finish)
        throw Error("perceive called with a Finish action");

    Observation obs;
    obs.source_action = action;

    switch (action.kind) {
        case Action::Kind::LookScene: {
            if (env.mode == EnvMode::DescriptorMode) {
                obs.text = textualize_scene_colors(env.fixture);
                break;
            }
            if (!env.fixture.scene_image)
                throw MalformedFixture("image-mode environment has no scene image");
            const PlotImage annotated =
                annotate_scene(*env.fixture.scene_image, env.fixture.detections);
            maybe_save(artifact_dir, step_index, "scene", annotated);
            obs.text = backend.answer(build_scene_prompt(annotated, lib), nullptr);
            break;
        }
        case Action::Kind::LookContainer: {
            const VisualDescriptor descriptor = descriptor_of(env.fixture, action.target);
            if (env.mode == EnvMode::DescriptorMode) {
                obs.text = textualize_descriptor(descriptor);
                obs.descriptor = descriptor;
                break;
            }
            if (!env.fixture.scene_image)
                throw MalformedFixture("image-mode environment has no scene image");
            const PlotImage cropped = crop(*env.fixture.scene_image, box_for(env, action.target));
            maybe_save(artifact_dir, step_index, "container", cropped);
            SideChannel side;
            side.descriptor = descriptor;
            obs.text = backend.answer(build_container_prompt(cropped, lib), &side);
            obs.descriptor = descriptor;
            break;
        }
        case Action::Kind::ShakeContainer: {
            const TorqueSignal raw = env.signal_source(action.target, env.fill, step_seed);
            TorqueSignal standardized;
            try {
                standardized = standardize(lowpass(raw));
            } catch (const DegenerateSignal&) {
                obs.text = "The torque feedback from container " +
                           std::to_string(action.target) +
                           " was flat and unusable; no viscosity estimate is possible.";
                return obs;
            }
            const PlotImage plot = render_timeseries(standardized, env.plot_style);
            maybe_save(artifact_dir, step_index, "shake", plot);
            const Prompt prompt = build_haptic_prompt(
                "shook container " + std::to_string(action.target), plot,
                env.haptic_variant, lib);
            SideChannel side;
            side.signals.push_back(raw);
            obs.text = backend.answer(prompt, &side);
            obs.viscosity = parse_viscosity(obs.text);
            break;
        }
        case Action::Kind::Finish:
            break;
    }
    return obs;
}

EpisodeTrace run_episode(const RecognitionTask& task, Backend& backend,
                         const PromptLibrary& lib, const EpisodeOptions& options) {
    EpisodeTrace trace;
    EpisodeContext context;

    for (int step = 0; step < task.max_steps; ++step) {
        const ReactResult react = react_step_raw(task, context, backend, options.mask, lib);
        EpisodeTrace::Step record;
        record.predicted = react.predicted;
        record.raw_backend_text = react.raw;

        if (!react.action) {
            trace.outcome = EpisodeOutcome::Invalid;
            record.action = Action{Action::Kind::Finish, -1};
            record.observation.text = "(no parseable action)";
            record.observation.source_action = record.action;
            trace.steps.push_back(std::move(record));
            return trace;
        }
        record.action = *react.action;

        if (react.action->kind == Action::Kind::Finish) {
            record.observation.source_action = *react.action;
            trace.steps.push_back(std::move(record));
            trace.outcome = EpisodeOutcome::Answered;
            trace.answer_index = react.action->target;
            return trace;
        }

        // Distinct shake seeds per step, derived from the episode seed.
        const std::uint64_t step_seed =
            options.episode_seed * 1000003ULL + static_cast<std::uint64_t>(step);
        Observation obs = perceive(*react.action, task.environment, backend, lib, step_seed,
                                   options.artifact_dir, step);
        record.observation = obs;
        trace.steps.push_back(record);
        context.append(react.predicted, *react.action, std::move(obs));
    }
    trace.outcome = EpisodeOutcome::StepBudgetExhausted;
    return trace;
}

// ---------------------------------------------------------------------------
// Trace serialization
// ---------------------------------------------------------------------------

std::string trace_to_jsonl(const EpisodeTrace& trace) {
    std::ostringstream out;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& step = trace.steps[i];
        json record;
        record["step"] = i + 1;
        record["predicted"] = step.predicted;
        record["action"] = to_string(step.action);
        record["raw"] = step.raw_backend_text;
        record["observation"] = step.observation.text;
        out << record.dump() << "\n";
    }
    json summary;
    summary["outcome"] = to_string(trace.outcome);
    summary["steps"] = trace.steps.size();
    if (trace.outcome == EpisodeOutcome::Answered) summary["answer"] = trace.answer_index;
    out << summary.dump() << "\n";
    return out.str();
}

void write_trace_jsonl(const EpisodeTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace: " + path.string());
    out << trace_to_jsonl(trace);
}

}  // namespace liquidsense
