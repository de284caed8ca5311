#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "liquidsense/core.hpp"
#include "liquidsense/perception.hpp"
#include "liquidsense/sloshsim.hpp"
#include "liquidsense/vision.hpp"

namespace liquidsense {

enum class EnvMode { ImageMode, DescriptorMode };

std::string to_string(EnvMode m);
EnvMode env_mode_from_string(const std::string& s);

/// Offline environment: a scene fixture plus a deterministic signal source
/// for every detected container.
struct EnvironmentHandle {
    SceneFixture fixture;
    /// (container index, fill, seed) -> raw torque signal.
    std::function<TorqueSignal(int, FillLevel, std::uint64_t)> signal_source;
    EnvMode mode = EnvMode::DescriptorMode;
    FillLevel fill = FillLevel::TwoThirds;
    PlotStyle plot_style;
    PromptVariant haptic_variant = PromptVariant::KnowledgeEnhanced;
};

/// Simulator-backed environment over a fixture and registry. Validates that
/// every detection index has a registry entry to synthesize from.
EnvironmentHandle make_sim_environment(SceneFixture fixture, const Registry& registry,
                                       const SimConfig& sim = {},
                                       EnvMode mode = EnvMode::DescriptorMode,
                                       FillLevel fill = FillLevel::TwoThirds);

/// Exploration actions the agent may use this run. Finish is always allowed.
struct ActionMask {
    bool look_scene = true;
    bool look_container = true;
    bool shake = true;

    bool allows(Action::Kind kind) const;
    std::vector<std::string> allowed_action_forms() const;
    static ActionMask from_string(const std::string& csv);  // "scene,container,shake"
    std::string to_string() const;
};

struct RecognitionTask {
    std::string question;
    /// Ground-truth name, used for scoring only; backends never see it
    /// outside the question text itself.
    std::string target_name;
    std::string in_context_example;
    EnvironmentHandle environment;
    int max_steps = 12;
};

enum class EpisodeOutcome { Answered, Invalid, StepBudgetExhausted };

std::string to_string(EpisodeOutcome o);

struct EpisodeTrace {
    struct Step {
        std::string predicted;
        Action action;
        std::string raw_backend_text;
        Observation observation;
    };
    std::vector<Step> steps;
    EpisodeOutcome outcome = EpisodeOutcome::Invalid;
    int answer_index = -1;  // valid when outcome == Answered
};

struct EpisodeOptions {
    ActionMask mask;
    std::uint64_t episode_seed = 0;
    /// When set, per-step image artifacts are written here.
    std::optional<std::filesystem::path> artifact_dir;
};

/// One reasoning step: query the backend with (question, example, serialized
/// context) and parse the (predicted properties, action) reply. An
/// unparseable or masked action is re-asked once; nullopt action means the
/// episode is invalid.
std::pair<std::string, std::optional<Action>> react_step(const RecognitionTask& task,
                                                         const EpisodeContext& context,
                                                         Backend& backend,
                                                         const ActionMask& mask,
                                                         const PromptLibrary& lib);

/// Execute a non-Finish action against the environment and textualize the
/// feedback. Degenerate shake signals surface as an observation noting
/// unusable feedback; the episode continues.
Observation perceive(const Action& action, const EnvironmentHandle& env, Backend& backend,
                     const PromptLibrary& lib, std::uint64_t step_seed,
                     const std::optional<std::filesystem::path>& artifact_dir = std::nullopt,
                     int step_index = 0);

/// Run the react/perceive loop until Finish, an invalid step, or the step
/// budget. Deterministic given a deterministic backend.
EpisodeTrace run_episode(const RecognitionTask& task, Backend& backend,
                         const PromptLibrary& lib, const EpisodeOptions& options = {});

/// JSON Lines trace: one step record per line plus a trailing summary record.
void write_trace_jsonl(const EpisodeTrace& trace, const std::filesystem::path& path);
std::string trace_to_jsonl(const EpisodeTrace& trace);

}  // namespace liquidsense
