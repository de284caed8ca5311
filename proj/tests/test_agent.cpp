#include <doctest.h>

#include <algorithm>
#include <atomic>

#include "liquidsense/agent.hpp"
#include "liquidsense/eval.hpp"

using namespace liquidsense;

namespace {

Registry bundled_registry() {
    return load_registry(default_data_dir() / "registry.json");
}

PromptLibrary library() {
    return PromptLibrary::load(default_data_dir() / "prompts");
}

SceneFixture fixture(const char* name) {
    return load_scene_fixture(default_data_dir() / "fixtures" / name);
}

RecognitionTask task_for(const std::string& name, EnvironmentHandle env) {
    RecognitionTask task;
    task.question = "Which container holds the " + name + "?";
    task.target_name = name;
    task.environment = std::move(env);
    return task;
}

}  // namespace

TEST_CASE("sim environment demands a registry entry per detection") {
    Registry registry = bundled_registry();
    SceneFixture scene = fixture("without_labels");
    CHECK_NOTHROW(make_sim_environment(scene, registry));

    registry.resize(5);  // ids 5..9 now missing
    CHECK_THROWS_AS(make_sim_environment(scene, registry), UnknownIndex);
}

TEST_CASE("action masks parse and expose the allowed forms") {
    const ActionMask full = ActionMask::from_string("scene,container,shake");
    CHECK(full.allows(Action::Kind::LookScene));
    CHECK(full.allows(Action::Kind::LookContainer));
    CHECK(full.allows(Action::Kind::ShakeContainer));
    CHECK(full.allows(Action::Kind::Finish));
    CHECK(full.to_string() == "scene,container,shake");

    const ActionMask scene_only = ActionMask::from_string("scene");
    CHECK(scene_only.allows(Action::Kind::LookScene));
    CHECK(!scene_only.allows(Action::Kind::ShakeContainer));
    CHECK(!scene_only.allows(Action::Kind::LookContainer));
    CHECK(scene_only.allows(Action::Kind::Finish));

    CHECK(ActionMask::from_string("all").to_string() == "scene,container,shake");
    CHECK_THROWS(ActionMask::from_string("scene,jump"));
}

TEST_CASE("replayed peanut-oil episode answers container 3 deterministically") {
    const Registry registry = bundled_registry();
    const PromptLibrary lib = library();
    const EnvironmentHandle env = make_sim_environment(
        fixture("without_labels"), registry, SimConfig{}, EnvMode::ImageMode);
    const auto script =
        ReplayBackend::load_script(default_data_dir() / "replay" /
                                   "peanut_oil_without_labels.json");

    EpisodeOptions options;
    options.episode_seed = 17;

    const auto run = [&]() {
        ReplayBackend backend(script);
        const RecognitionTask task =
            task_for("peanut oil", env);
        return run_episode(task, backend, lib, options);
    };

    const EpisodeTrace first = run();
    CHECK(first.outcome == EpisodeOutcome::Answered);
    CHECK(first.answer_index == 3);
    REQUIRE(first.steps.size() == 5);
    CHECK(first.steps[0].action == Action::look_scene());
    CHECK(first.steps[1].action == Action::look_container(3));
    CHECK(first.steps[2].action == Action::shake(3));
    CHECK(first.steps[3].action == Action::shake(5));
    CHECK(first.steps[4].action == Action::finish(3));

    const EpisodeTrace second = run();
    CHECK(trace_to_jsonl(first) == trace_to_jsonl(second));
}

TEST_CASE("replayed honey-with-labels episode reproduces the confusion") {
    const Registry registry = bundled_registry();
    const PromptLibrary lib = library();
    const EnvironmentHandle env = make_sim_environment(
        fixture("with_labels"), registry, SimConfig{}, EnvMode::ImageMode);
    ReplayBackend backend(ReplayBackend::load_script(default_data_dir() / "replay" /
                                                     "honey_with_labels.json"));

    const RecognitionTask task = task_for("honey", env);
    const EpisodeTrace trace = run_episode(task, backend, lib, {});
    CHECK(trace.outcome == EpisodeOutcome::Answered);
    CHECK(trace.answer_index == 3);  // ground truth is container 8
    const LiquidSpec* honey = liquid_by_name(registry, "honey");
    REQUIRE(honey != nullptr);
    CHECK(honey->id == 8);
    CHECK(trace.answer_index != honey->id);
}

TEST_CASE("masked actions are re-asked once and then invalidate the episode") {
    const Registry registry = bundled_registry();
    const PromptLibrary lib = library();

    std::atomic<int> shakes{0};
    EnvironmentHandle env = make_sim_environment(fixture("without_labels"), registry);
    const auto inner = env.signal_source;
    env.signal_source = [&, inner](int index, FillLevel fill, std::uint64_t seed) {
        ++shakes;
        return inner(index, fill, seed);
    };

    ReplayBackend backend({"Thought: shake it.\nAction: Shake[3]",
                           "Thought: shake it anyway.\nAction: Shake[4]"});
    RecognitionTask task = task_for("water", env);
    EpisodeOptions options;
    options.mask = ActionMask::from_string("scene");

    const EpisodeTrace trace = run_episode(task, backend, lib, options);
    CHECK(trace.outcome == EpisodeOutcome::Invalid);
    CHECK(backend.consumed() == 2);  // one re-ask
    CHECK(shakes.load() == 0);       // nothing masked ever reached the environment
}

TEST_CASE("unparseable replies invalidate after one retry") {
    const Registry registry = bundled_registry();
    const PromptLibrary lib = library();
    const EnvironmentHandle env = make_sim_environment(fixture("without_labels"), registry);

    ReplayBackend backend({"Dance[2]", "Dance[2] again"});
    const EpisodeTrace trace = run_episode(task_for("water", env), backend, lib, {});
    CHECK(trace.outcome == EpisodeOutcome::Invalid);
    CHECK(backend.consumed() == 2);
}

TEST_CASE("finish with an unknown container index is rejected as invalid") {
    const Registry registry = bundled_registry();
    const PromptLibrary lib = library();
    const EnvironmentHandle env = make_sim_environment(fixture("without_labels"), registry);

    ReplayBackend backend({"Thought: done.\nAction: Finish[99]",
                           "Thought: really done.\nAction: Finish[99]"});
    const EpisodeTrace trace = run_episode(task_for("water", env), backend, lib, {});
    CHECK(trace.outcome == EpisodeOutcome::Invalid);
}

TEST_CASE("a script that never finishes exhausts the step budget") {
    const Registry registry = bundled_registry();
    const PromptLibrary lib = library();
    const EnvironmentHandle env = make_sim_environment(fixture("without_labels"), registry);

    std::vector<std::string> script(40, "Thought: look again.\nAction: Look[Scene]");
    ReplayBackend backend(script);
    RecognitionTask task = task_for("water", env);
    task.max_steps = 4;
    const EpisodeTrace trace = run_episode(task, backend, lib, {});
    CHECK(trace.outcome == EpisodeOutcome::StepBudgetExhausted);
    CHECK(trace.steps.size() == 4);
}

TEST_CASE("degenerate shake feedback becomes an observation, not an error") {
    const Registry registry = bundled_registry();
    const PromptLibrary lib = library();

    EnvironmentHandle env = make_sim_environment(fixture("without_labels"), registry);
    env.signal_source = [](int, FillLevel, std::uint64_t) {
        TorqueSignal flat;
        flat.sample_rate_hz = 100.0;
        flat.duration_s = 10.0;
        flat.samples.assign(1000, 0.0);
        flat.meta.stage = SignalStage::Raw;
        return flat;
    };

    ReplayBackend backend({"Thought: shake first.\nAction: Shake[2]",
                           "Thought: that told me nothing; water is clear, container 1.\n"
                           "Action: Finish[1]"});
    const EpisodeTrace trace = run_episode(task_for("water", env), backend, lib, {});
    CHECK(trace.outcome == EpisodeOutcome::Answered);
    CHECK(trace.answer_index == 1);
    REQUIRE(trace.steps.size() == 2);
    CHECK(trace.steps[0].observation.text.find("unusable") != std::string::npos);
}

TEST_CASE("descriptor-mode observations textualize without backend perception calls") {
    const Registry registry = bundled_registry();
    const PromptLibrary lib = library();
    const EnvironmentHandle env =
        make_sim_environment(fixture("without_labels"), registry, SimConfig{},
                             EnvMode::DescriptorMode);

    // Scene and container looks consume no script entries in descriptor mode.
    ReplayBackend backend({"Thought: survey.\nAction: Look[Scene]",
                           "Thought: check 3.\nAction: Look[Container 3]",
                           "Thought: amber plastic bottle, like peanut oil.\nAction: Finish[3]"});
    const EpisodeTrace trace = run_episode(task_for("peanut oil", env), backend, lib, {});
    CHECK(trace.outcome == EpisodeOutcome::Answered);
    CHECK(trace.steps[0].observation.text.find("index 0: dark brown.") != std::string::npos);
    CHECK(trace.steps[1].observation.text.find("material plastic") != std::string::npos);
    CHECK(backend.consumed() == 3);
}

TEST_CASE("rule-based backend recognizes peanut oil from descriptors") {
    const Registry registry = bundled_registry();
    const PromptLibrary lib = library();
    const EnvironmentHandle env =
        make_sim_environment(fixture("without_labels"), registry, SimConfig{},
                             EnvMode::DescriptorMode);

    RuleBasedBackend backend(registry, 5);
    const EpisodeTrace trace = run_episode(task_for("peanut oil", env), backend, lib, {});
    CHECK(trace.outcome == EpisodeOutcome::Answered);
    CHECK(trace.answer_index == 3);
}

TEST_CASE("trace jsonl has one record per step plus a summary") {
    EpisodeTrace trace;
    trace.outcome = EpisodeOutcome::Answered;
    trace.answer_index = 2;
    trace.steps.push_back({"thought", Action::look_scene(), "raw",
                           Observation{"obs", Action::look_scene(), {}, {}}});
    const std::string jsonl = trace_to_jsonl(trace);
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 2);
    CHECK(jsonl.find("\"outcome\":\"answered\"") != std::string::npos);
    CHECK(jsonl.find("\"answer\":2") != std::string::npos);
}
