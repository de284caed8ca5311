#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <limits>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "liquidsense/dsp.hpp"
#include "liquidsense/perception.hpp"
#include "liquidsense/sloshsim.hpp"

using namespace liquidsense;

namespace {

PromptLibrary library() {
    return PromptLibrary::load(default_data_dir() / "prompts");
}

PlotImage small_plot(ImageFormat format = ImageFormat::SVG) {
    SloshParams params;
    params.damping_ratio = 0.1;
    params.natural_frequency_rad_s = 6.28;
    PlotStyle style;
    style.format = format;
    return render_timeseries(standardize(lowpass(simulate_shake(params, 10.0, 100.0, 1))),
                             style);
}

TorqueSignal raw_signal_for(double viscosity, double length_m, std::uint64_t seed,
                            double noise_ratio = 0.05) {
    LiquidSpec liquid;
    liquid.viscosity_mpas = viscosity;
    liquid.container.effective_length_m = length_m;
    SimConfig sim;
    sim.noise_sigma_ratio = noise_ratio;
    return simulate_shake(params_from(liquid, FillLevel::TwoThirds, sim), 10.0, 100.0, seed);
}

}  // namespace

// ---------------------------------------------------------------------------
// Templates and builders
// ---------------------------------------------------------------------------

TEST_CASE("template placeholders substitute and unknown keys fail") {
    CHECK(render_template("a {x} c", {{"x", "b"}}) == "a b c");
    CHECK_THROWS_AS(render_template("a {x} c", {}), MalformedTemplate);
    CHECK_THROWS_AS(render_template("a {x c", {{"x", "b"}}), MalformedTemplate);
}

TEST_CASE("knowledge-enhanced haptic prompts carry both reference descriptions") {
    const PromptLibrary lib = library();
    const PlotImage plot = small_plot();

    const Prompt enhanced =
        build_haptic_prompt("shook container 3", plot, PromptVariant::KnowledgeEnhanced, lib);
    CHECK(enhanced.user_text.find("peaks with slowly decreasing amplitudes") !=
          std::string::npos);
    CHECK(enhanced.user_text.find("peaks with rapidly decaying amplitudes") !=
          std::string::npos);
    CHECK(enhanced.user_text.find("Action taken: shook container 3.") != std::string::npos);
    CHECK(enhanced.temperature == 0.0);
    REQUIRE(enhanced.images.size() == 1);

    const Prompt plain =
        build_haptic_prompt("shook container 3", plot, PromptVariant::Plain, lib);
    CHECK(plain.user_text.find("slowly decreasing amplitudes") == std::string::npos);
    CHECK(plain.user_text.find("rapidly decaying amplitudes") == std::string::npos);

    const Prompt no_context = build_haptic_prompt("", plot, PromptVariant::Plain, lib);
    CHECK(no_context.user_text.find("Action taken:") == std::string::npos);
}

TEST_CASE("pairwise prompt ends with the comparison question") {
    const PromptLibrary lib = library();
    const PlotImage pair = concat_horizontal(small_plot(), small_plot());
    const Prompt prompt = build_pairwise_prompt(pair, PromptVariant::KnowledgeEnhanced, lib);
    const std::string question = "Which one is more viscous?";
    REQUIRE(prompt.user_text.size() >= question.size());
    CHECK(prompt.user_text.substr(prompt.user_text.size() - question.size()) == question);
    REQUIRE(prompt.images.size() == 1);

    const Prompt plain = build_pairwise_prompt(pair, PromptVariant::Plain, lib);
    CHECK(plain.user_text.find("rapidly decaying") == std::string::npos);
}

TEST_CASE("scene prompt embeds the generic-label example, container prompt none") {
    const PromptLibrary lib = library();
    const Prompt scene = build_scene_prompt(small_plot(), lib);
    CHECK(scene.user_text.find("[Input Image]") != std::string::npos);
    CHECK(scene.user_text.find("color") != std::string::npos);

    const Prompt container = build_container_prompt(small_plot(), lib);
    CHECK(container.user_text.find("[Input Image]") == std::string::npos);
    CHECK(container.user_text.find("Output:") == std::string::npos);
}

TEST_CASE("prompt builders are pure functions of their inputs") {
    const PromptLibrary lib = library();
    const PlotImage plot = small_plot();
    const Prompt a = build_haptic_prompt("ctx", plot, PromptVariant::KnowledgeEnhanced, lib);
    const Prompt b = build_haptic_prompt("ctx", plot, PromptVariant::KnowledgeEnhanced, lib);
    CHECK(a.system_text == b.system_text);
    CHECK(a.user_text == b.user_text);
    REQUIRE(a.images.size() == b.images.size());
    CHECK(a.images[0].bytes == b.images[0].bytes);
}

// ---------------------------------------------------------------------------
// Parsers
// ---------------------------------------------------------------------------

TEST_CASE("viscosity parsing handles classes, hedges and refusals") {
    CHECK(parse_viscosity("The liquid appears to have moderate to high viscosity") ==
          ViscosityClass::ModerateHigh);
    CHECK(parse_viscosity("I cannot determine which is more viscous.") ==
          ViscosityClass::Invalid);
    CHECK(parse_viscosity("Definitely low viscosity.") == ViscosityClass::Low);
    CHECK(parse_viscosity("low to moderate, I would say") == ViscosityClass::ModerateLow);
    CHECK(parse_viscosity("The decay suggests HIGH viscosity!") == ViscosityClass::High);
    CHECK(parse_viscosity("It might be low.") == ViscosityClass::Invalid);  // hedge only
    CHECK(parse_viscosity("It is low. No wait, it is high.") == ViscosityClass::Invalid);
    CHECK(parse_viscosity("nothing to see here") == ViscosityClass::Invalid);
    // A committed class wins over a hedged alternative in another sentence.
    CHECK(parse_viscosity("It could be high. The pattern clearly shows low viscosity.") ==
          ViscosityClass::Low);
}

TEST_CASE("rendered class phrases round-trip through the parser") {
    for (ViscosityClass cls :
         {ViscosityClass::Low, ViscosityClass::ModerateLow, ViscosityClass::Moderate,
          ViscosityClass::ModerateHigh, ViscosityClass::High}) {
        CHECK(parse_viscosity("The liquid has " + class_phrase(cls) + " viscosity.") == cls);
    }
}

TEST_CASE("pairwise parsing extracts the committed side") {
    CHECK(parse_pairwise("The left one is more viscous.") == PairwiseDecision::Left);
    CHECK(parse_pairwise("the RIGHT plot decays faster") == PairwiseDecision::Right);
    CHECK(parse_pairwise("The first liquid is thicker.") == PairwiseDecision::Left);
    CHECK(parse_pairwise("I cannot determine which is more viscous.") ==
          PairwiseDecision::Invalid);
    CHECK(parse_pairwise("no side named") == PairwiseDecision::Invalid);
    // Both sides mentioned: the claim sentence decides.
    CHECK(parse_pairwise("The left plot decays slower than the right, so the right liquid "
                         "is more viscous.") == PairwiseDecision::Right);
}

TEST_CASE("action grammar parses the documented forms") {
    CHECK(*parse_action("Shake[3]") == Action::shake(3));
    CHECK(*parse_action("shake[Container 4]") == Action::shake(4));
    CHECK(*parse_action("Look[Scene]") == Action::look_scene());
    CHECK(*parse_action("Look[Container 7]") == Action::look_container(7));
    CHECK(*parse_action("look[2]") == Action::look_container(2));
    CHECK(*parse_action("Finish[8]") == Action::finish(8));
    CHECK(!parse_action("Dance[2]").has_value());
    CHECK(!parse_action("Finish").has_value());  // Finish must carry an index
    CHECK(!parse_action("Shake[]").has_value());
}

TEST_CASE("react replies split into thought and action") {
    const auto [thought, action] =
        parse_react_reply("Thought: the milk should be white.\nAction: Look[Scene]");
    CHECK(thought == "the milk should be white.");
    REQUIRE(action.has_value());
    CHECK(*action == Action::look_scene());

    const auto [unparsed_thought, no_action] = parse_react_reply("I give up.");
    CHECK(!no_action.has_value());
}

// ---------------------------------------------------------------------------
// Delta-to-class map
// ---------------------------------------------------------------------------

TEST_CASE("delta thresholds map monotonically onto classes") {
    CHECK(class_from_log_decrement(0.1) == ViscosityClass::Low);
    CHECK(class_from_log_decrement(0.5) == ViscosityClass::ModerateLow);
    CHECK(class_from_log_decrement(1.0) == ViscosityClass::Moderate);
    CHECK(class_from_log_decrement(1.5) == ViscosityClass::ModerateHigh);
    CHECK(class_from_log_decrement(2.5) == ViscosityClass::High);
    CHECK(class_from_log_decrement(std::numeric_limits<double>::infinity()) ==
          ViscosityClass::High);

    int previous = -1;
    for (double delta : {0.01, 0.34, 0.36, 0.69, 0.71, 1.19, 1.21, 1.99, 2.01, 50.0}) {
        const int rank = class_rank(class_from_log_decrement(delta));
        CHECK(rank >= previous);
        previous = rank;
    }
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

TEST_CASE("heuristic oracle names the more viscous side and flips with order") {
    const PromptLibrary lib = library();
    HeuristicOracleBackend oracle;

    const TorqueSignal water = raw_signal_for(1.0, 0.22, 11, 0.0);
    const TorqueSignal honey = raw_signal_for(10000.0, 0.12, 12, 0.0);
    const Prompt prompt = build_pairwise_prompt(concat_horizontal(small_plot(), small_plot()),
                                                PromptVariant::KnowledgeEnhanced, lib);

    SideChannel water_left;
    water_left.signals = {water, honey};
    const std::string right_wins = oracle.answer(prompt, &water_left);
    CHECK(parse_pairwise(right_wins) == PairwiseDecision::Right);

    SideChannel honey_left;
    honey_left.signals = {honey, water};
    const std::string left_wins = oracle.answer(prompt, &honey_left);
    CHECK(parse_pairwise(left_wins) == PairwiseDecision::Left);
}

TEST_CASE("heuristic oracle classifies honey as high viscosity at default noise") {
    const PromptLibrary lib = library();
    HeuristicOracleBackend oracle;
    const Prompt prompt =
        build_haptic_prompt("shook container 8", small_plot(), PromptVariant::KnowledgeEnhanced,
                            lib);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SideChannel side;
        side.signals = {raw_signal_for(10000.0, 0.12, seed)};
        const ViscosityClass cls = parse_viscosity(oracle.answer(prompt, &side));
        const bool high_or_mh =
            cls == ViscosityClass::High || cls == ViscosityClass::ModerateHigh;
        CHECK(high_or_mh);
    }
}

TEST_CASE("heuristic oracle refuses without a side channel") {
    const PromptLibrary lib = library();
    HeuristicOracleBackend oracle;
    const Prompt prompt =
        build_haptic_prompt("", small_plot(), PromptVariant::KnowledgeEnhanced, lib);
    CHECK_THROWS_AS(oracle.answer(prompt, nullptr), MissingSideChannel);
    SideChannel empty;
    CHECK_THROWS_AS(oracle.answer(prompt, &empty), MissingSideChannel);
}

TEST_CASE("replay backend returns its script in order and then fails") {
    ReplayBackend replay({"one", "two", "three"});
    Prompt prompt;
    CHECK(replay.answer(prompt, nullptr) == "one");
    CHECK(replay.answer(prompt, nullptr) == "two");
    CHECK(replay.answer(prompt, nullptr) == "three");
    CHECK_THROWS_AS(replay.answer(prompt, nullptr), ReplayExhausted);
    CHECK(replay.consumed() == 3);
}

TEST_CASE("bundled replay scripts load as string arrays") {
    const auto script =
        ReplayBackend::load_script(default_data_dir() / "replay" /
                                   "peanut_oil_without_labels.json");
    CHECK(script.size() == 9);
    CHECK(script.front().find("Action: Look[Scene]") != std::string::npos);
}

TEST_CASE("refusal wrapper injects scripted refusals at the configured period") {
    ReplayBackend inner(std::vector<std::string>(8, "The left one is more viscous."));
    RefusalInjectingBackend wrapped(inner, 5);
    Prompt prompt;
    int invalid = 0;
    for (int i = 0; i < 10; ++i) {
        if (i == 4 || i == 9) {
            // Refusal turns; the inner script is not consumed.
            CHECK(parse_pairwise(wrapped.answer(prompt, nullptr)) ==
                  PairwiseDecision::Invalid);
            ++invalid;
        } else {
            CHECK(parse_pairwise(wrapped.answer(prompt, nullptr)) == PairwiseDecision::Left);
        }
    }
    CHECK(invalid == 2);
}

// ---------------------------------------------------------------------------
// Remote LVLM client
// ---------------------------------------------------------------------------

TEST_CASE("lvlm backend validates configuration before any network call") {
    ::setenv("LVLM_API_KEY", "", 1);
    ::setenv("LVLM_ENDPOINT", "", 1);
    LvlmConfig config;
    config.endpoint = "http://127.0.0.1:9/v1/chat/completions";
    RemoteLvlmBackend backend(config);
    Prompt prompt;
    prompt.user_text = "hi";
    CHECK_THROWS_AS(backend.answer(prompt, nullptr), BackendUnavailable);
}

TEST_CASE("lvlm request body follows the chat-completion wire format") {
    LvlmConfig config;
    config.api_key = "k";
    config.endpoint = "http://example.invalid/v1/chat/completions";
    config.model = "test-model";
    RemoteLvlmBackend backend(config);

    Prompt prompt;
    prompt.system_text = "sys";
    prompt.user_text = "user";
    prompt.images.push_back(small_plot(ImageFormat::PNG));

    const nlohmann::json body = nlohmann::json::parse(backend.request_body(prompt));
    CHECK(body.at("temperature") == 0.0);
    CHECK(body.at("model") == "test-model");
    REQUIRE(body.at("messages").size() == 2);
    CHECK(body["messages"][0].at("role") == "system");
    CHECK(body["messages"][1].at("role") == "user");
    const auto& content = body["messages"][1].at("content");
    REQUIRE(content.size() == 2);
    CHECK(content[0].at("type") == "text");
    CHECK(content[1].at("type") == "image_url");
    const std::string url = content[1].at("image_url").at("url");
    CHECK(url.rfind("data:image/png;base64,", 0) == 0);

    // SVG images cannot go over this wire.
    Prompt svg_prompt;
    svg_prompt.user_text = "user";
    svg_prompt.images.push_back(small_plot(ImageFormat::SVG));
    CHECK_THROWS_AS(backend.request_body(svg_prompt), BackendUnavailable);
}

TEST_CASE("lvlm backend answers through a chat-completion server with retries") {
    std::atomic<int> calls{0};
    httplib::Server server;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                            httplib::Response& res) {
        const int n = ++calls;
        if (n == 1) {
            res.status = 500;  // first attempt fails transiently
            return;
        }
        CHECK(req.get_header_value("Authorization") == "Bearer test-key");
        const auto body = nlohmann::json::parse(req.body);
        CHECK(body.at("temperature") == 0.0);
        nlohmann::json reply;
        reply["choices"] = nlohmann::json::array();
        reply["choices"].push_back(
            {{"message", {{"role", "assistant"}, {"content", "The right one is more viscous."}}}});
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread serve([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    LvlmConfig config;
    config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    config.api_key = "test-key";
    config.backoff_initial_s = 0.01;
    RemoteLvlmBackend backend(config);

    Prompt prompt;
    prompt.system_text = "sys";
    prompt.user_text = "which one?";
    prompt.images.push_back(small_plot(ImageFormat::PNG));

    const std::string answer = backend.answer(prompt, nullptr);
    CHECK(parse_pairwise(answer) == PairwiseDecision::Right);
    CHECK(calls.load() == 2);

    server.stop();
    serve.join();
}
