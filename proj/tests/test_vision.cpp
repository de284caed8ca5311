#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "liquidsense/vision.hpp"

using namespace liquidsense;

TEST_CASE("bundled fixtures load with ten indexed detections") {
    for (const char* name : {"without_labels", "with_labels"}) {
        const SceneFixture fixture =
            load_scene_fixture(default_data_dir() / "fixtures" / name);
        REQUIRE(fixture.detections.size() == 10);
        REQUIRE(fixture.descriptors.size() == 10);
        for (int i = 0; i < 10; ++i) CHECK(fixture.detections[i].index == i);
        REQUIRE(fixture.scene_image.has_value());
        CHECK(fixture.scene_image->width == 1000);
        CHECK(fixture.scene_image->height == 300);
    }
}

TEST_CASE("without-labels fixtures never expose label text") {
    const SceneFixture fixture =
        load_scene_fixture(default_data_dir() / "fixtures" / "without_labels");
    CHECK(fixture.setting == SceneSetting::WithoutLabels);
    for (int i = 0; i < 10; ++i)
        CHECK(!descriptor_of(fixture, i).label_text.has_value());
    for (const auto& d : fixture.descriptors) CHECK(!d.label_text.has_value());
}

TEST_CASE("with-labels fixture carries the honey label") {
    const SceneFixture fixture =
        load_scene_fixture(default_data_dir() / "fixtures" / "with_labels");
    CHECK(fixture.setting == SceneSetting::WithLabels);
    const VisualDescriptor honey = descriptor_of(fixture, 8);
    REQUIRE(honey.label_text.has_value());
    CHECK(*honey.label_text == "Acaia Honey");

    // Dark soy sauce at index 4, per the scene ordering.
    const VisualDescriptor soy = descriptor_of(fixture, 4);
    CHECK(soy.color == "dark brown");
}

TEST_CASE("descriptor lookup of an unknown index fails") {
    const SceneFixture fixture =
        load_scene_fixture(default_data_dir() / "fixtures" / "without_labels");
    CHECK_THROWS_AS(descriptor_of(fixture, 99), UnknownIndex);
}

TEST_CASE("fixture save/load round-trips") {
    const SceneFixture fixture =
        load_scene_fixture(default_data_dir() / "fixtures" / "with_labels");
    const auto dir = std::filesystem::temp_directory_path() / "liquidsense_fixture";
    save_scene_fixture(fixture, dir);
    const SceneFixture loaded = load_scene_fixture(dir);

    CHECK(loaded.setting == fixture.setting);
    REQUIRE(loaded.detections.size() == fixture.detections.size());
    for (std::size_t i = 0; i < fixture.detections.size(); ++i)
        CHECK(loaded.detections[i] == fixture.detections[i]);
    REQUIRE(loaded.descriptors.size() == fixture.descriptors.size());
    for (std::size_t i = 0; i < fixture.descriptors.size(); ++i)
        CHECK(loaded.descriptors[i] == fixture.descriptors[i]);
    REQUIRE(loaded.scene_image.has_value());
    CHECK(loaded.scene_image->bytes == fixture.scene_image->bytes);
}

TEST_CASE("fixture provider returns stored detections verbatim") {
    const SceneFixture fixture =
        load_scene_fixture(default_data_dir() / "fixtures" / "without_labels");
    FixtureDetectionProvider provider(fixture);
    const std::vector<std::string> queries{"bottle"};
    const auto boxes = provider.detect(*fixture.scene_image, queries);
    REQUIRE(boxes.size() == 10);
    for (std::size_t i = 0; i < boxes.size(); ++i) CHECK(boxes[i] == fixture.detections[i]);
}

TEST_CASE("fixture provider with no stored boxes reports NoDetections") {
    SceneFixture empty;
    FixtureDetectionProvider provider(empty);
    PlotImage image;
    image.width = 10;
    image.height = 10;
    image.bytes = {1, 2, 3};
    const std::vector<std::string> queries;
    CHECK_THROWS_AS(provider.detect(image, queries), NoDetections);
}

TEST_CASE("textualization formats are stable") {
    VisualDescriptor d;
    d.index = 3;
    d.color = "amber";
    d.transparency = Transparency::Translucent;
    d.shape = "bottle";
    d.material = "plastic";
    CHECK(textualize_descriptor(d) ==
          "index 3: color amber; transparency translucent; shape bottle; material plastic; "
          "label none.");
    d.label_text = "Pure Peanut Oil";
    CHECK(textualize_descriptor(d) ==
          "index 3: color amber; transparency translucent; shape bottle; material plastic; "
          "label 'Pure Peanut Oil'.");

    SceneFixture fixture;
    fixture.descriptors.push_back({1, "clear", Transparency::Transparent, "bottle", "plastic",
                                   std::nullopt});
    fixture.descriptors.push_back({0, "dark brown", Transparency::Transparent, "bottle",
                                   "plastic", std::nullopt});
    fixture.detections.push_back({1, 0, 0, 1, 1});
    fixture.detections.push_back({0, 1, 0, 1, 1});
    CHECK(textualize_scene_colors(fixture) == "index 0: dark brown. index 1: clear.");
}

TEST_CASE("remote detection provider speaks the documented wire format") {
    nlohmann::json captured;
    httplib::Server server;
    server.Post("/detect", [&](const httplib::Request& req, httplib::Response& res) {
        captured = nlohmann::json::parse(req.body);
        // Two boxes without indices, deliberately out of x order.
        res.set_content(R"([{"x": 50, "y": 5, "w": 10, "h": 10},
                            {"x": 5, "y": 5, "w": 10, "h": 10}])",
                        "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread serve([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    Canvas canvas(64, 32, Rgb{255, 255, 255});
    const PlotImage scene = encode_png(canvas);
    const std::vector<std::string> queries{"bottle", "carton"};

    RemoteDetectionProvider provider("http://127.0.0.1:" + std::to_string(port) + "/detect");
    const auto boxes = provider.detect(scene, queries);

    REQUIRE(boxes.size() == 2);
    // Indexed left to right.
    CHECK(boxes[0].index == 0);
    CHECK(boxes[0].x == 5);
    CHECK(boxes[1].index == 1);
    CHECK(boxes[1].x == 50);

    CHECK(captured.at("format") == "png");
    CHECK(captured.at("queries").size() == 2);
    CHECK(captured.at("queries")[0] == "bottle");
    CHECK(!captured.at("image_b64").get<std::string>().empty());

    server.stop();
    serve.join();
}

TEST_CASE("remote provider maps transport failures to ProviderUnavailable") {
    Canvas canvas(8, 8, Rgb{0, 0, 0});
    const PlotImage scene = encode_png(canvas);
    const std::vector<std::string> queries{"bottle"};

    RemoteDetectionProvider unreachable("http://127.0.0.1:9/detect", /*timeout_s=*/1);
    CHECK_THROWS_AS(unreachable.detect(scene, queries), ProviderUnavailable);

    httplib::Server server;
    server.Post("/detect", [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
    });
    server.Post("/empty", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("[]", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread serve([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    RemoteDetectionProvider failing("http://127.0.0.1:" + std::to_string(port) + "/detect");
    CHECK_THROWS_AS(failing.detect(scene, queries), ProviderUnavailable);

    RemoteDetectionProvider empty("http://127.0.0.1:" + std::to_string(port) + "/empty");
    CHECK_THROWS_AS(empty.detect(scene, queries), NoDetections);

    server.stop();
    serve.join();
}

TEST_CASE("malformed fixtures are rejected") {
    const auto dir = std::filesystem::temp_directory_path() / "liquidsense_bad_fixture";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "manifest.json") << R"({"setting": "without_labels"})";
    std::ofstream(dir / "detections.json") << R"([{"index": 0, "x": 0, "y": 0, "w": 5, "h": 5}])";
    std::ofstream(dir / "descriptors.json") << R"([])";  // missing descriptor for index 0
    CHECK_THROWS_AS(load_scene_fixture(dir), MalformedFixture);
}
