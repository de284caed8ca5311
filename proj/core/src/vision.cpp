#include "liquidsense/vision.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "base64_detail.hpp"

namespace liquidsense {

using nlohmann::json;

std::string to_string(SceneSetting s) {
    return s == SceneSetting::WithLabels ? "with_labels" : "without_labels";
}

SceneSetting scene_setting_from_string(const std::string& s) {
    if (s == "with_labels" || s == "labels") return SceneSetting::WithLabels;
    if (s == "without_labels" || s == "nolabels") return SceneSetting::WithoutLabels;
    throw MalformedFixture("unknown scene setting: " + s);
}

namespace {

json load_json_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw MalformedFixture(std::string("missing ") + what + ": " + path.string());
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw MalformedFixture(std::string("cannot parse ") + what + ": " + e.what());
    }
    return root;
}

void validate_fixture(const SceneFixture& fixture) {
    if (fixture.detections.size() != fixture.descriptors.size())
        throw MalformedFixture("detections and descriptors disagree in size");
    for (std::size_t i = 0; i < fixture.detections.size(); ++i) {
        bool found = false;
        for (const auto& d : fixture.descriptors)
            if (d.index == fixture.detections[i].index) found = true;
        if (!found)
            throw MalformedFixture("no descriptor for detection index " +
                                   std::to_string(fixture.detections[i].index));
    }
    if (fixture.scene_image) {
        for (const auto& box : fixture.detections) {
            if (box.x < 0 || box.y < 0 || box.w <= 0 || box.h <= 0 ||
                box.x + box.w > fixture.scene_image->width ||
                box.y + box.h > fixture.scene_image->height)
                throw MalformedFixture("detection box " + std::to_string(box.index) +
                                       " outside the scene image");
        }
    }
}

}  // namespace

SceneFixture load_scene_fixture(const std::filesystem::path& dir) {
    SceneFixture fixture;

    const json manifest = load_json_file(dir / "manifest.json", "fixture manifest");
    try {
        fixture.setting = scene_setting_from_string(manifest.at("setting").get<std::string>());
    } catch (const json::exception& e) {
        throw MalformedFixture(std::string("manifest schema error: ") + e.what());
    }

    const json detections = load_json_file(dir / "detections.json", "detections");
    if (!detections.is_array()) throw MalformedFixture("detections.json must be an array");
    for (const auto& item : detections) {
        BBox box;
        try {
            box.index = item.at("index").get<int>();
            box.x = item.at("x").get<int>();
            box.y = item.at("y").get<int>();
            box.w = item.at("w").get<int>();
            box.h = item.at("h").get<int>();
        } catch (const json::exception& e) {
            throw MalformedFixture(std::string("detections schema error: ") + e.what());
        }
        fixture.detections.push_back(box);
    }

    const json descriptors = load_json_file(dir / "descriptors.json", "descriptors");
    if (!descriptors.is_array()) throw MalformedFixture("descriptors.json must be an array");
    for (const auto& item : descriptors) {
        VisualDescriptor d;
        try {
            d.index = item.at("index").get<int>();
            d.color = item.at("color").get<std::string>();
            d.transparency = transparency_from_string(item.at("transparency").get<std::string>());
            d.shape = item.at("shape").get<std::string>();
            d.material = item.at("material").get<std::string>();
            if (item.contains("label_text") && !item.at("label_text").is_null())
                d.label_text = item.at("label_text").get<std::string>();
        } catch (const json::exception& e) {
            throw MalformedFixture(std::string("descriptors schema error: ") + e.what());
        }
        // A without-labels fixture never carries label text, whatever the
        // file says.
        if (fixture.setting == SceneSetting::WithoutLabels) d.label_text.reset();
        fixture.descriptors.push_back(std::move(d));
    }

    if (std::filesystem::exists(dir / "scene.svg"))
        fixture.scene_image = load_image(dir / "scene.svg");
    else if (std::filesystem::exists(dir / "scene.png"))
        fixture.scene_image = load_image(dir / "scene.png");

    validate_fixture(fixture);
    return fixture;
}

void save_scene_fixture(const SceneFixture& fixture, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    json manifest;
    manifest["setting"] = to_string(fixture.setting);
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";

    json detections = json::array();
    for (const auto& box : fixture.detections)
        detections.push_back(
            {{"index", box.index}, {"x", box.x}, {"y", box.y}, {"w", box.w}, {"h", box.h}});
    std::ofstream(dir / "detections.json") << detections.dump(2) << "\n";

    json descriptors = json::array();
    for (const auto& d : fixture.descriptors) {
        json item;
        item["index"] = d.index;
        item["color"] = d.color;
        item["transparency"] = to_string(d.transparency);
        item["shape"] = d.shape;
        item["material"] = d.material;
        item["label_text"] = d.label_text ? json(*d.label_text) : json(nullptr);
        descriptors.push_back(std::move(item));
    }
    std::ofstream(dir / "descriptors.json") << descriptors.dump(2) << "\n";

    if (fixture.scene_image) {
        const char* name = fixture.scene_image->format == ImageFormat::SVG ? "scene.svg"
                                                                           : "scene.png";
        save_image(*fixture.scene_image, dir / name);
    }
}

VisualDescriptor descriptor_of(const SceneFixture& fixture, int index) {
    for (const auto& d : fixture.descriptors) {
        if (d.index == index) {
            VisualDescriptor out = d;
            if (fixture.setting == SceneSetting::WithoutLabels) out.label_text.reset();
            return out;
        }
    }
    throw UnknownIndex("no descriptor with index " + std::to_string(index));
}

std::string textualize_descriptor(const VisualDescriptor& d) {
    std::string out = "index " + std::to_string(d.index) + ": color " + d.color +
                      "; transparency " + to_string(d.transparency) + "; shape " + d.shape +
                      "; material " + d.material + "; label ";
    out += d.label_text ? "'" + *d.label_text + "'" : "none";
    out += ".";
    return out;
}

std::string textualize_scene_colors(const SceneFixture& fixture) {
    std::vector<const VisualDescriptor*> ordered;
    for (const auto& d : fixture.descriptors) ordered.push_back(&d);
    std::sort(ordered.begin(), ordered.end(),
              [](const VisualDescriptor* a, const VisualDescriptor* b) {
                  return a->index < b->index;
              });
    std::string out;
    for (const auto* d : ordered) {
        if (!out.empty()) out += " ";
        out += "index " + std::to_string(d->index) + ": " + d->color + ".";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Providers
// ---------------------------------------------------------------------------

FixtureDetectionProvider::FixtureDetectionProvider(SceneFixture fixture)
    : fixture_(std::move(fixture)) {}

std::vector<BBox> FixtureDetectionProvider::detect(const PlotImage& /*scene*/,
                                                   std::span<const std::string> /*queries*/) {
    if (fixture_.detections.empty())
        throw NoDetections("fixture stores no detections");
    return fixture_.detections;
}

RemoteDetectionProvider::RemoteDetectionProvider(std::string endpoint, int timeout_s)
    : endpoint_(std::move(endpoint)), timeout_s_(timeout_s) {
    if (endpoint_.empty()) {
        if (const char* env = std::getenv("DETECTOR_ENDPOINT"); env && *env) endpoint_ = env;
    }
}

std::vector<BBox> RemoteDetectionProvider::detect(const PlotImage& scene,
                                                  std::span<const std::string> queries) {
    if (endpoint_.empty())
        throw ProviderUnavailable("no detector endpoint configured (set DETECTOR_ENDPOINT)");

    const auto scheme_end = endpoint_.find("://");
    if (scheme_end == std::string::npos)
        throw ProviderUnavailable("malformed detector endpoint: " + endpoint_);
    const auto path_start = endpoint_.find('/', scheme_end + 3);
    const std::string host = path_start == std::string::npos
                                 ? endpoint_
                                 : endpoint_.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/"
                                                             : endpoint_.substr(path_start);

    json request;
    request["image_b64"] = base64_encode(scene.bytes);
    request["format"] = to_string(scene.format);
    request["queries"] = json::array();
    for (const auto& q : queries) request["queries"].push_back(q);

    httplib::Client client(host);
    client.set_connection_timeout(timeout_s_, 0);
    client.set_read_timeout(timeout_s_, 0);

    const auto res = client.Post(path, request.dump(), "application/json");
    if (!res)
        throw ProviderUnavailable("detector unreachable: " + endpoint_);
    if (res->status != 200)
        throw ProviderUnavailable("detector returned HTTP " + std::to_string(res->status));

    json body;
    try {
        body = json::parse(res->body);
    } catch (const json::exception& e) {
        throw ProviderUnavailable(std::string("detector response not JSON: ") + e.what());
    }
    const json& list = body.is_array() ? body : body.at("boxes");

    std::vector<BBox> boxes;
    try {
        for (const auto& item : list) {
            BBox box;
            box.x = item.at("x").get<int>();
            box.y = item.at("y").get<int>();
            box.w = item.at("w").get<int>();
            box.h = item.at("h").get<int>();
            box.index = item.contains("index") ? item.at("index").get<int>() : -1;
            boxes.push_back(box);
        }
    } catch (const json::exception& e) {
        throw ProviderUnavailable(std::string("detector box schema error: ") + e.what());
    }
    if (boxes.empty()) throw NoDetections("detector returned an empty box list");

    // Number unindexed detections left to right.
    if (std::any_of(boxes.begin(), boxes.end(), [](const BBox& b) { return b.index < 0; })) {
        std::sort(boxes.begin(), boxes.end(),
                  [](const BBox& a, const BBox& b) { return a.x < b.x; });
        for (std::size_t i = 0; i < boxes.size(); ++i)
            boxes[i].index = static_cast<int>(i);
    }
    return boxes;
}

}  // namespace liquidsense
