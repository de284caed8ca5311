#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "liquidsense/core.hpp"
#include "liquidsense/render.hpp"

namespace liquidsense {

enum class SceneSetting { WithLabels, WithoutLabels };

std::string to_string(SceneSetting s);
SceneSetting scene_setting_from_string(const std::string& s);

/// Pre-collected scene: detections plus per-index visual attributes, with an
/// optional rendered scene image.
struct SceneFixture {
    SceneSetting setting = SceneSetting::WithoutLabels;
    std::optional<PlotImage> scene_image;
    std::vector<BBox> detections;
    std::vector<VisualDescriptor> descriptors;
};

/// Load `manifest.json`, `detections.json`, `descriptors.json` and the
/// optional `scene.svg`/`scene.png` from a fixture directory. Label text is
/// stripped on load for without-labels fixtures. Throws MalformedFixture.
SceneFixture load_scene_fixture(const std::filesystem::path& dir);
void save_scene_fixture(const SceneFixture& fixture, const std::filesystem::path& dir);

/// Stored descriptor for an index; label_text removed in the without-labels
/// setting. Throws UnknownIndex.
VisualDescriptor descriptor_of(const SceneFixture& fixture, int index);

/// One-line structured rendering of a descriptor:
/// "index 3: color amber; transparency translucent; shape bottle; material
/// plastic; label 'Pure Peanut Oil'."
std::string textualize_descriptor(const VisualDescriptor& d);

/// Per-index coarse color list: "index 0: dark brown. index 1: clear. ..."
std::string textualize_scene_colors(const SceneFixture& fixture);

/// Source of bounding boxes for a scene image.
class DetectionProvider {
public:
    virtual ~DetectionProvider() = default;
    /// Throws ProviderUnavailable on transport failure, NoDetections when
    /// the provider yields an empty box list.
    virtual std::vector<BBox> detect(const PlotImage& scene,
                                     std::span<const std::string> queries) = 0;
};

/// Returns the fixture's stored detections verbatim.
class FixtureDetectionProvider : public DetectionProvider {
public:
    explicit FixtureDetectionProvider(SceneFixture fixture);
    std::vector<BBox> detect(const PlotImage& scene,
                             std::span<const std::string> queries) override;

private:
    SceneFixture fixture_;
};

/// HTTP client for an external open-vocabulary detector. POSTs the image
/// bytes and text queries as JSON; expects a JSON box list back. Boxes
/// without indices are numbered left to right.
class RemoteDetectionProvider : public DetectionProvider {
public:
    /// `endpoint` like "http://host:port/detect". Falls back to the
    /// DETECTOR_ENDPOINT environment variable when empty.
    explicit RemoteDetectionProvider(std::string endpoint = {}, int timeout_s = 10);
    std::vector<BBox> detect(const PlotImage& scene,
                             std::span<const std::string> queries) override;

private:
    std::string endpoint_;
    int timeout_s_;
};

}  // namespace liquidsense
