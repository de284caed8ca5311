#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "liquidsense/errors.hpp"

namespace liquidsense {

// ---------------------------------------------------------------------------
// Containers and liquids
// ---------------------------------------------------------------------------

enum class ContainerShape { Bottle, Carton, Jar, Can };
enum class ContainerMaterial { Plastic, Glass, Paper, Metal };

struct ContainerSpec {
    ContainerShape shape = ContainerShape::Bottle;
    ContainerMaterial material = ContainerMaterial::Plastic;
    bool opaque = false;
    /// Axis from bottom to opening, meters. Drives the slosh frequency.
    double effective_length_m = 0.25;
};

/// One registry entry: a liquid plus the container it ships in.
struct LiquidSpec {
    int id = 0;
    std::string name;
    /// Nominal viscosity, mPa·s. Must be > 0.
    double viscosity_mpas = 1.0;
    /// Coarse color of the content ("amber", "opaque white", ...).
    std::string color;
    ContainerSpec container;
    /// Present only in the with-labels setting.
    std::optional<std::string> label_text;
};

using Registry = std::vector<LiquidSpec>;

enum class FillLevel { OneThird, Half, TwoThirds };

std::string to_string(ContainerShape s);
std::string to_string(ContainerMaterial m);
std::string to_string(FillLevel f);
ContainerShape container_shape_from_string(const std::string& s);
ContainerMaterial container_material_from_string(const std::string& s);
FillLevel fill_level_from_string(const std::string& s);

/// Load a registry JSON file (array of liquid objects).
/// Throws MalformedRegistry on parse failure, duplicate or non-contiguous
/// ids, or non-positive viscosity.
Registry load_registry(const std::filesystem::path& path);

/// Write a registry back out in the same JSON schema.
void save_registry(const Registry& registry, const std::filesystem::path& path);

/// Validate the registry invariants without touching the filesystem.
void validate_registry(const Registry& registry);

const LiquidSpec& liquid_by_id(const Registry& registry, int id);
const LiquidSpec* liquid_by_name(const Registry& registry, const std::string& name);

// ---------------------------------------------------------------------------
// Qualitative viscosity scale
// ---------------------------------------------------------------------------

enum class ViscosityClass { Low, ModerateLow, Moderate, ModerateHigh, High, Invalid };

/// Rank in the total order Low < ModerateLow < ... < High. Invalid has no rank.
int class_rank(ViscosityClass c);

/// Canonical phrase for a class ("low", "moderate to high", ...). The
/// viscosity parser maps these phrases back to the class.
std::string class_phrase(ViscosityClass c);

struct ClassThresholds {
    double low_below = 5.0;
    double moderate_low_below = 50.0;
    double moderate_below = 200.0;
    double moderate_high_below = 2000.0;
};

/// Map a numeric viscosity (mPa·s) onto the qualitative scale. Values equal
/// to a threshold land in the higher class. Throws NonPositiveViscosity.
ViscosityClass viscosity_class_of(double viscosity_mpas,
                                  const ClassThresholds& thresholds = {});

// ---------------------------------------------------------------------------
// Torque signals
// ---------------------------------------------------------------------------

enum class SignalStage { Raw, Filtered, Standardized };

std::string to_string(SignalStage s);
SignalStage signal_stage_from_string(const std::string& s);

struct SignalMeta {
    int liquid_id = -1;  // -1 when the signal is synthetic without a liquid
    std::optional<FillLevel> fill;
    std::uint64_t seed = 0;
    SignalStage stage = SignalStage::Raw;
};

/// Uniformly sampled torque time series. Raw samples are N·m; after
/// standardization they are dimensionless.
struct TorqueSignal {
    std::vector<double> samples;
    double sample_rate_hz = 100.0;
    double duration_s = 10.0;
    SignalMeta meta;
};

double mean(const std::vector<double>& xs);
/// Population (not sample) standard deviation.
double population_std(const std::vector<double>& xs);

/// Check the TorqueSignal invariants (sample count, standardized moments).
/// Throws Error with a description of the first violation.
void validate_signal(const TorqueSignal& signal);

// ---------------------------------------------------------------------------
// Actions, observations, episode context
// ---------------------------------------------------------------------------

struct Action {
    enum class Kind { ShakeContainer, LookScene, LookContainer, Finish };
    Kind kind = Kind::LookScene;
    /// Container index for ShakeContainer/LookContainer, answer for Finish.
    int target = -1;

    static Action shake(int index) { return {Kind::ShakeContainer, index}; }
    static Action look_scene() { return {Kind::LookScene, -1}; }
    static Action look_container(int index) { return {Kind::LookContainer, index}; }
    static Action finish(int index) { return {Kind::Finish, index}; }

    bool operator==(const Action&) const = default;
};

/// Canonical textual form: "Shake[3]", "Look[Scene]", "Look[Container 3]",
/// "Finish[8]".
std::string to_string(const Action& a);

enum class Transparency { Transparent, Translucent, Opaque };

std::string to_string(Transparency t);
Transparency transparency_from_string(const std::string& s);

/// Structured visual attributes of one detected container.
struct VisualDescriptor {
    int index = 0;
    std::string color;
    Transparency transparency = Transparency::Opaque;
    std::string shape;
    std::string material;
    std::optional<std::string> label_text;

    bool operator==(const VisualDescriptor&) const = default;
};

/// Textualized perceived properties o_t plus the action that produced them.
struct Observation {
    std::string text;
    Action source_action;
    std::optional<ViscosityClass> viscosity;        // parsed from haptic feedback
    std::optional<VisualDescriptor> descriptor;     // parsed from visual feedback

    bool operator==(const Observation&) const = default;
};

/// Append-only interaction history: (predicted, action, observation) per step.
class EpisodeContext {
public:
    struct Step {
        std::string predicted;
        Action action;
        Observation observation;
    };

    void append(std::string predicted, Action action, Observation observation);
    const std::vector<Step>& steps() const { return steps_; }
    std::size_t size() const { return steps_.size(); }
    bool empty() const { return steps_.empty(); }

    /// Numbered Thought/Action/Observation lines for prompt embedding.
    std::string serialize() const;

    bool operator==(const EpisodeContext& other) const;

private:
    std::vector<Step> steps_;
};

// ---------------------------------------------------------------------------
// Data directory
// ---------------------------------------------------------------------------

/// Directory with the bundled registry, fixtures, prompt templates and replay
/// scripts. `LIQUIDSENSE_DATA_DIR` in the environment overrides the
/// compiled-in default.
std::filesystem::path default_data_dir();

}  // namespace liquidsense
