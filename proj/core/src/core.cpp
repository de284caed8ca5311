#include "liquidsense/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace liquidsense {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Enum <-> string
// ---------------------------------------------------------------------------

std::string to_string(ContainerShape s) {
    switch (s) {
        case ContainerShape::Bottle: return "bottle";
        case ContainerShape::Carton: return "carton";
        case ContainerShape::Jar: return "jar";
        case ContainerShape::Can: return "can";
    }
    return "bottle";
}

std::string to_string(ContainerMaterial m) {
    switch (m) {
        case ContainerMaterial::Plastic: return "plastic";
        case ContainerMaterial::Glass: return "glass";
        case ContainerMaterial::Paper: return "paper";
        case ContainerMaterial::Metal: return "metal";
    }
    return "plastic";
}

std::string to_string(FillLevel f) {
    switch (f) {
        case FillLevel::OneThird: return "one-third";
        case FillLevel::Half: return "half";
        case FillLevel::TwoThirds: return "two-thirds";
    }
    return "two-thirds";
}

ContainerShape container_shape_from_string(const std::string& s) {
    const std::string v = lower(s);
    if (v == "bottle") return ContainerShape::Bottle;
    if (v == "carton") return ContainerShape::Carton;
    if (v == "jar") return ContainerShape::Jar;
    if (v == "can") return ContainerShape::Can;
    throw MalformedRegistry("unknown container shape: " + s);
}

ContainerMaterial container_material_from_string(const std::string& s) {
    const std::string v = lower(s);
    if (v == "plastic") return ContainerMaterial::Plastic;
    if (v == "glass") return ContainerMaterial::Glass;
    if (v == "paper") return ContainerMaterial::Paper;
    if (v == "metal") return ContainerMaterial::Metal;
    throw MalformedRegistry("unknown container material: " + s);
}

FillLevel fill_level_from_string(const std::string& s) {
    const std::string v = lower(s);
    if (v == "one-third" || v == "one_third" || v == "1/3") return FillLevel::OneThird;
    if (v == "half" || v == "1/2") return FillLevel::Half;
    if (v == "two-thirds" || v == "two_thirds" || v == "2/3") return FillLevel::TwoThirds;
    throw Error("unknown fill level: " + s);
}

std::string to_string(SignalStage s) {
    switch (s) {
        case SignalStage::Raw: return "raw";
        case SignalStage::Filtered: return "filtered";
        case SignalStage::Standardized: return "standardized";
    }
    return "raw";
}

SignalStage signal_stage_from_string(const std::string& s) {
    const std::string v = lower(s);
    if (v == "raw") return SignalStage::Raw;
    if (v == "filtered") return SignalStage::Filtered;
    if (v == "standardized") return SignalStage::Standardized;
    throw Error("unknown signal stage: " + s);
}

std::string to_string(Transparency t) {
    switch (t) {
        case Transparency::Transparent: return "transparent";
        case Transparency::Translucent: return "translucent";
        case Transparency::Opaque: return "opaque";
    }
    return "opaque";
}

Transparency transparency_from_string(const std::string& s) {
    const std::string v = lower(s);
    if (v == "transparent") return Transparency::Transparent;
    if (v == "translucent") return Transparency::Translucent;
    if (v == "opaque") return Transparency::Opaque;
    throw Error("unknown transparency: " + s);
}

// ---------------------------------------------------------------------------
// Registry I/O
// ---------------------------------------------------------------------------

void validate_registry(const Registry& registry) {
    if (registry.empty()) throw MalformedRegistry("registry is empty");
    std::vector<bool> seen(registry.size(), false);
    for (const auto& liquid : registry) {
        if (liquid.id < 0 || static_cast<std::size_t>(liquid.id) >= registry.size())
            throw MalformedRegistry("liquid id " + std::to_string(liquid.id) +
                                    " outside contiguous range 0.." +
                                    std::to_string(registry.size() - 1));
        if (seen[static_cast<std::size_t>(liquid.id)])
            throw MalformedRegistry("duplicate liquid id " + std::to_string(liquid.id));
        seen[static_cast<std::size_t>(liquid.id)] = true;
        if (!(liquid.viscosity_mpas > 0.0))
            throw MalformedRegistry("non-positive viscosity for liquid '" + liquid.name + "'");
        if (liquid.name.empty())
            throw MalformedRegistry("liquid id " + std::to_string(liquid.id) + " has no name");
        const double len = liquid.container.effective_length_m;
        if (!(len > 0.05 && len < 0.5))
            throw MalformedRegistry("container length " + std::to_string(len) +
                                    " m out of range (0.05, 0.5) for '" + liquid.name + "'");
    }
}

Registry load_registry(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedRegistry("cannot open registry file: " + path.string());

    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw MalformedRegistry("registry parse failure: " + std::string(e.what()));
    }
    if (!root.is_array()) throw MalformedRegistry("registry root must be a JSON array");

    Registry registry;
    registry.reserve(root.size());
    try {
        for (const auto& item : root) {
            LiquidSpec liquid;
            liquid.id = item.at("id").get<int>();
            liquid.name = item.at("name").get<std::string>();
            liquid.viscosity_mpas = item.at("viscosity_mpas").get<double>();
            liquid.color = item.at("color").get<std::string>();
            const auto& c = item.at("container");
            liquid.container.shape = container_shape_from_string(c.at("shape").get<std::string>());
            liquid.container.material =
                container_material_from_string(c.at("material").get<std::string>());
            liquid.container.opaque = c.at("opaque").get<bool>();
            liquid.container.effective_length_m = c.at("length_m").get<double>();
            if (item.contains("label_text") && !item.at("label_text").is_null())
                liquid.label_text = item.at("label_text").get<std::string>();
            registry.push_back(std::move(liquid));
        }
    } catch (const json::exception& e) {
        throw MalformedRegistry("registry schema error: " + std::string(e.what()));
    }

    // Present entries sorted by id so indexing matches ids.
    std::sort(registry.begin(), registry.end(),
              [](const LiquidSpec& a, const LiquidSpec& b) { return a.id < b.id; });
    validate_registry(registry);
    return registry;
}

void save_registry(const Registry& registry, const std::filesystem::path& path) {
    json root = json::array();
    for (const auto& liquid : registry) {
        json item;
        item["id"] = liquid.id;
        item["name"] = liquid.name;
        item["viscosity_mpas"] = liquid.viscosity_mpas;
        item["color"] = liquid.color;
        item["container"] = {
            {"shape", to_string(liquid.container.shape)},
            {"material", to_string(liquid.container.material)},
            {"opaque", liquid.container.opaque},
            {"length_m", liquid.container.effective_length_m},
        };
        if (liquid.label_text)
            item["label_text"] = *liquid.label_text;
        else
            item["label_text"] = nullptr;
        root.push_back(std::move(item));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write registry file: " + path.string());
    out << root.dump(2) << "\n";
}

const LiquidSpec& liquid_by_id(const Registry& registry, int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= registry.size())
        throw UnknownIndex("liquid id " + std::to_string(id) + " not in registry");
    return registry[static_cast<std::size_t>(id)];
}

const LiquidSpec* liquid_by_name(const Registry& registry, const std::string& name) {
    const std::string needle = lower(name);
    for (const auto& liquid : registry)
        if (lower(liquid.name) == needle) return &liquid;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Viscosity classes
// ---------------------------------------------------------------------------

int class_rank(ViscosityClass c) {
    switch (c) {
        case ViscosityClass::Low: return 0;
        case ViscosityClass::ModerateLow: return 1;
        case ViscosityClass::Moderate: return 2;
        case ViscosityClass::ModerateHigh: return 3;
        case ViscosityClass::High: return 4;
        case ViscosityClass::Invalid: break;
    }
    return -1;
}

std::string class_phrase(ViscosityClass c) {
    switch (c) {
        case ViscosityClass::Low: return "low";
        case ViscosityClass::ModerateLow: return "low to moderate";
        case ViscosityClass::Moderate: return "moderate";
        case ViscosityClass::ModerateHigh: return "moderate to high";
        case ViscosityClass::High: return "high";
        case ViscosityClass::Invalid: break;
    }
    return "invalid";
}

ViscosityClass viscosity_class_of(double viscosity_mpas, const ClassThresholds& t) {
    if (!(viscosity_mpas > 0.0))
        throw NonPositiveViscosity("viscosity must be > 0, got " +
                                   std::to_string(viscosity_mpas));
    // Ties round up: a value equal to a threshold takes the higher class.
    if (viscosity_mpas < t.low_below) return ViscosityClass::Low;
    if (viscosity_mpas < t.moderate_low_below) return ViscosityClass::ModerateLow;
    if (viscosity_mpas < t.moderate_below) return ViscosityClass::Moderate;
    if (viscosity_mpas < t.moderate_high_below) return ViscosityClass::ModerateHigh;
    return ViscosityClass::High;
}

// ---------------------------------------------------------------------------
// Signals
// ---------------------------------------------------------------------------

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

double population_std(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

void validate_signal(const TorqueSignal& signal) {
    if (!(signal.sample_rate_hz > 0.0)) throw Error("sample rate must be > 0");
    if (!(signal.duration_s > 0.0)) throw Error("duration must be > 0");
    const auto expected =
        static_cast<std::size_t>(std::llround(signal.sample_rate_hz * signal.duration_s));
    if (signal.samples.size() != expected)
        throw Error("sample count " + std::to_string(signal.samples.size()) +
                    " != round(rate*duration) = " + std::to_string(expected));
    if (signal.meta.stage == SignalStage::Standardized) {
        if (std::abs(mean(signal.samples)) >= 1e-9)
            throw Error("standardized signal mean exceeds 1e-9");
        if (std::abs(population_std(signal.samples) - 1.0) >= 1e-9)
            throw Error("standardized signal std deviates from 1 by >= 1e-9");
    }
}

// ---------------------------------------------------------------------------
// Actions and context
// ---------------------------------------------------------------------------

std::string to_string(const Action& a) {
    switch (a.kind) {
        case Action::Kind::ShakeContainer:
            return "Shake[" + std::to_string(a.target) + "]";
        case Action::Kind::LookScene:
            return "Look[Scene]";
        case Action::Kind::LookContainer:
            return "Look[Container " + std::to_string(a.target) + "]";
        case Action::Kind::Finish:
            return "Finish[" + std::to_string(a.target) + "]";
    }
    return "Look[Scene]";
}

void EpisodeContext::append(std::string predicted, Action action, Observation observation) {
    steps_.push_back(Step{std::move(predicted), action, std::move(observation)});
}

std::string EpisodeContext::serialize() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        const auto& step = steps_[i];
        const auto n = std::to_string(i + 1);
        out << "Thought " << n << ": " << step.predicted << "\n";
        out << "Action " << n << ": " << to_string(step.action) << "\n";
        out << "Observation " << n << ": " << step.observation.text << "\n";
    }
    return out.str();
}

bool EpisodeContext::operator==(const EpisodeContext& other) const {
    if (steps_.size() != other.steps_.size()) return false;
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        const auto& a = steps_[i];
        const auto& b = other.steps_[i];
        if (a.predicted != b.predicted || !(a.action == b.action) ||
            !(a.observation == b.observation))
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Data directory
// ---------------------------------------------------------------------------

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("LIQUIDSENSE_DATA_DIR"); env && *env)
        return std::filesystem::path(env);
#ifdef LIQUIDSENSE_DATA_DIR
    return std::filesystem::path(LIQUIDSENSE_DATA_DIR);
#else
    return std::filesystem::current_path() / "data";
#endif
}

}  // namespace liquidsense
