#include "liquidsense/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace liquidsense {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::string unquote(const std::string& value, int line_no) {
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
        return value.substr(1, value.size() - 2);
    // Bare scalars: numbers and booleans are stored verbatim.
    if (value.empty())
        throw MalformedConfig("empty value on line " + std::to_string(line_no));
    return value;
}

std::vector<std::string> parse_array(const std::string& value, int line_no) {
    if (value.size() < 2 || value.front() != '[' || value.back() != ']')
        throw MalformedConfig("malformed array on line " + std::to_string(line_no));
    std::vector<std::string> items;
    std::string item;
    std::istringstream in(value.substr(1, value.size() - 2));
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        items.push_back(unquote(item, line_no));
    }
    return items;
}

double to_double(const std::string& value, const std::string& key) {
    try {
        std::size_t consumed = 0;
        const double v = std::stod(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw MalformedConfig("key '" + key + "' is not a number: " + value);
    }
}

}  // namespace

ConfigDoc ConfigDoc::parse_string(const std::string& text) {
    ConfigDoc doc;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw MalformedConfig("unterminated section header on line " +
                                      std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw MalformedConfig("empty section name on line " + std::to_string(line_no));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw MalformedConfig("expected 'key = value' on line " + std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw MalformedConfig("empty key on line " + std::to_string(line_no));
        const std::string full_key = section.empty() ? key : section + "." + key;
        if (!value.empty() && value.front() == '[')
            doc.arrays_[full_key] = parse_array(value, line_no);
        else
            doc.scalars_[full_key] = unquote(value, line_no);
    }
    return doc;
}

ConfigDoc ConfigDoc::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedConfig("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

bool ConfigDoc::has(const std::string& key) const {
    return scalars_.count(key) > 0 || arrays_.count(key) > 0;
}

std::string ConfigDoc::get_string(const std::string& key, std::string fallback) const {
    const auto it = scalars_.find(key);
    return it == scalars_.end() ? fallback : it->second;
}

double ConfigDoc::get_double(const std::string& key, double fallback) const {
    const auto it = scalars_.find(key);
    return it == scalars_.end() ? fallback : to_double(it->second, key);
}

int ConfigDoc::get_int(const std::string& key, int fallback) const {
    return static_cast<int>(get_double(key, fallback));
}

bool ConfigDoc::get_bool(const std::string& key, bool fallback) const {
    const auto it = scalars_.find(key);
    if (it == scalars_.end()) return fallback;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw MalformedConfig("key '" + key + "' is not a boolean: " + it->second);
}

std::vector<double> ConfigDoc::get_double_array(const std::string& key,
                                                std::vector<double> fallback) const {
    const auto it = arrays_.find(key);
    if (it == arrays_.end()) return fallback;
    std::vector<double> out;
    out.reserve(it->second.size());
    for (const auto& item : it->second) out.push_back(to_double(item, key));
    return out;
}

std::vector<std::string> ConfigDoc::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : scalars_) out.push_back(k);
    for (const auto& [k, v] : arrays_) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

RunConfig default_run_config() {
    RunConfig config;
    const auto data = default_data_dir();
    config.registry_path = data / "registry.json";
    config.fixtures_dir = data / "fixtures";
    config.prompts_dir = data / "prompts";
    return config;
}

void apply_config(RunConfig& c, const ConfigDoc& doc) {
    static const std::set<std::string> known = {
        "paths.registry", "paths.fixtures", "paths.prompts", "paths.output",
        "backend.kind", "backend.lvlm_endpoint", "backend.lvlm_model",
        "backend.lvlm_timeout_s", "backend.lvlm_max_retries", "backend.replay_script",
        "sim.zeta_min", "sim.zeta_k", "sim.zeta_max", "sim.c_fill_one_third",
        "sim.c_fill_half", "sim.c_fill_two_thirds", "sim.gravity", "sim.amplitude",
        "sim.phase", "sim.noise_sigma_ratio", "sim.drift_amplitude_ratio",
        "sim.drift_frequency_hz",
        "dsp.cutoff_hz", "dsp.order", "dsp.min_prominence",
        "class_thresholds.low_below", "class_thresholds.moderate_low_below",
        "class_thresholds.moderate_below", "class_thresholds.moderate_high_below",
        "delta_thresholds.low_below", "delta_thresholds.moderate_low_below",
        "delta_thresholds.moderate_below", "delta_thresholds.moderate_high_below",
        "agent.max_steps", "agent.actions", "agent.mode", "agent.fill", "agent.setting",
        "eval.trials", "eval.fills", "eval.seed_base", "eval.seed_stride", "eval.bin_edges",
        "eval.workers",
        "plot.width", "plot.height", "plot.format", "plot.stroke_width", "plot.grid",
    };
    for (const auto& key : doc.keys())
        if (!known.count(key)) throw MalformedConfig("unknown config key: " + key);

    c.registry_path = doc.get_string("paths.registry", c.registry_path.string());
    c.fixtures_dir = doc.get_string("paths.fixtures", c.fixtures_dir.string());
    c.prompts_dir = doc.get_string("paths.prompts", c.prompts_dir.string());
    c.output_dir = doc.get_string("paths.output", c.output_dir.string());

    c.backend = backend_kind_from_string(doc.get_string("backend.kind", to_string(c.backend)));
    c.lvlm.endpoint = doc.get_string("backend.lvlm_endpoint", c.lvlm.endpoint);
    c.lvlm.model = doc.get_string("backend.lvlm_model", c.lvlm.model);
    c.lvlm.timeout_s = doc.get_int("backend.lvlm_timeout_s", c.lvlm.timeout_s);
    c.lvlm.max_retries = doc.get_int("backend.lvlm_max_retries", c.lvlm.max_retries);
    c.replay_script = doc.get_string("backend.replay_script", c.replay_script.string());

    c.sim.zeta_min = doc.get_double("sim.zeta_min", c.sim.zeta_min);
    c.sim.zeta_k = doc.get_double("sim.zeta_k", c.sim.zeta_k);
    c.sim.zeta_max = doc.get_double("sim.zeta_max", c.sim.zeta_max);
    c.sim.c_fill_one_third = doc.get_double("sim.c_fill_one_third", c.sim.c_fill_one_third);
    c.sim.c_fill_half = doc.get_double("sim.c_fill_half", c.sim.c_fill_half);
    c.sim.c_fill_two_thirds = doc.get_double("sim.c_fill_two_thirds", c.sim.c_fill_two_thirds);
    c.sim.gravity = doc.get_double("sim.gravity", c.sim.gravity);
    c.sim.amplitude_nm = doc.get_double("sim.amplitude", c.sim.amplitude_nm);
    c.sim.phase_rad = doc.get_double("sim.phase", c.sim.phase_rad);
    c.sim.noise_sigma_ratio = doc.get_double("sim.noise_sigma_ratio", c.sim.noise_sigma_ratio);
    c.sim.drift_amplitude_ratio =
        doc.get_double("sim.drift_amplitude_ratio", c.sim.drift_amplitude_ratio);
    c.sim.drift_frequency_hz = doc.get_double("sim.drift_frequency_hz", c.sim.drift_frequency_hz);

    c.dsp.cutoff_hz = doc.get_double("dsp.cutoff_hz", c.dsp.cutoff_hz);
    c.dsp.order = doc.get_int("dsp.order", c.dsp.order);
    c.dsp.min_prominence = doc.get_double("dsp.min_prominence", c.dsp.min_prominence);

    c.class_thresholds.low_below =
        doc.get_double("class_thresholds.low_below", c.class_thresholds.low_below);
    c.class_thresholds.moderate_low_below = doc.get_double(
        "class_thresholds.moderate_low_below", c.class_thresholds.moderate_low_below);
    c.class_thresholds.moderate_below =
        doc.get_double("class_thresholds.moderate_below", c.class_thresholds.moderate_below);
    c.class_thresholds.moderate_high_below = doc.get_double(
        "class_thresholds.moderate_high_below", c.class_thresholds.moderate_high_below);

    c.delta_thresholds.low_below =
        doc.get_double("delta_thresholds.low_below", c.delta_thresholds.low_below);
    c.delta_thresholds.moderate_low_below = doc.get_double(
        "delta_thresholds.moderate_low_below", c.delta_thresholds.moderate_low_below);
    c.delta_thresholds.moderate_below =
        doc.get_double("delta_thresholds.moderate_below", c.delta_thresholds.moderate_below);
    c.delta_thresholds.moderate_high_below = doc.get_double(
        "delta_thresholds.moderate_high_below", c.delta_thresholds.moderate_high_below);

    c.max_steps = doc.get_int("agent.max_steps", c.max_steps);
    if (doc.has("agent.actions"))
        c.mask = ActionMask::from_string(doc.get_string("agent.actions", ""));
    c.mode = env_mode_from_string(doc.get_string("agent.mode", to_string(c.mode)));
    c.episode_fill = fill_level_from_string(doc.get_string("agent.fill", to_string(c.episode_fill)));
    c.setting = scene_setting_from_string(doc.get_string("agent.setting", to_string(c.setting)));

    c.eval.trials = doc.get_int("eval.trials", c.eval.trials);
    if (doc.has("eval.fills")) {
        const std::string fills = doc.get_string("eval.fills", "all");
        c.eval.fills.clear();
        if (fills == "all") {
            c.eval.fills = {FillLevel::OneThird, FillLevel::Half, FillLevel::TwoThirds};
        } else {
            std::istringstream in(fills);
            std::string token;
            while (std::getline(in, token, ','))
                c.eval.fills.push_back(fill_level_from_string(trim(token)));
        }
    }
    c.eval.seed_base = static_cast<std::uint64_t>(
        doc.get_double("eval.seed_base", static_cast<double>(c.eval.seed_base)));
    c.eval.seed_stride = static_cast<std::uint64_t>(
        doc.get_double("eval.seed_stride", static_cast<double>(c.eval.seed_stride)));
    c.eval.bin_edges = doc.get_double_array("eval.bin_edges", c.eval.bin_edges);
    c.eval.workers = doc.get_int("eval.workers", c.eval.workers);

    c.plot.width = doc.get_int("plot.width", c.plot.width);
    c.plot.height = doc.get_int("plot.height", c.plot.height);
    c.plot.format =
        image_format_from_string(doc.get_string("plot.format", to_string(c.plot.format)));
    c.plot.stroke_width = doc.get_double("plot.stroke_width", c.plot.stroke_width);
    c.plot.grid = doc.get_bool("plot.grid", c.plot.grid);
}

RunConfig load_run_config(const std::filesystem::path& path) {
    RunConfig config = default_run_config();
    apply_config(config, ConfigDoc::parse_file(path));
    return config;
}

std::string serialize_run_config(const RunConfig& c) {
    std::ostringstream out;
    const auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return std::string(buf);
    };

    out << "[paths]\n";
    out << "registry = \"" << c.registry_path.string() << "\"\n";
    out << "fixtures = \"" << c.fixtures_dir.string() << "\"\n";
    out << "prompts = \"" << c.prompts_dir.string() << "\"\n";
    out << "output = \"" << c.output_dir.string() << "\"\n\n";

    out << "[backend]\n";
    out << "kind = \"" << to_string(c.backend) << "\"\n";
    out << "lvlm_endpoint = \"" << c.lvlm.endpoint << "\"\n";
    out << "lvlm_model = \"" << c.lvlm.model << "\"\n";
    out << "lvlm_timeout_s = " << c.lvlm.timeout_s << "\n";
    out << "lvlm_max_retries = " << c.lvlm.max_retries << "\n";
    out << "replay_script = \"" << c.replay_script.string() << "\"\n\n";

    out << "[sim]\n";
    out << "zeta_min = " << num(c.sim.zeta_min) << "\n";
    out << "zeta_k = " << num(c.sim.zeta_k) << "\n";
    out << "zeta_max = " << num(c.sim.zeta_max) << "\n";
    out << "c_fill_one_third = " << num(c.sim.c_fill_one_third) << "\n";
    out << "c_fill_half = " << num(c.sim.c_fill_half) << "\n";
    out << "c_fill_two_thirds = " << num(c.sim.c_fill_two_thirds) << "\n";
    out << "gravity = " << num(c.sim.gravity) << "\n";
    out << "amplitude = " << num(c.sim.amplitude_nm) << "\n";
    out << "phase = " << num(c.sim.phase_rad) << "\n";
    out << "noise_sigma_ratio = " << num(c.sim.noise_sigma_ratio) << "\n";
    out << "drift_amplitude_ratio = " << num(c.sim.drift_amplitude_ratio) << "\n";
    out << "drift_frequency_hz = " << num(c.sim.drift_frequency_hz) << "\n\n";

    out << "[dsp]\n";
    out << "cutoff_hz = " << num(c.dsp.cutoff_hz) << "\n";
    out << "order = " << c.dsp.order << "\n";
    out << "min_prominence = " << num(c.dsp.min_prominence) << "\n\n";

    out << "[class_thresholds]\n";
    out << "low_below = " << num(c.class_thresholds.low_below) << "\n";
    out << "moderate_low_below = " << num(c.class_thresholds.moderate_low_below) << "\n";
    out << "moderate_below = " << num(c.class_thresholds.moderate_below) << "\n";
    out << "moderate_high_below = " << num(c.class_thresholds.moderate_high_below) << "\n\n";

    out << "[delta_thresholds]\n";
    out << "low_below = " << num(c.delta_thresholds.low_below) << "\n";
    out << "moderate_low_below = " << num(c.delta_thresholds.moderate_low_below) << "\n";
    out << "moderate_below = " << num(c.delta_thresholds.moderate_below) << "\n";
    out << "moderate_high_below = " << num(c.delta_thresholds.moderate_high_below) << "\n\n";

    out << "[agent]\n";
    out << "max_steps = " << c.max_steps << "\n";
    out << "actions = \"" << c.mask.to_string() << "\"\n";
    out << "mode = \"" << to_string(c.mode) << "\"\n";
    out << "fill = \"" << to_string(c.episode_fill) << "\"\n";
    out << "setting = \"" << to_string(c.setting) << "\"\n\n";

    out << "[eval]\n";
    out << "trials = " << c.eval.trials << "\n";
    out << "fills = \"";
    for (std::size_t i = 0; i < c.eval.fills.size(); ++i) {
        if (i) out << ",";
        out << to_string(c.eval.fills[i]);
    }
    out << "\"\n";
    out << "seed_base = " << c.eval.seed_base << "\n";
    out << "seed_stride = " << c.eval.seed_stride << "\n";
    out << "bin_edges = [";
    for (std::size_t i = 0; i < c.eval.bin_edges.size(); ++i) {
        if (i) out << ", ";
        out << num(c.eval.bin_edges[i]);
    }
    out << "]\n";
    out << "workers = " << c.eval.workers << "\n\n";

    out << "[plot]\n";
    out << "width = " << c.plot.width << "\n";
    out << "height = " << c.plot.height << "\n";
    out << "format = \"" << to_string(c.plot.format) << "\"\n";
    out << "stroke_width = " << num(c.plot.stroke_width) << "\n";
    out << "grid = " << (c.plot.grid ? "true" : "false") << "\n";
    return out.str();
}

void write_config_snapshot(const RunConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config snapshot: " + path.string());
    out << serialize_run_config(config);
}

void validate_run_config(const RunConfig& c) {
    const auto require = [](bool ok, const std::string& what) {
        if (!ok) throw MalformedConfig(what);
    };
    require(std::filesystem::exists(c.registry_path),
            "registry file not found: " + c.registry_path.string());
    require(std::filesystem::is_directory(c.prompts_dir),
            "prompt template directory not found: " + c.prompts_dir.string());
    require(c.sim.zeta_min > 0.0 && c.sim.zeta_min < 1.0, "sim.zeta_min must lie in (0,1)");
    require(c.sim.zeta_max > c.sim.zeta_min && c.sim.zeta_max < 1.0,
            "sim.zeta_max must lie in (zeta_min,1)");
    require(c.sim.zeta_k >= 0.0, "sim.zeta_k must be >= 0");
    require(c.sim.amplitude_nm > 0.0, "sim.amplitude must be > 0");
    require(c.sim.noise_sigma_ratio >= 0.0, "sim.noise_sigma_ratio must be >= 0");
    require(c.sim.drift_amplitude_ratio >= 0.0, "sim.drift_amplitude_ratio must be >= 0");
    require(c.sim.c_fill_one_third > 0.0 && c.sim.c_fill_half > 0.0 &&
                c.sim.c_fill_two_thirds > 0.0,
            "sim.c_fill factors must be > 0");
    require(c.dsp.cutoff_hz > 0.0, "dsp.cutoff_hz must be > 0");
    require(c.dsp.order >= 1, "dsp.order must be >= 1");
    require(c.dsp.min_prominence >= 0.0, "dsp.min_prominence must be >= 0");
    require(c.max_steps >= 1, "agent.max_steps must be >= 1");
    require(c.eval.trials >= 1, "eval.trials must be >= 1");
    require(c.eval.workers >= 1, "eval.workers must be >= 1");
    require(!c.eval.fills.empty(), "eval.fills must not be empty");
    for (std::size_t i = 1; i < c.eval.bin_edges.size(); ++i)
        require(c.eval.bin_edges[i] > c.eval.bin_edges[i - 1],
                "eval.bin_edges must be strictly increasing");
    require(c.plot.width > 0 && c.plot.height > 0, "plot dimensions must be positive");
}

}  // namespace liquidsense
