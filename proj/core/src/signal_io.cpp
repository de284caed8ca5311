#include "liquidsense/signal_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace liquidsense {

using nlohmann::json;

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension();
    p += ".meta.json";
    return p;
}

void write_signal_csv(const TorqueSignal& signal, const std::filesystem::path& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw IoError("cannot write signal file: " + csv_path.string());
    out << "time_s,torque\n";
    char line[80];
    for (std::size_t i = 0; i < signal.samples.size(); ++i) {
        const double t = static_cast<double>(i) / signal.sample_rate_hz;
        std::snprintf(line, sizeof(line), "%.9g,%.17g\n", t, signal.samples[i]);
        out << line;
    }
    out.close();

    json meta;
    meta["liquid_id"] = signal.meta.liquid_id >= 0 ? json(signal.meta.liquid_id) : json(nullptr);
    meta["fill_level"] = signal.meta.fill ? json(to_string(*signal.meta.fill)) : json(nullptr);
    meta["seed"] = signal.meta.seed;
    meta["sample_rate_hz"] = signal.sample_rate_hz;
    meta["stage"] = to_string(signal.meta.stage);
    std::ofstream mout(sidecar_path(csv_path));
    if (!mout) throw IoError("cannot write sidecar: " + sidecar_path(csv_path).string());
    mout << meta.dump(2) << "\n";
}

TorqueSignal read_signal_csv(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open signal file: " + csv_path.string());

    TorqueSignal signal;
    std::string line;
    if (!std::getline(in, line) || line.rfind("time_s,torque", 0) != 0)
        throw IoError("signal file missing 'time_s,torque' header: " + csv_path.string());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw IoError("malformed CSV row: " + line);
        signal.samples.push_back(std::stod(line.substr(comma + 1)));
    }

    const auto meta_file = sidecar_path(csv_path);
    std::ifstream min(meta_file);
    if (!min) throw IoError("missing sidecar: " + meta_file.string());
    json meta;
    try {
        min >> meta;
        signal.meta.liquid_id = meta.at("liquid_id").is_null() ? -1 : meta.at("liquid_id").get<int>();
        if (!meta.at("fill_level").is_null())
            signal.meta.fill = fill_level_from_string(meta.at("fill_level").get<std::string>());
        signal.meta.seed = meta.at("seed").get<std::uint64_t>();
        signal.sample_rate_hz = meta.at("sample_rate_hz").get<double>();
        signal.meta.stage = signal_stage_from_string(meta.at("stage").get<std::string>());
    } catch (const json::exception& e) {
        throw IoError("malformed sidecar " + meta_file.string() + ": " + e.what());
    }
    signal.duration_s = static_cast<double>(signal.samples.size()) / signal.sample_rate_hz;
    return signal;
}

}  // namespace liquidsense
