#pragma once

#include <filesystem>

#include "liquidsense/core.hpp"

namespace liquidsense {

/// Sidecar path for a signal CSV: the extension is replaced by ".meta.json"
/// ("s.csv" -> "s.meta.json").
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Write `time_s,torque` CSV plus the metadata sidecar
/// {liquid_id, fill_level, seed, sample_rate_hz, stage}.
void write_signal_csv(const TorqueSignal& signal, const std::filesystem::path& csv_path);

/// Read a signal CSV and its sidecar back. Throws IoError on missing files
/// or malformed content.
TorqueSignal read_signal_csv(const std::filesystem::path& csv_path);

}  // namespace liquidsense
