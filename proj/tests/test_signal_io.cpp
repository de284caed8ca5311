#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "liquidsense/dsp.hpp"
#include "liquidsense/signal_io.hpp"
#include "liquidsense/sloshsim.hpp"

using namespace liquidsense;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "liquidsense_signal_io";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("sidecar path replaces the extension") {
    CHECK(sidecar_path("out/s.csv") == std::filesystem::path("out/s.meta.json"));
    CHECK(sidecar_path("s") == std::filesystem::path("s.meta.json"));
}

TEST_CASE("signal csv round-trips samples and metadata") {
    SloshParams params;
    params.damping_ratio = 0.1;
    params.natural_frequency_rad_s = 6.0;
    params.noise_sigma_nm = 0.05;
    TorqueSignal signal = simulate_shake(params, 10.0, 100.0, 99);
    signal.meta.liquid_id = 4;
    signal.meta.fill = FillLevel::OneThird;

    const auto path = temp_dir() / "roundtrip.csv";
    write_signal_csv(signal, path);
    REQUIRE(std::filesystem::exists(sidecar_path(path)));

    const TorqueSignal loaded = read_signal_csv(path);
    REQUIRE(loaded.samples.size() == signal.samples.size());
    for (std::size_t i = 0; i < signal.samples.size(); ++i)
        CHECK(loaded.samples[i] == signal.samples[i]);  // %.17g preserves doubles exactly
    CHECK(loaded.sample_rate_hz == signal.sample_rate_hz);
    CHECK(loaded.duration_s == doctest::Approx(signal.duration_s));
    CHECK(loaded.meta.liquid_id == 4);
    CHECK(loaded.meta.fill == FillLevel::OneThird);
    CHECK(loaded.meta.seed == 99);
    CHECK(loaded.meta.stage == SignalStage::Raw);
}

TEST_CASE("stage transitions rewrite the sidecar") {
    SloshParams params;
    params.damping_ratio = 0.2;
    params.natural_frequency_rad_s = 6.0;
    TorqueSignal raw = simulate_shake(params, 10.0, 100.0, 7);

    const auto path = temp_dir() / "staged.csv";
    write_signal_csv(raw, path);
    CHECK(read_signal_csv(path).meta.stage == SignalStage::Raw);

    const TorqueSignal standardized = standardize(lowpass(raw));
    write_signal_csv(standardized, path);
    CHECK(read_signal_csv(path).meta.stage == SignalStage::Standardized);
}

TEST_CASE("missing files and malformed headers raise IoError") {
    CHECK_THROWS_AS(read_signal_csv(temp_dir() / "absent.csv"), IoError);

    const auto path = temp_dir() / "badheader.csv";
    std::ofstream(path) << "wrong,header\n1,2\n";
    CHECK_THROWS_AS(read_signal_csv(path), IoError);
}
