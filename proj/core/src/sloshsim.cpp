#include "liquidsense/sloshsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace liquidsense {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Uniform double in [0, 1) from the top 53 bits of the generator output.
/// std::uniform_real_distribution is not pinned by the standard, this is.
double canonical(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Box-Muller standard normal. Fully determined by the generator stream.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : gen_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = canonical(gen_);
        while (u1 <= 0.0) u1 = canonical(gen_);
        const double u2 = canonical(gen_);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * kPi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace

double fill_factor(FillLevel fill, const SimConfig& config) {
    switch (fill) {
        case FillLevel::OneThird: return config.c_fill_one_third;
        case FillLevel::Half: return config.c_fill_half;
        case FillLevel::TwoThirds: return config.c_fill_two_thirds;
    }
    return config.c_fill_two_thirds;
}

SloshParams params_from(const LiquidSpec& liquid, FillLevel fill, const SimConfig& config) {
    SloshParams p;
    const double zeta = config.zeta_min + config.zeta_k * std::log10(1.0 + liquid.viscosity_mpas);
    p.damping_ratio = std::clamp(zeta, config.zeta_min, config.zeta_max);
    p.natural_frequency_rad_s =
        fill_factor(fill, config) *
        std::sqrt(config.gravity / liquid.container.effective_length_m);
    p.amplitude_nm = config.amplitude_nm;
    p.phase_rad = config.phase_rad;
    p.noise_sigma_nm = config.noise_sigma_ratio * config.amplitude_nm;
    p.drift_amplitude_nm = config.drift_amplitude_ratio * config.amplitude_nm;
    p.drift_frequency_hz = config.drift_frequency_hz;
    return p;
}

TorqueSignal simulate_shake(const SloshParams& params, double duration_s,
                            double sample_rate_hz, std::uint64_t seed) {
    if (!(duration_s > 0.0)) throw Error("duration must be > 0");
    if (!(sample_rate_hz > 0.0)) throw Error("sample rate must be > 0");
    if (!(params.damping_ratio > 0.0 && params.damping_ratio < 1.0))
        throw Error("damping ratio must lie in (0, 1)");
    if (!(params.natural_frequency_rad_s > 0.0)) throw Error("natural frequency must be > 0");
    if (!(params.amplitude_nm > 0.0)) throw Error("amplitude must be > 0");

    const auto n = static_cast<std::size_t>(std::llround(sample_rate_hz * duration_s));
    const double zeta = params.damping_ratio;
    const double omega_n = params.natural_frequency_rad_s;
    const double omega_d = omega_n * std::sqrt(1.0 - zeta * zeta);

    GaussianSource noise(seed);

    TorqueSignal signal;
    signal.samples.resize(n);
    signal.sample_rate_hz = sample_rate_hz;
    signal.duration_s = duration_s;
    signal.meta.seed = seed;
    signal.meta.stage = SignalStage::Raw;

    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate_hz;
        double x = params.amplitude_nm * std::exp(-zeta * omega_n * t) *
                   std::cos(omega_d * t + params.phase_rad);
        if (params.noise_sigma_nm > 0.0) x += params.noise_sigma_nm * noise.next();
        if (params.drift_amplitude_nm > 0.0)
            x += params.drift_amplitude_nm * std::sin(2.0 * kPi * params.drift_frequency_hz * t);
        signal.samples[i] = x;
    }
    return signal;
}

double analytic_log_decrement(double damping_ratio) {
    return 2.0 * kPi * damping_ratio / std::sqrt(1.0 - damping_ratio * damping_ratio);
}

}  // namespace liquidsense
