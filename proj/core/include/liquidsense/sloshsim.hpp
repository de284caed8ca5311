#pragma once

#include <cstdint>

#include "liquidsense/core.hpp"

namespace liquidsense {

/// Parameters of the damped-oscillator stand-in for a shaken container.
struct SloshParams {
    double damping_ratio = 0.1;          // zeta, in (0, 1)
    double natural_frequency_rad_s = 6.28;  // omega_n, > 0
    double amplitude_nm = 1.0;           // A, > 0
    double phase_rad = 0.0;
    double noise_sigma_nm = 0.0;         // std of additive white noise
    double drift_amplitude_nm = 0.0;     // amplitude of the slow bias sinusoid
    double drift_frequency_hz = 0.1;
};

/// How registry entries map onto oscillator parameters.
struct SimConfig {
    double zeta_min = 0.02;
    double zeta_k = 0.08;      // zeta = clamp(zeta_min + k*log10(1 + viscosity), ...)
    double zeta_max = 0.95;
    double c_fill_one_third = 1.1;
    double c_fill_half = 1.0;
    double c_fill_two_thirds = 0.9;
    double gravity = 9.81;
    double amplitude_nm = 1.0;
    double phase_rad = 0.0;
    double noise_sigma_ratio = 0.05;   // noise_sigma = ratio * amplitude
    double drift_amplitude_ratio = 0.0;
    double drift_frequency_hz = 0.1;
};

double fill_factor(FillLevel fill, const SimConfig& config);

/// Deterministic map from a liquid + fill level to oscillator parameters.
SloshParams params_from(const LiquidSpec& liquid, FillLevel fill,
                        const SimConfig& config = {});

/// Synthesize a raw torque signal:
///   x_i = A exp(-zeta*omega_n*t_i) cos(omega_d*t_i + phi) + noise_i + drift_i
/// with omega_d = omega_n*sqrt(1 - zeta^2) and t_i = i / sample_rate.
/// Identical arguments give bit-identical output.
TorqueSignal simulate_shake(const SloshParams& params, double duration_s,
                            double sample_rate_hz, std::uint64_t seed);

/// Analytic log decrement of a noise-free damped sinusoid with this zeta.
double analytic_log_decrement(double damping_ratio);

}  // namespace liquidsense
