#pragma once

#include <span>
#include <vector>

#include "liquidsense/core.hpp"

namespace liquidsense {

struct DspConfig {
    double cutoff_hz = 2.0;
    int order = 5;
    double min_prominence = 0.1;  // standardized units
};

/// One second-order section in direct form II transposed. b2/a2 are zero for
/// a first-order section.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

/// Digital Butterworth low-pass designed by bilinear transform with
/// frequency prewarping, factored into second-order sections.
class ButterworthLowpass {
public:
    /// Throws CutoffAboveNyquist unless sample_rate > 2 * cutoff.
    static ButterworthLowpass design(int order, double cutoff_hz, double sample_rate_hz);

    const std::vector<Biquad>& sections() const { return sections_; }
    int order() const { return order_; }

    /// Single-pass magnitude response |H(e^{j 2 pi f / fs})|.
    double magnitude_at(double freq_hz) const;

    /// Single forward pass with steady-state initial conditions scaled to
    /// the first input sample.
    std::vector<double> filter(std::span<const double> input) const;

    /// Zero-phase forward-backward pass with odd-reflection padding of one
    /// warm-up length at each end. Output length equals input length.
    std::vector<double> filtfilt(std::span<const double> input) const;

    /// Samples of odd-reflection padding applied by filtfilt.
    std::size_t pad_length() const;

private:
    std::vector<Biquad> sections_;
    int order_ = 0;
    double sample_rate_hz_ = 0.0;
};

/// Apply the configured low-pass (default: 5th-order Butterworth at 2 Hz)
/// forward-backward. Requires stage Raw; yields stage Filtered.
TorqueSignal lowpass(const TorqueSignal& raw, const DspConfig& config = {});

/// Shift/scale to zero mean and unit population variance. Requires stage
/// Filtered (or Standardized, where it is an identity up to roundoff).
/// Throws DegenerateSignal when the population std is below 1e-12.
TorqueSignal standardize(const TorqueSignal& filtered);

struct Peak {
    double time_s = 0.0;
    double amplitude = 0.0;  // magnitude of the extremum value, > 0
    int sign = +1;           // +1 local maximum, -1 local minimum
};

struct PeakList {
    std::vector<Peak> peaks;  // ordered by time
};

/// Local extrema with topographic prominence >= min_prominence. Requires
/// stage Standardized. May return an empty list.
PeakList find_peaks(const TorqueSignal& standardized, double min_prominence);

/// Mean of ln(amp_i / amp_{i+1}) over consecutive same-sign peak pairs.
/// Pairs where the amplitude does not decrease (noise inversions) are
/// skipped. Throws InsufficientPeaks when fewer than two consecutive
/// same-sign pairs exist, or when every pair was skipped.
double log_decrement(const PeakList& peaks);

}  // namespace liquidsense
