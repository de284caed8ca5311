#include "liquidsense/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace liquidsense {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Steady-state DF2T state for a unit-step input, so that filtering a
/// constant x0 from state zi*x0 emits x0 from the first sample on.
struct SectionState {
    double z1 = 0.0, z2 = 0.0;
};

SectionState steady_state(const Biquad& s) {
    // DC gain of the section.
    const double g = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    SectionState st;
    st.z2 = s.b2 - s.a2 * g;
    st.z1 = s.b1 - s.a1 * g + st.z2;
    return st;
}

void run_cascade(const std::vector<Biquad>& sections, std::span<const double> input,
                 std::vector<double>& output, bool steady_init) {
    output.assign(input.begin(), input.end());
    for (const auto& s : sections) {
        SectionState st;
        if (steady_init && !output.empty()) {
            const SectionState unit = steady_state(s);
            st.z1 = unit.z1 * output.front();
            st.z2 = unit.z2 * output.front();
        }
        double z1 = st.z1, z2 = st.z2;
        for (double& x : output) {
            const double y = s.b0 * x + z1;
            z1 = s.b1 * x - s.a1 * y + z2;
            z2 = s.b2 * x - s.a2 * y;
            x = y;
        }
    }
}

}  // namespace

ButterworthLowpass ButterworthLowpass::design(int order, double cutoff_hz,
                                              double sample_rate_hz) {
    if (order < 1) throw Error("filter order must be >= 1");
    if (!(cutoff_hz > 0.0)) throw Error("cutoff must be > 0");
    if (!(sample_rate_hz > 2.0 * cutoff_hz))
        throw CutoffAboveNyquist("cutoff " + std::to_string(cutoff_hz) +
                                 " Hz requires sample rate > " +
                                 std::to_string(2.0 * cutoff_hz) + " Hz, got " +
                                 std::to_string(sample_rate_hz));

    ButterworthLowpass f;
    f.order_ = order;
    f.sample_rate_hz_ = sample_rate_hz;

    // Prewarped analog cutoff, with the bilinear constant k = 2*fs.
    const double k = 2.0 * sample_rate_hz;
    const double warped = k * std::tan(kPi * cutoff_hz / sample_rate_hz);

    // Analog prototype poles on the unit circle, scaled by the warped cutoff,
    // then mapped with z = (k + s) / (k - s). All zeros land at z = -1.
    const int pairs = order / 2;
    for (int i = 0; i < pairs; ++i) {
        const double theta = kPi / 2.0 + kPi * (2.0 * i + 1.0) / (2.0 * order);
        const std::complex<double> s_pole =
            warped * std::complex<double>(std::cos(theta), std::sin(theta));
        const std::complex<double> z_pole = (k + s_pole) / (k - s_pole);
        Biquad sec;
        sec.a1 = -2.0 * z_pole.real();
        sec.a2 = std::norm(z_pole);
        // Numerator (1 + z^-1)^2, normalized to unit DC gain.
        const double dc = 4.0 / (1.0 + sec.a1 + sec.a2);
        sec.b0 = 1.0 / dc;
        sec.b1 = 2.0 / dc;
        sec.b2 = 1.0 / dc;
        f.sections_.push_back(sec);
    }
    if (order % 2 == 1) {
        // Real pole at s = -warped.
        const double z_pole = (k - warped) / (k + warped);
        Biquad sec;
        sec.a1 = -z_pole;
        sec.a2 = 0.0;
        const double dc = 2.0 / (1.0 + sec.a1);
        sec.b0 = 1.0 / dc;
        sec.b1 = 1.0 / dc;
        sec.b2 = 0.0;
        f.sections_.push_back(sec);
    }
    return f;
}

double ButterworthLowpass::magnitude_at(double freq_hz) const {
    const double omega = 2.0 * kPi * freq_hz / sample_rate_hz_;
    const std::complex<double> z1 = std::polar(1.0, -omega);
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h{1.0, 0.0};
    for (const auto& s : sections_)
        h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return std::abs(h);
}

std::size_t ButterworthLowpass::pad_length() const {
    return 3 * (2 * sections_.size() + 1);
}

std::vector<double> ButterworthLowpass::filter(std::span<const double> input) const {
    std::vector<double> out;
    run_cascade(sections_, input, out, /*steady_init=*/true);
    return out;
}

std::vector<double> ButterworthLowpass::filtfilt(std::span<const double> input) const {
    const std::size_t n = input.size();
    if (n == 0) return {};
    const std::size_t pad = std::min(pad_length(), n - 1);

    // Odd reflection about both end points keeps value and slope continuous.
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * input[0] - input[i]);
    ext.insert(ext.end(), input.begin(), input.end());
    for (std::size_t i = 1; i <= pad; ++i)
        ext.push_back(2.0 * input[n - 1] - input[n - 1 - i]);

    std::vector<double> fwd;
    run_cascade(sections_, ext, fwd, /*steady_init=*/true);
    std::reverse(fwd.begin(), fwd.end());
    std::vector<double> bwd;
    run_cascade(sections_, fwd, bwd, /*steady_init=*/true);
    std::reverse(bwd.begin(), bwd.end());

    return std::vector<double>(bwd.begin() + static_cast<std::ptrdiff_t>(pad),
                               bwd.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

TorqueSignal lowpass(const TorqueSignal& raw, const DspConfig& config) {
    if (raw.meta.stage != SignalStage::Raw)
        throw WrongStage("lowpass expects a raw signal, got stage " +
                         to_string(raw.meta.stage));
    const auto filt =
        ButterworthLowpass::design(config.order, config.cutoff_hz, raw.sample_rate_hz);

    TorqueSignal out = raw;
    out.samples = filt.filtfilt(raw.samples);
    out.meta.stage = SignalStage::Filtered;
    return out;
}

TorqueSignal standardize(const TorqueSignal& filtered) {
    if (filtered.meta.stage == SignalStage::Raw)
        throw WrongStage("standardize expects a filtered signal, got stage raw");
    const double m = mean(filtered.samples);
    const double sd = population_std(filtered.samples);
    if (sd <= 1e-12)
        throw DegenerateSignal("signal variance too small to standardize (std = " +
                               std::to_string(sd) + ")");

    TorqueSignal out = filtered;
    for (double& x : out.samples) x = (x - m) / sd;
    out.meta.stage = SignalStage::Standardized;
    return out;
}

PeakList find_peaks(const TorqueSignal& standardized, double min_prominence) {
    if (standardized.meta.stage != SignalStage::Standardized)
        throw WrongStage("find_peaks expects a standardized signal, got stage " +
                         to_string(standardized.meta.stage));

    const auto& x = standardized.samples;
    const std::size_t n = x.size();
    PeakList result;
    if (n < 3) return result;

    // Local maxima of sgn * x with plateau handling: a plateau counts once,
    // anchored at its midpoint.
    const auto collect = [&](int sgn) {
        std::vector<std::size_t> maxima;
        std::size_t i = 1;
        while (i + 1 < n) {
            const double v = sgn * x[i];
            if (sgn * x[i - 1] < v) {
                std::size_t j = i;
                while (j + 1 < n && sgn * x[j + 1] == v) ++j;
                if (j + 1 < n && sgn * x[j + 1] < v) {
                    maxima.push_back((i + j) / 2);
                    i = j + 1;
                    continue;
                }
                i = j + 1;
                continue;
            }
            ++i;
        }

        for (std::size_t p : maxima) {
            const double h = sgn * x[p];
            // Walk outward until a strictly higher sample or the edge; the
            // lowest point reached on each side is that side's base.
            double left_base = h;
            for (std::size_t k = p; k-- > 0;) {
                const double v = sgn * x[k];
                if (v > h) break;
                left_base = std::min(left_base, v);
            }
            double right_base = h;
            for (std::size_t k = p + 1; k < n; ++k) {
                const double v = sgn * x[k];
                if (v > h) break;
                right_base = std::min(right_base, v);
            }
            const double prominence = h - std::max(left_base, right_base);
            if (prominence >= min_prominence) {
                Peak peak;
                peak.time_s = static_cast<double>(p) / standardized.sample_rate_hz;
                peak.amplitude = std::abs(x[p]);
                peak.sign = sgn;
                result.peaks.push_back(peak);
            }
        }
    };

    collect(+1);
    collect(-1);
    std::sort(result.peaks.begin(), result.peaks.end(),
              [](const Peak& a, const Peak& b) { return a.time_s < b.time_s; });
    return result;
}

double log_decrement(const PeakList& peaks) {
    // Consecutive pairs within each sign group, in time order.
    std::size_t candidate_pairs = 0;
    double sum = 0.0;
    std::size_t used = 0;
    for (int sgn : {+1, -1}) {
        const Peak* prev = nullptr;
        for (const auto& p : peaks.peaks) {
            if (p.sign != sgn) continue;
            if (prev) {
                ++candidate_pairs;
                if (prev->amplitude > p.amplitude && p.amplitude > 0.0) {
                    sum += std::log(prev->amplitude / p.amplitude);
                    ++used;
                }
            }
            prev = &p;
        }
    }
    if (candidate_pairs < 2)
        throw InsufficientPeaks("need at least two consecutive same-sign peak pairs, found " +
                                std::to_string(candidate_pairs));
    if (used == 0)
        throw InsufficientPeaks("all same-sign peak pairs were non-decreasing");
    return sum / static_cast<double>(used);
}

}  // namespace liquidsense
