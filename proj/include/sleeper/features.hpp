#pragma once

// Per-epoch signal features feeding the expert rules: band powers, spindle
// and slow-wave durations on contralateral pairs, robust amplitude and
// excess kurtosis.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sleeper/filters.hpp"
#include "sleeper/spectral.hpp"
#include "sleeper/stats.hpp"
#include "sleeper/types.hpp"

namespace sleeper {

enum class Band : std::uint8_t { Delta = 0, Theta = 1, Alpha = 2, Beta = 3 };
inline constexpr std::size_t kNumBands = 4;

struct BandEdges {
    double low_hz;
    double high_hz;
};

// Beta is capped at 35 Hz.
inline constexpr std::array<BandEdges, kNumBands> kBandEdges = {
    BandEdges{0.5, 4.0}, BandEdges{4.0, 8.0}, BandEdges{8.0, 12.0}, BandEdges{12.0, 35.0}};

constexpr std::string_view band_name(Band b) {
    switch (b) {
        case Band::Delta: return "Delta";
        case Band::Theta: return "Theta";
        case Band::Alpha: return "Alpha";
        case Band::Beta: return "Beta";
    }
    return "?";
}

using BandPowerMatrix = std::array<std::array<double, kNumBands>, kNumChannels>;
using ChannelVector = std::array<double, kNumChannels>;
using PairVector = std::array<double, kNumPairs>;

struct EpochFeatures {
    BandPowerMatrix band_power{};  // uV^2
    ChannelVector amplitude{};     // uV, robust peak-to-peak
    ChannelVector kurtosis{};      // Fisher excess
    PairVector spindle_sec{};      // F3F4, C3C4, O1O2
    PairVector sws_sec{};
};

namespace features {

inline constexpr std::size_t kFilterPadSamples = 200;  // 1 s reflected padding
inline constexpr int kFilterOrder = 4;

// Detector parameters. Spindle thresholds are relative to the epoch's own
// median sigma-band RMS; slow-wave criteria are absolute (uV, seconds).
struct SpindleParams {
    double low_hz = 11.0, high_hz = 16.0;
    double rms_window_sec = 0.3;
    double threshold_factor = 1.5;
    double min_sec = 0.5, max_sec = 3.0;
};

struct SlowWaveParams {
    double low_hz = 0.3, high_hz = 2.0;
    double max_negative_peak_uv = -40.0;
    double min_peak_to_peak_uv = 75.0;
    double min_sec = 0.8, max_sec = 2.0;
};

namespace detail {

inline std::vector<double> bandpass(std::span<const float> x, double lo, double hi) {
    // Design cost is a few trig calls; negligible next to filtering.
    return dsp::filtfilt(dsp::butterworth_bandpass(kFilterOrder, lo, hi, kSampleRateHz), x, kFilterPadSamples);
}

inline std::size_t seconds_to_samples(double sec) {
    return static_cast<std::size_t>(std::lround(sec * kSampleRateHz));
}

inline double overlap_seconds(const std::vector<char>& a, const std::vector<char>& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] && b[i]) ? 1 : 0;
    return static_cast<double>(n) / kSampleRateHz;
}

// Per-channel spindle mask: samples covered by a kept event.
inline std::vector<char> spindle_mask(std::span<const float> x, const SpindleParams& p) {
    const auto sigma = bandpass(x, p.low_hz, p.high_hz);
    const std::size_t n = sigma.size();
    const std::size_t half = seconds_to_samples(p.rms_window_sec) / 2;

    std::vector<double> csum(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) csum[i + 1] = csum[i] + sigma[i] * sigma[i];
    std::vector<double> rms(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n, i + half);
        rms[i] = std::sqrt((csum[hi] - csum[lo]) / static_cast<double>(hi - lo));
    }
    const double threshold = p.threshold_factor * stats::median(rms);

    std::vector<char> mask(n, 0);
    const std::size_t min_len = seconds_to_samples(p.min_sec), max_len = seconds_to_samples(p.max_sec);
    std::size_t i = 0;
    while (i < n) {
        if (!(rms[i] > threshold)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && rms[j] > threshold) ++j;
        const std::size_t len = j - i;
        if (len >= min_len && len <= max_len) std::fill(mask.begin() + i, mask.begin() + j, 1);
        i = j;
    }
    return mask;
}

// Per-channel slow-wave mask. A wave spans consecutive positive-to-negative
// zero crossings (negative half-wave followed by positive half-wave).
inline std::vector<char> slow_wave_mask(std::span<const float> x, const SlowWaveParams& p) {
    const auto y = bandpass(x, p.low_hz, p.high_hz);
    const std::size_t n = y.size();
    std::vector<std::size_t> down;
    for (std::size_t i = 1; i < n; ++i)
        if (y[i - 1] >= 0.0 && y[i] < 0.0) down.push_back(i);

    std::vector<char> mask(n, 0);
    const std::size_t min_len = seconds_to_samples(p.min_sec), max_len = seconds_to_samples(p.max_sec);
    for (std::size_t w = 0; w + 1 < down.size(); ++w) {
        const std::size_t a = down[w], b = down[w + 1];
        const std::size_t len = b - a;
        if (len < min_len || len > max_len) continue;
        double lo = y[a], hi = y[a];
        for (std::size_t i = a; i < b; ++i) {
            lo = std::min(lo, y[i]);
            hi = std::max(hi, y[i]);
        }
        if (lo <= p.max_negative_peak_uv && hi - lo >= p.min_peak_to_peak_uv)
            std::fill(mask.begin() + a, mask.begin() + b, 1);
    }
    return mask;
}

}  // namespace detail

inline std::array<double, kNumBands> channel_band_power(std::span<const float> x) {
    const auto psd = dsp::welch(x, kSampleRateHz);
    std::array<double, kNumBands> out{};
    for (std::size_t b = 0; b < kNumBands; ++b)
        out[b] = dsp::integrate_band(psd, kBandEdges[b].low_hz, kBandEdges[b].high_hz);
    return out;
}

inline BandPowerMatrix band_power(const Epoch& epoch) {
    BandPowerMatrix out{};
    for (std::size_t c = 0; c < kNumChannels; ++c) out[c] = channel_band_power(epoch.channel(c));
    return out;
}

inline double detect_spindles(const Epoch& epoch, ChannelPair pair, const SpindleParams& p = {}) {
    const auto [a, b] = pair_channels(pair);
    return detail::overlap_seconds(detail::spindle_mask(epoch.channel(a), p),
                                   detail::spindle_mask(epoch.channel(b), p));
}

inline double detect_slow_waves(const Epoch& epoch, ChannelPair pair, const SlowWaveParams& p = {}) {
    const auto [a, b] = pair_channels(pair);
    return detail::overlap_seconds(detail::slow_wave_mask(epoch.channel(a), p),
                                   detail::slow_wave_mask(epoch.channel(b), p));
}

inline double channel_amplitude(std::span<const float> x) {
    auto y = detail::bandpass(x, 0.3, 35.0);
    const double hi = stats::percentile_inplace(y, 99.5);
    const double lo = stats::percentile_inplace(y, 0.5);
    return hi - lo;
}

inline ChannelVector amplitude(const Epoch& epoch) {
    ChannelVector out{};
    for (std::size_t c = 0; c < kNumChannels; ++c) out[c] = channel_amplitude(epoch.channel(c));
    return out;
}

// Fisher excess kurtosis m4 / m2^2 - 3; zero-variance input yields 0.
template <class T>
double excess_kurtosis(std::span<const T> x) {
    if (x.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) return 0.0;
    double mean = 0.0;
    for (T v : x) mean += static_cast<double>(v);
    mean /= static_cast<double>(x.size());
    double m2 = 0.0, m4 = 0.0;
    for (T v : x) {
        const double d = static_cast<double>(v) - mean;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(x.size());
    m4 /= static_cast<double>(x.size());
    if (!(m2 > 0.0)) return 0.0;
    return m4 / (m2 * m2) - 3.0;
}

inline ChannelVector kurtosis(const Epoch& epoch) {
    ChannelVector out{};
    for (std::size_t c = 0; c < kNumChannels; ++c) out[c] = excess_kurtosis(epoch.channel(c));
    return out;
}

inline EpochFeatures extract_features(const Epoch& epoch) {
    EpochFeatures f;
    f.band_power = band_power(epoch);
    f.amplitude = amplitude(epoch);
    f.kurtosis = kurtosis(epoch);
    for (std::size_t p = 0; p < kNumPairs; ++p) {
        f.spindle_sec[p] = detect_spindles(epoch, kAllPairs[p]);
        f.sws_sec[p] = detect_slow_waves(epoch, kAllPairs[p]);
    }
    return f;
}

// CSV for --dump-features.
inline std::string features_csv_header() {
    std::ostringstream os;
    os << "subject,epoch_index";
    for (auto c : kAllChannels)
        for (std::size_t b = 0; b < kNumBands; ++b)
            os << ",bp_" << band_name(static_cast<Band>(b)) << '_' << channel_name(c);
    for (auto c : kAllChannels) os << ",amp_" << channel_name(c);
    for (auto c : kAllChannels) os << ",kurt_" << channel_name(c);
    for (auto p : kAllPairs) os << ",spindle_" << pair_name(p);
    for (auto p : kAllPairs) os << ",sws_" << pair_name(p);
    return os.str();
}

inline std::string features_csv_row(const std::string& subject, std::size_t index, const EpochFeatures& f) {
    std::ostringstream os;
    os.precision(9);
    os << subject << ',' << index;
    for (const auto& row : f.band_power)
        for (double v : row) os << ',' << v;
    for (double v : f.amplitude) os << ',' << v;
    for (double v : f.kurtosis) os << ',' << v;
    for (double v : f.spindle_sec) os << ',' << v;
    for (double v : f.sws_sec) os << ',' << v;
    return os.str();
}

}  // namespace features
}  // namespace sleeper
