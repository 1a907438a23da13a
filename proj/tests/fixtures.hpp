#pragma once

// Shared helpers for the unit tests: signal construction and small
// independent reference implementations used as oracles.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "sleeper/sleeper.hpp"

namespace fixtures {

using namespace sleeper;

inline Epoch zero_epoch() { return Epoch(std::vector<float>(kNumChannels * kSamplesPerEpoch, 0.0f), "t", 0); }

inline void fill_sine(Epoch& e, ChannelId c, double hz, double amp, double phase = 0.0) {
    auto ch = e.mutable_channel(channel_index(c));
    for (std::size_t i = 0; i < ch.size(); ++i)
        ch[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / kSampleRateHz + phase));
}

// 1/f noise by spectral shaping of white noise (direct DFT synthesis over a
// handful of frequencies would be too coarse, so sum many random-phase sines).
inline std::vector<double> pink_noise(std::size_t n, double rms, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<double> x(n, 0.0);
    for (int k = 1; k <= 300; ++k) {
        const double f = 0.1 * k;
        const double a = 1.0 / std::sqrt(f);
        const double ph = phase(rng);
        for (std::size_t i = 0; i < n; ++i)
            x[i] += a * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / kSampleRateHz + ph);
    }
    double ss = 0.0;
    for (double v : x) ss += v * v;
    const double s = rms / std::sqrt(ss / static_cast<double>(n));
    for (double& v : x) v *= s;
    return x;
}

// Textbook Welch estimate with a direct O(n^2) DFT; independent of FFTW.
inline std::vector<double> naive_welch(const std::vector<double>& x, std::size_t seg, std::size_t step, double fs) {
    const std::size_t n_seg = (x.size() - seg) / step + 1;
    std::vector<double> w(seg);
    double w2 = 0.0;
    for (std::size_t i = 0; i < seg; ++i) {
        w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(seg)));
        w2 += w[i] * w[i];
    }
    std::vector<std::complex<double>> twiddle(seg);
    for (std::size_t m = 0; m < seg; ++m)
        twiddle[m] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(seg));
    std::vector<double> psd(seg / 2 + 1, 0.0), y(seg);
    for (std::size_t s = 0; s < n_seg; ++s) {
        double mean = 0.0;
        for (std::size_t i = 0; i < seg; ++i) mean += x[s * step + i];
        mean /= static_cast<double>(seg);
        for (std::size_t i = 0; i < seg; ++i) y[i] = (x[s * step + i] - mean) * w[i];
        for (std::size_t k = 0; k <= seg / 2; ++k) {
            std::complex<double> acc = 0.0;
            for (std::size_t i = 0; i < seg; ++i) acc += y[i] * twiddle[(k * i) % seg];
            psd[k] += std::norm(acc);
        }
    }
    for (std::size_t k = 0; k < psd.size(); ++k) {
        psd[k] /= fs * w2 * static_cast<double>(n_seg);
        if (k != 0 && k != seg / 2) psd[k] *= 2.0;
    }
    return psd;
}

// Percentile by the q*(n-1) rank with linear interpolation.
inline double rank_percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline std::vector<SleepStage> random_labels(std::size_t n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(0, 4);
    std::vector<SleepStage> y(n);
    for (auto& s : y) s = static_cast<SleepStage>(d(rng));
    return y;
}

}  // namespace fixtures
