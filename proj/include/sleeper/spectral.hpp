#pragma once

// Welch power spectral density (periodic Hann segments, constant detrend,
// one-sided density scaling) and trapezoidal band integration. FFTs are
// delegated to FFTW.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace sleeper::dsp {

namespace detail {

class RealFftPlan {
public:
    explicit RealFftPlan(int n) : n_(n) {
        std::vector<double> in(static_cast<std::size_t>(n));
        std::vector<fftw_complex> out(static_cast<std::size_t>(n / 2 + 1));
        plan_ = fftw_plan_dft_r2c_1d(n, in.data(), out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan_) throw std::runtime_error("fftw plan creation failed");
    }
    ~RealFftPlan() { fftw_destroy_plan(plan_); }
    RealFftPlan(const RealFftPlan&) = delete;
    RealFftPlan& operator=(const RealFftPlan&) = delete;

    // fftw_execute_dft_r2c is thread-safe on an existing plan.
    void execute(std::vector<double>& in, std::vector<fftw_complex>& out) const {
        fftw_execute_dft_r2c(plan_, in.data(), out.data());
    }
    int size() const { return n_; }

private:
    int n_;
    fftw_plan plan_;
};

inline const RealFftPlan& real_fft_plan(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<RealFftPlan>> plans;
    std::lock_guard lock(mu);
    auto& slot = plans[n];
    if (!slot) slot = std::make_unique<RealFftPlan>(n);
    return *slot;
}

}  // namespace detail

struct Psd {
    double df = 0.0;            // bin spacing in Hz
    std::vector<double> power;  // density, units^2 / Hz, bins 0..n/2

    double freq(std::size_t k) const { return df * static_cast<double>(k); }
};

struct WelchParams {
    std::size_t segment = 400;  // 2 s at 200 Hz
    std::size_t overlap = 200;  // 50 %
};

template <class T>
Psd welch(std::span<const T> x, double fs, WelchParams params = {}) {
    const std::size_t n = params.segment;
    if (n < 2 || params.overlap >= n) throw std::invalid_argument("invalid Welch segment/overlap");
    if (x.size() < n) throw std::invalid_argument("signal shorter than one Welch segment");
    const std::size_t step = n - params.overlap;
    const std::size_t n_seg = (x.size() - n) / step + 1;

    std::vector<double> window(n);
    double w2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
        w2 += window[i] * window[i];
    }

    const auto& plan = detail::real_fft_plan(static_cast<int>(n));
    std::vector<double> seg(n);
    std::vector<fftw_complex> spec(n / 2 + 1);
    Psd psd;
    psd.df = fs / static_cast<double>(n);
    psd.power.assign(n / 2 + 1, 0.0);

    for (std::size_t s = 0; s < n_seg; ++s) {
        const std::size_t off = s * step;
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += static_cast<double>(x[off + i]);
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) seg[i] = (static_cast<double>(x[off + i]) - mean) * window[i];
        plan.execute(seg, spec);
        for (std::size_t k = 0; k < spec.size(); ++k)
            psd.power[k] += spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    }

    const double scale = 1.0 / (fs * w2 * static_cast<double>(n_seg));
    for (std::size_t k = 0; k < psd.power.size(); ++k) {
        psd.power[k] *= scale;
        const bool edge = (k == 0) || (n % 2 == 0 && k == n / 2);
        if (!edge) psd.power[k] *= 2.0;
    }
    return psd;
}

// Trapezoidal integral of the PSD over bins whose frequency lies in [low, high].
inline double integrate_band(const Psd& psd, double low_hz, double high_hz) {
    double total = 0.0;
    bool have_prev = false;
    double prev = 0.0;
    const double tol = 1e-9 * psd.df;
    for (std::size_t k = 0; k < psd.power.size(); ++k) {
        const double f = psd.freq(k);
        if (f < low_hz - tol || f > high_hz + tol) continue;
        if (have_prev) total += 0.5 * (prev + psd.power[k]) * psd.df;
        prev = psd.power[k];
        have_prev = true;
    }
    return total;
}

}  // namespace sleeper::dsp
