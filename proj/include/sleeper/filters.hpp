#pragma once

// Butterworth band-pass design as cascaded biquads and zero-phase
// (forward-backward) filtering with odd-reflection padding.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace sleeper::dsp {

// Transposed direct form II biquad, a0 normalized to 1.
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0;
    double a1 = 0, a2 = 0;

    double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

struct SosFilter {
    std::vector<Biquad> sections;

    std::complex<double> response(double freq_hz, double fs) const {
        const std::complex<double> zinv = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / fs);
        std::complex<double> h = 1.0;
        for (const auto& s : sections)
            h *= (s.b0 + s.b1 * zinv + s.b2 * zinv * zinv) / (1.0 + s.a1 * zinv + s.a2 * zinv * zinv);
        return h;
    }
};

// Digital Butterworth band-pass of prototype order `order` (the resulting
// filter has 2*order poles), via analog low-pass -> band-pass transform and a
// pre-warped bilinear map. Unit gain at the geometric center frequency.
inline SosFilter butterworth_bandpass(int order, double low_hz, double high_hz, double fs) {
    if (order < 1) throw std::invalid_argument("filter order must be positive");
    if (!(low_hz > 0 && low_hz < high_hz && high_hz < fs / 2))
        throw std::invalid_argument("band-pass edges must satisfy 0 < low < high < fs/2");

    using cd = std::complex<double>;
    const double fs2 = 2.0 * fs;
    const double w1 = fs2 * std::tan(std::numbers::pi * low_hz / fs);
    const double w2 = fs2 * std::tan(std::numbers::pi * high_hz / fs);
    const double bw = w2 - w1;
    const double w0 = std::sqrt(w1 * w2);

    SosFilter filt;
    for (int k = 1; k <= order; ++k) {
        const cd p = std::polar(1.0, std::numbers::pi * (2.0 * k + order - 1) / (2.0 * order));
        const cd pb = p * bw;
        const cd disc = std::sqrt(pb * pb - 4.0 * w0 * w0);
        for (const cd& s : {(pb + disc) / 2.0, (pb - disc) / 2.0}) {
            if (s.imag() <= 0) continue;  // keep one of each conjugate pair
            const cd z = (fs2 + s) / (fs2 - s);
            Biquad bq;
            bq.b0 = 1.0;
            bq.b1 = 0.0;
            bq.b2 = -1.0;  // one zero at z = 1 and one at z = -1
            bq.a1 = -2.0 * z.real();
            bq.a2 = std::norm(z);
            filt.sections.push_back(bq);
        }
    }
    if (filt.sections.size() != static_cast<std::size_t>(order))
        throw std::logic_error("band-pass design produced an unexpected number of sections");

    const double center_hz = fs / std::numbers::pi * std::atan(w0 / fs2);
    const double g = std::abs(filt.response(center_hz, fs));
    const double per_section = std::pow(1.0 / g, 1.0 / order);
    for (auto& s : filt.sections) {
        s.b0 *= per_section;
        s.b1 *= per_section;
        s.b2 *= per_section;
    }
    return filt;
}

namespace detail {

// Steady-state section states for a constant input of 1 at the cascade input.
inline std::vector<std::array<double, 2>> sos_steady_state(const SosFilter& f) {
    std::vector<std::array<double, 2>> zi(f.sections.size());
    double scale = 1.0;
    for (std::size_t i = 0; i < f.sections.size(); ++i) {
        const auto& s = f.sections[i];
        const double g = s.dc_gain();
        zi[i] = {(g - s.b0) * scale, (s.b2 - s.a2 * g) * scale};
        scale *= g;
    }
    return zi;
}

// Sections are advanced together per sample so their recurrences overlap.
inline void sos_run(const SosFilter& f, std::vector<double>& x, const std::vector<std::array<double, 2>>& zi,
                    double x0) {
    const std::size_t ns = f.sections.size();
    std::vector<double> z1(ns), z2(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        z1[i] = zi[i][0] * x0;
        z2[i] = zi[i][1] * x0;
    }
    for (double& v : x) {
        double in = v;
        for (std::size_t i = 0; i < ns; ++i) {
            const auto& s = f.sections[i];
            const double y = s.b0 * in + z1[i];
            z1[i] = s.b1 * in - s.a1 * y + z2[i];
            z2[i] = s.b2 * in - s.a2 * y;
            in = y;
        }
        v = in;
    }
}

}  // namespace detail

// Zero-phase filtering: odd-reflect `pad` samples at each edge, run the
// cascade forward then backward with steady-state initial conditions, trim.
template <class T>
std::vector<double> filtfilt(const SosFilter& f, std::span<const T> x, std::size_t pad) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    pad = std::min(pad, n - 1);

    std::vector<double> ext(n + 2 * pad);
    const double first = x[0], last = x[n - 1];
    for (std::size_t i = 0; i < pad; ++i) ext[i] = 2.0 * first - static_cast<double>(x[pad - i]);
    for (std::size_t i = 0; i < n; ++i) ext[pad + i] = static_cast<double>(x[i]);
    for (std::size_t i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * last - static_cast<double>(x[n - 2 - i]);

    const auto zi = detail::sos_steady_state(f);
    detail::sos_run(f, ext, zi, ext.front());
    std::reverse(ext.begin(), ext.end());
    detail::sos_run(f, ext, zi, ext.front());
    std::reverse(ext.begin(), ext.end());

    return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace sleeper::dsp
