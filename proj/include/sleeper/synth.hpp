#pragma once

// Labeled synthetic PSG generator. Stage sequences come from a Markov chain;
// each epoch carries stage-typical morphology (alpha, theta, spindles, slow
// waves, eye movements, chin EMG tone) on top of pink background noise, with
// per-subject and per-epoch variability plus occasional transitional epochs
// that blend in a neighbouring stage.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sleeper/types.hpp"

namespace sleeper::synth {

using TransitionMatrix = std::array<std::array<double, kNumStages>, kNumStages>;

// Rows/cols in [Wake, N1, N2, N3, REM] order; 0.8 self-transition.
inline constexpr TransitionMatrix kDefaultTransitions = {{
    {0.80, 0.12, 0.04, 0.01, 0.03},
    {0.06, 0.80, 0.10, 0.01, 0.03},
    {0.02, 0.04, 0.80, 0.10, 0.04},
    {0.02, 0.01, 0.16, 0.80, 0.01},
    {0.05, 0.05, 0.09, 0.01, 0.80},
}};

struct SynthConfig {
    int n_subjects = 100;
    int epochs_per_subject = 120;
    std::uint64_t seed = 7;
    double noise_scale_uV = 5.0;
    TransitionMatrix stage_transition = kDefaultTransitions;

    void validate() const {
        if (n_subjects <= 0 || epochs_per_subject <= 0) throw ConfigError("synth counts must be positive");
        if (!(noise_scale_uV >= 0.0) || !std::isfinite(noise_scale_uV))
            throw ConfigError("noise_scale_uV must be finite and nonnegative");
        for (const auto& row : stage_transition) {
            double s = 0.0;
            for (double p : row) {
                if (!(p >= 0.0)) throw ConfigError("transition probabilities must be nonnegative");
                s += p;
            }
            if (std::abs(s - 1.0) > 1e-9) throw ConfigError("transition rows must sum to 1");
        }
    }
};

inline std::string subject_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "subject_%03d", index);
    return buf;
}

// SplitMix64 finalizer; derives independent per-subject streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline SleepStage draw_next_stage(const TransitionMatrix& t, SleepStage from, std::mt19937_64& rng) {
    const auto& row = t[static_cast<std::size_t>(stage_code(from))];
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (std::size_t k = 0; k < kNumStages; ++k) {
        acc += row[k];
        if (u < acc) return static_cast<SleepStage>(k);
    }
    for (std::size_t k = kNumStages; k-- > 0;)
        if (row[k] > 0.0) return static_cast<SleepStage>(k);
    return from;
}

// Hypnogram starting awake.
inline std::vector<SleepStage> sample_hypnogram(const TransitionMatrix& t, std::size_t n, std::mt19937_64& rng) {
    std::vector<SleepStage> out;
    out.reserve(n);
    SleepStage s = SleepStage::Wake;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) s = draw_next_stage(t, s, rng);
        out.push_back(s);
    }
    return out;
}

namespace detail {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kN = kSamplesPerEpoch;
constexpr double kFs = kSampleRateHz;

using Buffer = std::array<std::vector<double>, kNumChannels>;

struct SubjectTraits {
    double gain;              // overall EEG amplitude scale
    double alpha_hz;          // individual alpha frequency
    double alpha_strength;    // some people barely produce alpha
    double spindle_hz;        // individual spindle frequency
    double spindle_strength;
    double emg_tone;          // chin EMG scale (electrode placement dependent)
    double channel_gain[kNumChannels];
};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng_); }
    double normal() { return norm_(eng_); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(eng_); }
    bool chance(double p) { return uniform(0.0, 1.0) < p; }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> norm_{0.0, 1.0};
};

// Between-subject variability is several-fold for amplitudes, as in
// clinical cohorts (age, skull thickness, electrode impedance).
inline SubjectTraits draw_traits(Rng& rng) {
    auto log_uniform = [&](double lo, double hi) { return std::exp(rng.uniform(std::log(lo), std::log(hi))); };
    SubjectTraits t{};
    t.gain = log_uniform(0.6, 1.7);
    t.alpha_hz = rng.uniform(8.5, 11.5);
    t.alpha_strength = log_uniform(0.3, 1.5);
    t.spindle_hz = rng.uniform(12.0, 14.0);
    t.spindle_strength = log_uniform(0.5, 1.5);
    t.emg_tone = log_uniform(0.3, 3.0);
    for (double& g : t.channel_gain) g = rng.uniform(0.75, 1.3);
    return t;
}

// Unit-variance pink noise (Kellet's three-pole approximation).
inline void add_pink(std::vector<double>& x, double scale, Rng& rng) {
    std::vector<double> p(x.size());
    double b0 = 0, b1 = 0, b2 = 0;
    // Warm up so the slow pole is near steady state.
    for (int i = 0; i < 2000; ++i) {
        const double w = rng.normal();
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
    }
    double sum = 0, sum2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = rng.normal();
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        p[i] = b0 + b1 + b2 + w * 0.1848;
        sum += p[i];
        sum2 += p[i] * p[i];
    }
    const double n = static_cast<double>(x.size());
    const double mean = sum / n;
    const double sd = std::sqrt(std::max(sum2 / n - mean * mean, 1e-12));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += scale * (p[i] - mean) / sd;
}

inline void add_white(std::vector<double>& x, double sd, Rng& rng) {
    for (double& v : x) v += sd * rng.normal();
}

// Phasor advanced by rotation; avoids a sin() call per sample.
class Oscillator {
public:
    Oscillator(double hz, double phase)
        : c_(std::cos(phase)), s_(std::sin(phase)), dc_(std::cos(kTwoPi * hz / kFs)), ds_(std::sin(kTwoPi * hz / kFs)) {}
    double value() const { return s_; }
    void advance() {
        const double c = c_ * dc_ - s_ * ds_;
        s_ = s_ * dc_ + c_ * ds_;
        c_ = c;
    }

private:
    double c_, s_, dc_, ds_;
};

// Sinusoid with slow random amplitude modulation (waxing/waning rhythm).
inline void add_rhythm(std::vector<double>& x, double hz, double amp, Rng& rng) {
    Oscillator carrier(hz, rng.uniform(0.0, kTwoPi));
    Oscillator mod(rng.uniform(0.1, 0.4), rng.uniform(0.0, kTwoPi));
    for (double& v : x) {
        v += amp * (0.7 + 0.3 * mod.value()) * carrier.value();
        carrier.advance();
        mod.advance();
    }
}

// Narrow-band activity: sum of a few sinusoids spread across [lo, hi] Hz.
inline void add_band(std::vector<double>& x, double lo, double hi, double amp, Rng& rng) {
    constexpr int kTones = 4;
    for (int k = 0; k < kTones; ++k) {
        const double hz = rng.uniform(lo, hi);
        add_rhythm(x, hz, amp / std::sqrt(static_cast<double>(kTones)), rng);
    }
}

struct Burst {
    std::size_t start;
    std::size_t length;
};

// Non-overlapping bursts placed left to right with random gaps.
inline std::vector<Burst> place_bursts(int count, double min_sec, double max_sec, double min_gap_sec, Rng& rng) {
    std::vector<Burst> out;
    double t = rng.uniform(0.5, 3.0);
    for (int k = 0; k < count; ++k) {
        const double len = rng.uniform(min_sec, max_sec);
        if (t + len > 29.5) break;
        out.push_back({static_cast<std::size_t>(t * kFs), static_cast<std::size_t>(len * kFs)});
        const double remaining = 29.5 - (t + len);
        const double slots = std::max(1, count - k - 1);
        t += len + min_gap_sec + rng.uniform(0.0, std::max(0.0, remaining / slots - min_gap_sec));
    }
    return out;
}

// Transient waveform with a sharp onset: linear rise over `rise` samples,
// then an exponential-ish cosine decay over `fall` samples.
inline double sharp_wave(std::size_t i, std::size_t rise, std::size_t fall) {
    if (i < rise) return static_cast<double>(i) / static_cast<double>(rise);
    const double u = static_cast<double>(i - rise) / static_cast<double>(fall);
    return u >= 1.0 ? 0.0 : 0.5 * (1.0 + std::cos(std::numbers::pi * u));
}

// Adds `stage` morphology with scale w to the buffer.
inline void add_stage(Buffer& buf, SleepStage stage, double w, const SubjectTraits& tr, Rng& rng) {
    enum : std::size_t { F3, F4, C3, C4, O1, O2, E1, E2, EMG };
    const double g = tr.gain * w;
    const double jitter = rng.uniform(0.7, 1.3);
    switch (stage) {
        case SleepStage::Wake: {
            // Eyes-open wakefulness has little alpha but more eye movement.
            const bool eyes_open = rng.chance(0.4);
            const double a = 24.0 * g * tr.alpha_strength * jitter * (eyes_open ? 0.25 : 1.0);
            const double scale[] = {0.3, 0.3, 0.5, 0.5, 1.0, 1.0};
            const double hz = tr.alpha_hz + rng.uniform(-0.3, 0.3);
            for (std::size_t c = F3; c <= O2; ++c) {
                add_rhythm(buf[c], hz, a * scale[c], rng);
                add_band(buf[c], 16.0, 28.0, (eyes_open ? 7.0 : 5.0) * g, rng);
            }
            add_white(buf[EMG], 22.0 * tr.emg_tone * w * rng.uniform(0.7, 1.3), rng);
            // Blinks and saccades: brief deflections, opposite polarity across the EOG pair.
            for (const auto& b : place_bursts(rng.integer(1, eyes_open ? 8 : 3), 0.25, 0.4, 0.6, rng)) {
                const double amp = rng.uniform(60.0, 160.0) * w * (rng.chance(0.7) ? 1.0 : -1.0);
                for (std::size_t i = 0; i < b.length && b.start + i < kN; ++i) {
                    const double v = amp * std::sin(std::numbers::pi * static_cast<double>(i) / b.length);
                    buf[E1][b.start + i] += v;
                    buf[E2][b.start + i] -= v;
                }
            }
            break;
        }
        case SleepStage::N1: {
            for (std::size_t c = F3; c <= O2; ++c) {
                add_band(buf[c], 4.0, 7.5, 16.0 * g * jitter, rng);
                if (c >= O1) add_rhythm(buf[c], tr.alpha_hz, 6.0 * g * tr.alpha_strength, rng);
            }
            // Vertex sharp waves: brief, central-maximal, surface negative.
            const double vscale[] = {0.6, 0.6, 1.0, 1.0, 0.3, 0.3};
            for (const auto& b : place_bursts(rng.integer(0, 4), 0.25, 0.4, 1.5, rng)) {
                const double amp = rng.uniform(50.0, 110.0) * g;
                const std::size_t rise = b.length / 3;
                for (std::size_t i = 0; i < b.length && b.start + i < kN; ++i) {
                    const double v = -amp * sharp_wave(i, rise, b.length - rise);
                    for (std::size_t c = F3; c <= O2; ++c) buf[c][b.start + i] += vscale[c] * v;
                }
            }
            // Slow rolling eye movements.
            const double hz = rng.uniform(0.15, 0.35);
            const double amp = rng.uniform(30.0, 70.0) * w;
            const double ph = rng.uniform(0.0, kTwoPi);
            for (std::size_t i = 0; i < kN; ++i) {
                const double v = amp * std::sin(kTwoPi * hz * static_cast<double>(i) / kFs + ph);
                buf[E1][i] += v;
                buf[E2][i] -= v;
            }
            add_white(buf[EMG], 10.0 * tr.emg_tone * w * rng.uniform(0.7, 1.3), rng);
            break;
        }
        case SleepStage::N2: {
            for (std::size_t c = F3; c <= O2; ++c) {
                add_band(buf[c], 4.0, 7.5, 12.0 * g, rng);
                add_band(buf[c], 1.5, 3.5, 18.0 * g, rng);
            }
            const double scale[] = {0.85, 0.85, 1.0, 1.0, 0.45, 0.45};
            const double amp = 40.0 * g * tr.spindle_strength * jitter;
            for (const auto& b : place_bursts(rng.integer(2, 6), 0.6, 2.0, 0.8, rng)) {
                const double hz = tr.spindle_hz + rng.uniform(-0.4, 0.4);
                for (std::size_t i = 0; i < b.length && b.start + i < kN; ++i) {
                    const double env = std::pow(std::sin(std::numbers::pi * static_cast<double>(i) / b.length), 2);
                    const double v = amp * env * std::sin(kTwoPi * hz * static_cast<double>(i) / kFs);
                    for (std::size_t c = F3; c <= O2; ++c) buf[c][b.start + i] += scale[c] * v;
                }
            }
            // K-complexes: sharp negative wave then a slower positive one, frontal maximum.
            const double kscale[] = {1.0, 1.0, 0.85, 0.85, 0.4, 0.4};
            for (const auto& b : place_bursts(rng.integer(0, 3), 0.6, 1.0, 3.0, rng)) {
                const double amp = rng.uniform(60.0, 110.0) * g;
                const std::size_t neg = b.length / 3;
                for (std::size_t i = 0; i < b.length && b.start + i < kN; ++i) {
                    const double di = static_cast<double>(i);
                    const double v = i < neg ? -amp * std::sin(std::numbers::pi * di / neg)
                                             : 0.6 * amp * std::sin(std::numbers::pi * (di - neg) / (b.length - neg));
                    for (std::size_t c = F3; c <= O2; ++c) buf[c][b.start + i] += kscale[c] * v;
                }
            }
            add_white(buf[EMG], 7.0 * tr.emg_tone * w * rng.uniform(0.7, 1.3), rng);
            break;
        }
        case SleepStage::N3: {
            for (std::size_t c = F3; c <= O2; ++c) add_band(buf[c], 4.0, 7.5, 8.0 * g, rng);
            const double scale[] = {1.0, 1.0, 0.95, 0.95, 0.55, 0.55};
            // Slow-wave trains occupying 30-90 % of the epoch.
            const double fraction = rng.uniform(0.3, 0.9);
            const int n_trains = rng.integer(1, 3);
            const double train_sec = fraction * 29.0 / n_trains;
            for (const auto& b : place_bursts(n_trains, 0.8 * train_sec, train_sec, 0.5, rng)) {
                const double hz = rng.uniform(0.6, 1.2);
                const double amp = rng.uniform(125.0, 170.0) * g;
                const double taper = 0.5 * kFs;
                for (std::size_t i = 0; i < b.length && b.start + i < kN; ++i) {
                    const double di = static_cast<double>(i);
                    const double edge = std::min({1.0, di / taper, (static_cast<double>(b.length) - di) / taper});
                    const double v = amp * edge * -std::sin(kTwoPi * hz * di / kFs);
                    for (std::size_t c = F3; c <= O2; ++c) buf[c][b.start + i] += scale[c] * v;
                    // Frontal slow activity leaks into both EOG leads with the same polarity.
                    buf[E1][b.start + i] += 0.3 * v;
                    buf[E2][b.start + i] += 0.3 * v;
                }
            }
            add_white(buf[EMG], 5.0 * tr.emg_tone * w * rng.uniform(0.7, 1.3), rng);
            break;
        }
        case SleepStage::REM: {
            for (std::size_t c = F3; c <= O2; ++c) {
                add_band(buf[c], 2.0, 7.0, 9.0 * g * jitter, rng);
                add_band(buf[c], 14.0, 25.0, 4.0 * g, rng);
            }
            // Sawtooth waves: short 2-4 Hz triangular trains over central leads.
            const double sscale[] = {0.5, 0.5, 1.0, 1.0, 0.3, 0.3};
            for (const auto& b : place_bursts(rng.integer(0, 3), 1.0, 3.0, 2.0, rng)) {
                const double hz = rng.uniform(2.0, 4.0);
                const double amp = rng.uniform(20.0, 45.0) * g;
                for (std::size_t i = 0; i < b.length && b.start + i < kN; ++i) {
                    const double phase = std::fmod(hz * static_cast<double>(i) / kFs, 1.0);
                    const double v = amp * (phase < 0.8 ? phase / 0.8 : (1.0 - phase) / 0.2) - 0.5 * amp;
                    for (std::size_t c = F3; c <= O2; ++c) buf[c][b.start + i] += sscale[c] * v;
                }
            }
            // Rapid eye movements: sharp onset, slower return, opposite polarity.
            for (const auto& b : place_bursts(rng.integer(1, 8), 0.4, 1.0, 0.5, rng)) {
                const double amp = rng.uniform(70.0, 150.0) * w * (rng.chance(0.5) ? 1.0 : -1.0);
                const std::size_t rise = std::max<std::size_t>(4, b.length / 6);
                for (std::size_t i = 0; i < b.length && b.start + i < kN; ++i) {
                    const double v = amp * sharp_wave(i, rise, b.length - rise);
                    buf[E1][b.start + i] += v;
                    buf[E2][b.start + i] -= v;
                }
            }
            add_white(buf[EMG], 1.5 * tr.emg_tone * w * rng.uniform(0.7, 1.3), rng);
            // Phasic twitches: brief bursts on an otherwise atonic chin.
            if (rng.chance(0.5))
                for (const auto& b : place_bursts(rng.integer(1, 4), 0.1, 0.25, 1.0, rng)) {
                    const double sd = rng.uniform(10.0, 30.0) * tr.emg_tone * w;
                    for (std::size_t i = 0; i < b.length && b.start + i < kN; ++i) buf[EMG][b.start + i] += sd * rng.normal();
                }
            break;
        }
    }
}

inline SleepStage neighbour_stage(SleepStage s, Rng& rng) {
    switch (s) {
        case SleepStage::Wake: return rng.chance(0.7) ? SleepStage::N1 : SleepStage::REM;
        case SleepStage::N1: return rng.chance(0.5) ? SleepStage::N2 : (rng.chance(0.6) ? SleepStage::Wake : SleepStage::REM);
        case SleepStage::N2: return rng.chance(0.5) ? SleepStage::N1 : SleepStage::N3;
        case SleepStage::N3: return SleepStage::N2;
        case SleepStage::REM: return rng.chance(0.5) ? SleepStage::N1 : SleepStage::Wake;
    }
    return s;
}

inline std::vector<float> synthesize_epoch(SleepStage stage, std::optional<SleepStage> previous,
                                           const SubjectTraits& tr, double noise_scale, Rng& rng) {
    Buffer buf;
    for (auto& ch : buf) ch.assign(kN, 0.0);

    // Transitional epochs: neighbouring stage signature mixed in. N1 is the
    // most ambiguous stage and blends most often.
    const double p_blend = stage == SleepStage::N1 ? 0.55 : 0.25;
    double w_main = 1.0;
    if (rng.chance(p_blend)) {
        const SleepStage other =
            (previous && *previous != stage && rng.chance(0.6)) ? *previous : neighbour_stage(stage, rng);
        const double w_other = rng.uniform(0.25, 0.6);
        w_main = 1.0 - 0.5 * w_other;
        add_stage(buf, other, w_other, tr, rng);
    }
    add_stage(buf, stage, w_main, tr, rng);

    for (std::size_t c = 0; c < kNumChannels; ++c) add_pink(buf[c], noise_scale, rng);

    std::vector<float> out(kNumChannels * kN);
    for (std::size_t c = 0; c < kNumChannels; ++c)
        for (std::size_t i = 0; i < kN; ++i) out[c * kN + i] = static_cast<float>(tr.channel_gain[c] * buf[c][i]);
    return out;
}

}  // namespace detail

inline Recording generate_subject(const SynthConfig& cfg, int subject_index) {
    cfg.validate();
    detail::Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(subject_index)));
    const auto traits = detail::draw_traits(rng);
    Recording rec;
    rec.subject_id = subject_name(subject_index);
    auto labels = sample_hypnogram(cfg.stage_transition, static_cast<std::size_t>(cfg.epochs_per_subject),
                                   rng.engine());
    rec.epochs.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::optional<SleepStage> prev;
        if (i > 0) prev = labels[i - 1];
        rec.epochs.emplace_back(detail::synthesize_epoch(labels[i], prev, traits, cfg.noise_scale_uV, rng),
                                rec.subject_id, static_cast<std::uint32_t>(i));
    }
    rec.labels = std::move(labels);
    return rec;
}

inline std::vector<Recording> generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    std::vector<Recording> out;
    out.reserve(static_cast<std::size_t>(cfg.n_subjects));
    for (int s = 0; s < cfg.n_subjects; ++s) out.push_back(generate_subject(cfg, s));
    return out;
}

// Stationary distribution by power iteration (used to check label marginals).
inline std::array<double, kNumStages> stationary_distribution(const TransitionMatrix& t) {
    std::array<double, kNumStages> pi{};
    pi.fill(1.0 / kNumStages);
    for (int it = 0; it < 10000; ++it) {
        std::array<double, kNumStages> next{};
        for (std::size_t i = 0; i < kNumStages; ++i)
            for (std::size_t j = 0; j < kNumStages; ++j) next[j] += pi[i] * t[i][j];
        pi = next;
    }
    return pi;
}

}  // namespace sleeper::synth
