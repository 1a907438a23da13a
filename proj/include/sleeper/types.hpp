#pragma once

// Core domain types shared by every stage of the pipeline: stage and channel
// vocabularies, the fixed-shape epoch, recordings, and subject-level splits.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sleeper {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SLEEPER_DEFINE_ERROR(Name) \
    struct Name : Error {          \
        using Error::Error;        \
    }

SLEEPER_DEFINE_ERROR(SplitError);
SLEEPER_DEFINE_ERROR(FitError);
SLEEPER_DEFINE_ERROR(StateError);
SLEEPER_DEFINE_ERROR(SelectError);
SLEEPER_DEFINE_ERROR(NumericsError);
SLEEPER_DEFINE_ERROR(ShapeError);
SLEEPER_DEFINE_ERROR(RenderError);
SLEEPER_DEFINE_ERROR(EvalError);
SLEEPER_DEFINE_ERROR(ConfigError);

#undef SLEEPER_DEFINE_ERROR

// Raised by the binary readers; carries the byte offset where decoding failed.
struct FormatError : Error {
    FormatError(const std::string& what, std::uint64_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset(offset) {}
    std::uint64_t offset;
};

// ---------------------------------------------------------------------------
// Sleep stages
// ---------------------------------------------------------------------------

// Integer codes follow the probability-vector order used everywhere:
// [Wake, N1, N2, N3, REM].
enum class SleepStage : std::uint8_t { Wake = 0, N1 = 1, N2 = 2, N3 = 3, REM = 4 };

inline constexpr std::size_t kNumStages = 5;
inline constexpr std::array<SleepStage, kNumStages> kAllStages = {
    SleepStage::Wake, SleepStage::N1, SleepStage::N2, SleepStage::N3, SleepStage::REM};

constexpr int stage_code(SleepStage s) { return static_cast<int>(s); }

inline SleepStage stage_from_code(int code) {
    if (code < 0 || code >= static_cast<int>(kNumStages))
        throw std::out_of_range("invalid sleep stage code " + std::to_string(code));
    return static_cast<SleepStage>(code);
}

constexpr std::string_view stage_name(SleepStage s) {
    switch (s) {
        case SleepStage::Wake: return "Wake";
        case SleepStage::N1: return "N1";
        case SleepStage::N2: return "N2";
        case SleepStage::N3: return "N3";
        case SleepStage::REM: return "REM";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

enum class ChannelId : std::uint8_t { F3 = 0, F4, C3, C4, O1, O2, E1, E2, ChinEMG };

inline constexpr std::size_t kNumChannels = 9;
inline constexpr std::array<ChannelId, kNumChannels> kAllChannels = {
    ChannelId::F3, ChannelId::F4, ChannelId::C3, ChannelId::C4, ChannelId::O1,
    ChannelId::O2, ChannelId::E1, ChannelId::E2, ChannelId::ChinEMG};

constexpr std::size_t channel_index(ChannelId c) { return static_cast<std::size_t>(c); }

constexpr std::string_view channel_name(ChannelId c) {
    switch (c) {
        case ChannelId::F3: return "F3";
        case ChannelId::F4: return "F4";
        case ChannelId::C3: return "C3";
        case ChannelId::C4: return "C4";
        case ChannelId::O1: return "O1";
        case ChannelId::O2: return "O2";
        case ChannelId::E1: return "E1";
        case ChannelId::E2: return "E2";
        case ChannelId::ChinEMG: return "ChinEMG";
    }
    return "?";
}

// Contralateral EEG pairs used by the event detectors.
enum class ChannelPair : std::uint8_t { F3F4 = 0, C3C4 = 1, O1O2 = 2 };

inline constexpr std::size_t kNumPairs = 3;
inline constexpr std::array<ChannelPair, kNumPairs> kAllPairs = {ChannelPair::F3F4, ChannelPair::C3C4,
                                                                 ChannelPair::O1O2};

constexpr std::array<ChannelId, 2> pair_channels(ChannelPair p) {
    switch (p) {
        case ChannelPair::F3F4: return {ChannelId::F3, ChannelId::F4};
        case ChannelPair::C3C4: return {ChannelId::C3, ChannelId::C4};
        case ChannelPair::O1O2: return {ChannelId::O1, ChannelId::O2};
    }
    return {ChannelId::F3, ChannelId::F4};
}

constexpr std::string_view pair_name(ChannelPair p) {
    switch (p) {
        case ChannelPair::F3F4: return "F3&F4";
        case ChannelPair::C3C4: return "C3&C4";
        case ChannelPair::O1O2: return "O1&O2";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Epoch / Recording
// ---------------------------------------------------------------------------

inline constexpr double kSampleRateHz = 200.0;
inline constexpr std::size_t kSamplesPerEpoch = 6000;  // 30 s at 200 Hz

// One 30 s, 9-channel scoring unit. Samples are row-major, channel-major:
// sample (c, t) lives at c * kSamplesPerEpoch + t.
class Epoch {
public:
    Epoch() : samples_(kNumChannels * kSamplesPerEpoch, 0.0f) {}

    Epoch(std::vector<float> samples, std::string subject_id, std::uint32_t index)
        : samples_(std::move(samples)), subject_id_(std::move(subject_id)), index_(index) {
        if (samples_.size() != kNumChannels * kSamplesPerEpoch)
            throw ShapeError("epoch must hold 9x6000 samples, got " + std::to_string(samples_.size()));
        for (float v : samples_)
            if (!std::isfinite(v)) throw ShapeError("epoch samples must be finite");
    }

    std::span<const float> channel(std::size_t c) const {
        return {samples_.data() + c * kSamplesPerEpoch, kSamplesPerEpoch};
    }
    std::span<const float> channel(ChannelId c) const { return channel(channel_index(c)); }
    std::span<float> mutable_channel(std::size_t c) {
        return {samples_.data() + c * kSamplesPerEpoch, kSamplesPerEpoch};
    }

    const std::vector<float>& samples() const { return samples_; }
    std::vector<float>& mutable_samples() { return samples_; }
    const std::string& subject_id() const { return subject_id_; }
    std::uint32_t index() const { return index_; }
    void set_index(std::uint32_t i) { index_ = i; }
    void set_subject_id(std::string id) { subject_id_ = std::move(id); }

private:
    std::vector<float> samples_;
    std::string subject_id_;
    std::uint32_t index_ = 0;
};

struct Recording {
    std::string subject_id;
    std::vector<Epoch> epochs;
    std::optional<std::vector<SleepStage>> labels;

    void validate() const {
        if (labels && labels->size() != epochs.size())
            throw ShapeError("recording labels/epochs length mismatch");
        for (std::size_t i = 0; i < epochs.size(); ++i)
            if (epochs[i].index() != i) throw ShapeError("epoch indices must be contiguous from 0");
    }
};

// ---------------------------------------------------------------------------
// Subject split
// ---------------------------------------------------------------------------

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> test;
    std::uint64_t seed = 0;

    bool is_test(const std::string& subject) const {
        return std::find(test.begin(), test.end(), subject) != test.end();
    }
};

// Splits distinct subjects (sorted, then shuffled by seed) into train/test.
// |test| = round-half-up(test_fraction * subjects), at least 1.
inline DatasetSplit split_subjects(std::vector<std::string> subjects, double test_fraction,
                                   std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw SplitError("test_fraction must lie in (0, 1)");
    std::sort(subjects.begin(), subjects.end());
    subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
    if (subjects.size() < 2) throw SplitError("need at least 2 distinct subjects to split");

    std::mt19937_64 rng(seed);
    // Fisher-Yates with an explicit draw so the order does not depend on the
    // standard library's shuffle implementation.
    for (std::size_t i = subjects.size() - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(subjects[i], subjects[j]);
    }

    auto n_test = static_cast<std::size_t>(std::floor(test_fraction * subjects.size() + 0.5));
    n_test = std::clamp<std::size_t>(n_test, 1, subjects.size() - 1);

    DatasetSplit split;
    split.seed = seed;
    split.test.assign(subjects.begin(), subjects.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.assign(subjects.begin() + static_cast<std::ptrdiff_t>(n_test), subjects.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

inline DatasetSplit split_by_subject(const std::vector<Recording>& recordings, double test_fraction,
                                     std::uint64_t seed) {
    std::vector<std::string> subjects;
    subjects.reserve(recordings.size());
    for (const auto& r : recordings) subjects.push_back(r.subject_id);
    return split_subjects(std::move(subjects), test_fraction, seed);
}

}  // namespace sleeper
