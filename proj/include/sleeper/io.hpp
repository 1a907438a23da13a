#pragma once

// On-disk epoch container ("PSGB") and the labels CSV.
//
// Layout (all integers little-endian):
//   magic            4 bytes  "PSGB"
//   version          u16      = 1
//   n_epochs         u32
//   n_channels       u16      = 9
//   samples_per_ep   u32      = 6000
//   has_labels       u8       0 | 1
//   subject_id       u16 byte length + UTF-8 bytes
//   payload          n_epochs * 9 * 6000 float32, epoch-major then channel-major
//   labels           n_epochs u8 stage codes (only when has_labels = 1)
//
// The file must end exactly after the last declared byte.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "sleeper/types.hpp"

namespace sleeper::io {

inline constexpr char kEpochMagic[4] = {'P', 'S', 'G', 'B'};
inline constexpr std::uint16_t kEpochFormatVersion = 1;

namespace detail {

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(const void* data, std::size_t n) {
        const char* p = static_cast<const char*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    void str(const std::string& s) {
        if (s.size() > 0xFFFF) throw ShapeError("string too long for u16 length prefix");
        u16(static_cast<std::uint16_t>(s.size()));
        bytes(s.data(), s.size());
    }
    const std::string& data() const { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::string data) : buf_(std::move(data)) {}

    std::uint8_t u8() {
        need(1, "u8");
        return static_cast<std::uint8_t>(buf_[pos_++]);
    }
    std::uint16_t u16() {
        need(2, "u16");
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(raw(pos_ + i)) << (8 * i);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4, "u32");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(raw(pos_ + i)) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8, "u64");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(raw(pos_ + i)) << (8 * i);
        pos_ += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        std::uint16_t n = u16();
        need(n, "string");
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    void expect_magic(const char (&magic)[4]) {
        need(4, "magic");
        if (std::memcmp(buf_.data() + pos_, magic, 4) != 0) throw FormatError("bad magic", pos_);
        pos_ += 4;
    }
    void need(std::size_t n, const char* what) const {
        if (buf_.size() - pos_ < n)
            throw FormatError(std::string("truncated file while reading ") + what, pos_);
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return buf_.size() - pos_; }

private:
    std::uint8_t raw(std::size_t i) const { return static_cast<std::uint8_t>(buf_[i]); }
    std::string buf_;
    std::size_t pos_ = 0;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace detail

inline std::string encode_recording(const Recording& rec) {
    rec.validate();
    detail::ByteWriter w;
    w.bytes(kEpochMagic, 4);
    w.u16(kEpochFormatVersion);
    w.u32(static_cast<std::uint32_t>(rec.epochs.size()));
    w.u16(static_cast<std::uint16_t>(kNumChannels));
    w.u32(static_cast<std::uint32_t>(kSamplesPerEpoch));
    w.u8(rec.labels ? 1 : 0);
    w.str(rec.subject_id);
    for (const auto& ep : rec.epochs)
        for (float v : ep.samples()) w.f32(v);
    if (rec.labels)
        for (SleepStage s : *rec.labels) w.u8(static_cast<std::uint8_t>(stage_code(s)));
    return w.data();
}

inline Recording decode_recording(std::string bytes) {
    detail::ByteReader r(std::move(bytes));
    r.expect_magic(kEpochMagic);
    const std::size_t version_at = r.pos();
    if (std::uint16_t v = r.u16(); v != kEpochFormatVersion)
        throw FormatError("unsupported PSGB version " + std::to_string(v), version_at);
    const std::uint32_t n_epochs = r.u32();
    const std::size_t ch_at = r.pos();
    if (r.u16() != kNumChannels) throw FormatError("n_channels must be 9", ch_at);
    const std::size_t spe_at = r.pos();
    if (r.u32() != kSamplesPerEpoch) throw FormatError("samples_per_epoch must be 6000", spe_at);
    const std::size_t lab_at = r.pos();
    const std::uint8_t has_labels = r.u8();
    if (has_labels > 1) throw FormatError("has_labels must be 0 or 1", lab_at);

    Recording rec;
    rec.subject_id = r.str();

    const std::uint64_t payload = static_cast<std::uint64_t>(n_epochs) * kNumChannels * kSamplesPerEpoch * 4 +
                                  (has_labels ? n_epochs : 0);
    if (r.remaining() < payload)
        throw FormatError("payload shorter than declared by header (" + std::to_string(n_epochs) + " epochs)",
                          r.pos() + r.remaining());
    if (r.remaining() > payload) throw FormatError("trailing bytes after declared payload", r.pos() + payload);

    rec.epochs.reserve(n_epochs);
    for (std::uint32_t e = 0; e < n_epochs; ++e) {
        const std::size_t at = r.pos();
        std::vector<float> samples(kNumChannels * kSamplesPerEpoch);
        for (float& v : samples) v = r.f32();
        try {
            rec.epochs.emplace_back(std::move(samples), rec.subject_id, e);
        } catch (const ShapeError& err) {
            throw FormatError(std::string("invalid epoch payload: ") + err.what(), at);
        }
    }
    if (has_labels) {
        std::vector<SleepStage> labels;
        labels.reserve(n_epochs);
        for (std::uint32_t e = 0; e < n_epochs; ++e) {
            const std::size_t at = r.pos();
            const std::uint8_t code = r.u8();
            if (code >= kNumStages) throw FormatError("invalid stage code", at);
            labels.push_back(static_cast<SleepStage>(code));
        }
        rec.labels = std::move(labels);
    }
    return rec;
}

inline void write_recording(const Recording& rec, const std::filesystem::path& path) {
    detail::spit(path, encode_recording(rec));
}

inline Recording read_recording(const std::filesystem::path& path) {
    return decode_recording(detail::slurp(path));
}

// Labels CSV: header "epoch_index,stage_code", one row per epoch.
inline std::string labels_csv(const std::vector<SleepStage>& labels) {
    std::ostringstream os;
    os << "epoch_index,stage_code\n";
    for (std::size_t i = 0; i < labels.size(); ++i) os << i << ',' << stage_code(labels[i]) << '\n';
    return os.str();
}

inline void write_labels_csv(const std::vector<SleepStage>& labels, const std::filesystem::path& path) {
    detail::spit(path, labels_csv(labels));
}

inline std::vector<SleepStage> parse_labels_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<SleepStage> out;
    if (!std::getline(is, line) || line.rfind("epoch_index,stage_code", 0) != 0)
        throw FormatError("labels CSV must start with header epoch_index,stage_code", 0);
    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw FormatError("malformed labels CSV row " + std::to_string(row), row);
        const auto idx = std::stoul(line.substr(0, comma));
        if (idx != row) throw FormatError("labels CSV epoch_index not contiguous", row);
        out.push_back(stage_from_code(std::stoi(line.substr(comma + 1))));
        ++row;
    }
    return out;
}

// Lists *.psgb files in a directory, sorted by name.
inline std::vector<std::filesystem::path> list_recordings(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    if (std::filesystem::is_regular_file(dir)) return {dir};
    if (!std::filesystem::is_directory(dir)) throw Error("data path does not exist: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".psgb") out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace sleeper::io
