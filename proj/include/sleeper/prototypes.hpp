#pragma once

// Rule prototypes in embedding space and the cosine-similarity features
// derived from them.

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "sleeper/io.hpp"
#include "sleeper/matrix.hpp"
#include "sleeper/parallel.hpp"
#include "sleeper/types.hpp"

namespace sleeper {

inline constexpr double kNormEpsilon = 1e-12;

// D x K prototype matrix; column j belongs to rule_ids[j].
struct PrototypeMatrix {
    Matrix P;
    std::vector<std::size_t> rule_ids;

    std::size_t dim() const { return P.rows; }
    std::size_t n_prototypes() const { return P.cols; }

    std::vector<double> column_norms() const {
        std::vector<double> norms(P.cols, 0.0);
        for (std::size_t d = 0; d < P.rows; ++d) {
            auto row = P.row(d);
            for (std::size_t j = 0; j < P.cols; ++j) norms[j] += row[j] * row[j];
        }
        for (auto& v : norms) v = std::sqrt(v);
        return norms;
    }
};

// Divides each column of H by its L2 norm over the rows; (near-)zero columns
// stay zero.
inline Matrix column_normalize(const Matrix& H) {
    std::vector<double> norms(H.cols, 0.0);
    for (std::size_t i = 0; i < H.rows; ++i) {
        auto row = H.row(i);
        for (std::size_t d = 0; d < H.cols; ++d) norms[d] += row[d] * row[d];
    }
    for (auto& v : norms) v = std::sqrt(v);
    Matrix out(H.rows, H.cols);
    for (std::size_t i = 0; i < H.rows; ++i) {
        auto src = H.row(i);
        auto dst = out.row(i);
        for (std::size_t d = 0; d < H.cols; ++d) dst[d] = norms[d] > kNormEpsilon ? src[d] / norms[d] : 0.0;
    }
    return out;
}

// P = H'^T R, with R binary (N x K). Column j sums the normalized rows of
// the epochs that satisfy rule j.
inline PrototypeMatrix build_prototypes(const Matrix& H_norm, const Matrix& R, std::vector<std::size_t> rule_ids = {},
                                        int jobs = 1) {
    if (H_norm.rows != R.rows)
        throw ShapeError("embedding rows (" + std::to_string(H_norm.rows) + ") != assignment rows (" +
                         std::to_string(R.rows) + ")");
    if (rule_ids.empty()) {
        rule_ids.resize(R.cols);
        for (std::size_t j = 0; j < R.cols; ++j) rule_ids[j] = j;
    }
    if (rule_ids.size() != R.cols) throw ShapeError("rule id list must match assignment columns");
    for (double v : R.data)
        if (v != 0.0 && v != 1.0) throw ShapeError("assignment matrix must be binary");

    const std::size_t D = H_norm.cols, K = R.cols;
    // Accumulate per rule in a fixed epoch order so results do not depend on
    // the thread count.
    std::vector<std::vector<double>> cols(K, std::vector<double>(D, 0.0));
    parallel_for(K, jobs, [&](std::size_t j) {
        auto& acc = cols[j];
        for (std::size_t i = 0; i < R.rows; ++i) {
            if (R(i, j) == 0.0) continue;
            auto h = H_norm.row(i);
            for (std::size_t d = 0; d < D; ++d) acc[d] += h[d];
        }
    });
    PrototypeMatrix out{Matrix(D, K), std::move(rule_ids)};
    for (std::size_t j = 0; j < K; ++j)
        for (std::size_t d = 0; d < D; ++d) out.P(d, j) = cols[j][d];
    return out;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("cosine of vectors with different lengths");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// N x K cosine similarities between raw embedding rows and prototype columns.
inline Matrix similarity(const Matrix& H, const PrototypeMatrix& protos, int jobs = 1) {
    const Matrix& P = protos.P;
    if (H.cols != P.rows)
        throw ShapeError("embedding width " + std::to_string(H.cols) + " != prototype dimension " +
                         std::to_string(P.rows));
    // Transpose once so every prototype is a contiguous vector.
    const std::size_t D = P.rows, K = P.cols;
    std::vector<double> Pt(K * D);
    for (std::size_t d = 0; d < D; ++d)
        for (std::size_t j = 0; j < K; ++j) Pt[j * D + d] = P(d, j);
    std::vector<double> pnorm(K, 0.0);
    for (std::size_t j = 0; j < K; ++j) {
        double s = 0.0;
        for (std::size_t d = 0; d < D; ++d) s += Pt[j * D + d] * Pt[j * D + d];
        pnorm[j] = std::sqrt(s);
    }

    Matrix C(H.rows, K);
    parallel_for(H.rows, jobs, [&](std::size_t i) {
        auto h = H.row(i);
        double hn = 0.0;
        for (double v : h) hn += v * v;
        hn = std::sqrt(hn);
        auto out = C.row(i);
        for (std::size_t j = 0; j < K; ++j) {
            if (hn <= 0.0 || pnorm[j] <= 0.0) {
                out[j] = 0.0;
                continue;
            }
            const double* p = Pt.data() + j * D;
            double dot = 0.0;
            for (std::size_t d = 0; d < D; ++d) dot += h[d] * p[d];
            out[j] = dot / (hn * pnorm[j]);
        }
    });
    return C;
}

// ---------------------------------------------------------------------------
// Prototype store: "SLPR" v1, u32 D, u32 K, K x u32 rule ids, then D*K
// float64 values row-major.
// ---------------------------------------------------------------------------

inline constexpr char kPrototypeMagic[4] = {'S', 'L', 'P', 'R'};
inline constexpr std::uint16_t kPrototypeVersion = 1;

inline std::string encode_prototypes(const PrototypeMatrix& p) {
    io::detail::ByteWriter w;
    w.bytes(kPrototypeMagic, 4);
    w.u16(kPrototypeVersion);
    w.u32(static_cast<std::uint32_t>(p.P.rows));
    w.u32(static_cast<std::uint32_t>(p.P.cols));
    for (auto id : p.rule_ids) w.u32(static_cast<std::uint32_t>(id));
    for (double v : p.P.data) w.f64(v);
    return w.data();
}

inline PrototypeMatrix decode_prototypes(std::string bytes) {
    io::detail::ByteReader r(std::move(bytes));
    r.expect_magic(kPrototypeMagic);
    const auto at = r.pos();
    if (r.u16() != kPrototypeVersion) throw FormatError("unsupported prototype store version", at);
    const std::uint32_t D = r.u32(), K = r.u32();
    PrototypeMatrix p{Matrix(D, K), std::vector<std::size_t>(K)};
    for (auto& id : p.rule_ids) id = r.u32();
    r.need(static_cast<std::size_t>(D) * K * 8, "prototype values");
    for (auto& v : p.P.data) v = r.f64();
    if (r.remaining() != 0) throw FormatError("trailing bytes after prototype store", r.pos());
    return p;
}

inline void save_prototypes(const PrototypeMatrix& p, const std::filesystem::path& path) {
    io::detail::spit(path, encode_prototypes(p));
}

inline PrototypeMatrix load_prototypes(const std::filesystem::path& path) {
    return decode_prototypes(io::detail::slurp(path));
}

// CSV with one row per epoch: leading id columns then one column per rule.
inline std::string similarity_csv(const Matrix& C, std::span<const std::size_t> rule_ids,
                                  const std::vector<std::string>& row_labels = {}) {
    std::ostringstream os;
    os.precision(9);
    os << "row";
    for (auto id : rule_ids) os << ",rule_" << id;
    os << '\n';
    for (std::size_t i = 0; i < C.rows; ++i) {
        os << (i < row_labels.size() ? row_labels[i] : std::to_string(i));
        for (double v : C.row(i)) os << ',' << v;
        os << '\n';
    }
    return os.str();
}

}  // namespace sleeper
