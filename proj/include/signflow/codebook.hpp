#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "signflow/descriptors.hpp"
#include "signflow/error.hpp"
#include "signflow/matrix.hpp"
#include "signflow/random.hpp"

namespace signflow {

using Symbol = std::uint32_t;

struct SymbolSequence {
    std::vector<Symbol> symbols;
    std::string source;

    std::size_t size() const noexcept { return symbols.size(); }
};

struct KMeansResult {
    Matrix centers;
    std::vector<std::size_t> assignment;
    /// Within-cluster sum of squares after each Lloyd update.
    std::vector<double> wcss;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Nearest row of `centers` under Euclidean distance, ties to the lowest index.
inline std::size_t nearest_center(const Matrix& centers, std::span<const double> x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centers.rows(); ++j) {
        const double d = squared_distance(centers.row(j), x);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

namespace detail {

inline Matrix kmeanspp_seed(std::span<const Vector> data, std::size_t k, Rng& rng) {
    const std::size_t n = data.size();
    const std::size_t dim = data.front().size();
    Matrix centers(k, dim);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());

    auto place = [&](std::size_t j, std::size_t idx) {
        for (std::size_t c = 0; c < dim; ++c)
            centers(j, c) = data[idx][c];
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], squared_distance(data[i], centers.row(j)));
    };

    place(0, rng.index(n));
    for (std::size_t j = 1; j < k; ++j) {
        double total = 0.0;
        for (double v : d2)
            total += v;
        std::size_t pick = n - 1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.index(n);
        }
        place(j, pick);
    }
    return centers;
}

} // namespace detail

/// Lloyd's algorithm from k-means++ seeding. Empty clusters are refilled with
/// the point farthest from its current center, so exactly k centers survive.
inline KMeansResult fit_kmeans(std::span<const Vector> data, std::size_t k, std::uint64_t seed,
                               std::size_t max_iter) {
    detail::require(!data.empty(), ErrorCode::EmptyInput, "k-means needs at least one point");
    detail::require(k >= 1, ErrorCode::InvalidArgument, "k must be at least 1");
    const std::size_t n = data.size();
    const std::size_t dim = data.front().size();
    for (const auto& x : data) {
        detail::require(x.size() == dim, ErrorCode::DimensionMismatch, "k-means input has mixed dimensions");
        for (double v : x)
            detail::require(std::isfinite(v), ErrorCode::InvalidArgument, "k-means input is not finite");
    }

    Rng rng(seed);
    KMeansResult result;
    result.centers = detail::kmeanspp_seed(data, k, rng);
    result.assignment.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        result.assignment[i] = nearest_center(result.centers, data[i]);

    std::vector<std::size_t> counts(k);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        if (iter > 0) {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t a = nearest_center(result.centers, data[i]);
                changed |= (a != result.assignment[i]);
                result.assignment[i] = a;
            }
            if (!changed) {
                result.converged = true;
                break;
            }
        }

        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t a : result.assignment)
            ++counts[a];
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] > 0)
                continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t a = result.assignment[i];
                if (counts[a] < 2)
                    continue;
                const double d = squared_distance(result.centers.row(a), data[i]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far == n)
                continue; // fewer points than clusters: keep the seeded center
            --counts[result.assignment[far]];
            result.assignment[far] = j;
            counts[j] = 1;
        }

        Matrix sums(k, dim);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = sums.row(result.assignment[i]);
            for (std::size_t c = 0; c < dim; ++c)
                row[c] += data[i][c];
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] == 0)
                continue;
            for (std::size_t c = 0; c < dim; ++c)
                result.centers(j, c) = sums(j, c) / static_cast<double>(counts[j]);
        }

        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            wcss += squared_distance(result.centers.row(result.assignment[i]), data[i]);
        result.wcss.push_back(wcss);
        result.iterations = iter + 1;
    }
    return result;
}

inline constexpr std::size_t kDefaultCodebookSize = 100;

/// K-center vocabulary over z-normalized descriptors. `variant` is empty for
/// the posture (shape-context) vocabulary.
struct Codebook {
    Matrix centers;
    ZNormStats znorm;
    std::uint64_t seed = 0;
    std::optional<DescriptorVariant> variant;

    std::size_t k() const noexcept { return centers.rows(); }
    std::size_t dim() const noexcept { return centers.cols(); }
};

/// Fits z-normalization (or identity when `normalize` is false) and k-means.
/// When `max_samples` is non-zero and smaller than the input, k-means runs on
/// a seeded random subset of that size.
inline Codebook fit_codebook(std::span<const Vector> data, std::size_t k, std::uint64_t seed, std::size_t max_iter,
                             std::optional<DescriptorVariant> variant, bool normalize = true,
                             std::size_t max_samples = 0) {
    detail::require(!data.empty(), ErrorCode::EmptyInput, "codebook needs training data");
    Codebook cb;
    cb.seed = seed;
    cb.variant = variant;
    cb.znorm = (normalize && data.size() >= 2) ? fit_znorm(data) : ZNormStats::identity(data.front().size());

    std::vector<Vector> normalized;
    if (max_samples != 0 && data.size() > max_samples) {
        std::vector<std::size_t> idx(data.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            idx[i] = i;
        Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
        rng.shuffle(idx);
        idx.resize(max_samples);
        std::sort(idx.begin(), idx.end());
        normalized.reserve(max_samples);
        for (std::size_t i : idx)
            normalized.push_back(apply_znorm(cb.znorm, data[i]));
    } else {
        normalized.reserve(data.size());
        for (const auto& x : data)
            normalized.push_back(apply_znorm(cb.znorm, x));
    }
    cb.centers = fit_kmeans(normalized, k, seed, max_iter).centers;
    return cb;
}

inline Codebook fit_codebook(std::span<const FrameDescriptor> descriptors, std::size_t k, std::uint64_t seed,
                             std::size_t max_iter) {
    detail::require(!descriptors.empty(), ErrorCode::EmptyInput, "codebook needs training descriptors");
    std::vector<Vector> rows;
    rows.reserve(descriptors.size());
    for (const auto& d : descriptors)
        rows.push_back(d.values);
    return fit_codebook(rows, k, seed, max_iter, descriptors.front().variant);
}

/// Nearest center after applying the codebook's z-normalization.
inline Symbol quantize(const Codebook& cb, std::span<const double> d) {
    detail::require(d.size() == cb.dim(), ErrorCode::DimensionMismatch,
                    "probe dimension " + std::to_string(d.size()) + " vs codebook dimension " +
                        std::to_string(cb.dim()));
    const Vector z = apply_znorm(cb.znorm, d);
    return static_cast<Symbol>(nearest_center(cb.centers, z));
}

inline SymbolSequence encode_sequence(const Codebook& cb, std::span<const FrameDescriptor> descriptors,
                                      std::string source = {}) {
    detail::require(!descriptors.empty(), ErrorCode::EmptyInput, "EmptyInput: no descriptors to encode");
    SymbolSequence out;
    out.source = std::move(source);
    out.symbols.reserve(descriptors.size());
    for (const auto& d : descriptors) {
        if (cb.variant && d.variant != *cb.variant)
            throw Error(ErrorCode::InvalidArgument, "descriptor variant " + std::string(to_string(d.variant)) +
                                                        " does not match codebook variant " +
                                                        std::string(to_string(*cb.variant)));
        out.symbols.push_back(quantize(cb, d.values));
    }
    return out;
}

} // namespace signflow
