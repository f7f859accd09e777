#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "signflow/codebook.hpp"
#include "signflow/error.hpp"
#include "signflow/matrix.hpp"

namespace signflow {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kProbabilityFloor = 1e-6;
inline constexpr std::size_t kDefaultStates = 8;

/// Discrete-observation HMM. For the left-right models built here A is
/// upper-bidiagonal and pi puts all mass on state 0.
struct DiscreteHMM {
    Vector pi;
    Matrix A;
    Matrix B;

    std::size_t n_states() const noexcept { return pi.size(); }
    std::size_t n_symbols() const noexcept { return B.cols(); }

    bool operator==(const DiscreteHMM&) const = default;
};

inline DiscreteHMM init_left_right(std::size_t n_states, std::size_t n_symbols) {
    detail::require(n_states >= 1 && n_symbols >= 1, ErrorCode::InvalidArgument,
                    "HMM needs at least one state and one symbol");
    DiscreteHMM hmm;
    hmm.pi.assign(n_states, 0.0);
    hmm.pi[0] = 1.0;
    hmm.A = Matrix(n_states, n_states);
    for (std::size_t i = 0; i + 1 < n_states; ++i) {
        hmm.A(i, i) = 0.5;
        hmm.A(i, i + 1) = 0.5;
    }
    hmm.A(n_states - 1, n_states - 1) = 1.0;
    hmm.B = Matrix(n_states, n_symbols, 1.0 / static_cast<double>(n_symbols));
    return hmm;
}

namespace detail {

inline void check_symbols(const DiscreteHMM& hmm, std::span<const Symbol> obs) {
    require(!obs.empty(), ErrorCode::EmptyInput, "observation sequence is empty");
    for (Symbol s : obs)
        require(s < hmm.n_symbols(), ErrorCode::SymbolOutOfRange,
                "symbol " + std::to_string(s) + " outside [0, " + std::to_string(hmm.n_symbols()) + ")");
}

// Scaled forward pass. alpha(t, i) holds the normalized forward variable and
// scale[t] the per-step normalizer. Returns false when some prefix has zero
// probability.
inline bool scaled_forward(const DiscreteHMM& hmm, std::span<const Symbol> obs, Matrix& alpha, Vector& scale) {
    const std::size_t n = hmm.n_states();
    const std::size_t T = obs.size();
    alpha = Matrix(T, n);
    scale.assign(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double a;
            if (t == 0) {
                a = hmm.pi[j];
            } else {
                a = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    a += alpha(t - 1, i) * hmm.A(i, j);
            }
            a *= hmm.B(j, obs[t]);
            alpha(t, j) = a;
            sum += a;
        }
        if (!(sum > 0.0))
            return false;
        scale[t] = sum;
        for (std::size_t j = 0; j < n; ++j)
            alpha(t, j) /= sum;
    }
    return true;
}

} // namespace detail

/// log P(obs | hmm), or -infinity when the sequence is impossible.
inline double forward_log_likelihood(const DiscreteHMM& hmm, std::span<const Symbol> obs) {
    detail::check_symbols(hmm, obs);
    Matrix alpha;
    Vector scale;
    if (!detail::scaled_forward(hmm, obs, alpha, scale))
        return kNegInf;
    double ll = 0.0;
    for (double c : scale)
        ll += std::log(c);
    return ll;
}

inline double forward_log_likelihood(const DiscreteHMM& hmm, const SymbolSequence& obs) {
    return forward_log_likelihood(hmm, std::span<const Symbol>(obs.symbols));
}

struct BaumWelchOptions {
    std::size_t max_iter = 50;
    double tol = 1e-4;
    double floor = kProbabilityFloor;
};

struct TrainReport {
    /// Total training log-likelihood of the initial model followed by each
    /// accepted re-estimation.
    std::vector<double> log_likelihood;
    std::size_t iterations = 0;
    bool converged = false;
};

struct BaumWelchResult {
    DiscreteHMM model;
    TrainReport report;
};

/// Called after every accepted re-estimation with (iteration, model, total log-likelihood).
using BaumWelchObserver = std::function<void(std::size_t, const DiscreteHMM&, double)>;

namespace detail {

struct ExpectedCounts {
    Vector pi;
    Matrix trans;
    Vector trans_from;
    Matrix emit;
    Vector emit_from;
    double log_likelihood = 0.0;
};

inline ExpectedCounts expected_counts(const DiscreteHMM& hmm, std::span<const SymbolSequence> training) {
    const std::size_t n = hmm.n_states();
    const std::size_t k = hmm.n_symbols();
    ExpectedCounts acc{Vector(n, 0.0), Matrix(n, n), Vector(n, 0.0), Matrix(n, k), Vector(n, 0.0), 0.0};
    Matrix alpha;
    Vector scale;
    for (const auto& seq : training) {
        std::span<const Symbol> obs(seq.symbols);
        const std::size_t T = obs.size();
        if (!scaled_forward(hmm, obs, alpha, scale)) {
            acc.log_likelihood = kNegInf;
            continue;
        }
        for (double c : scale)
            acc.log_likelihood += std::log(c);

        Matrix beta(T, n, 1.0);
        for (std::size_t t = T - 1; t-- > 0;) {
            for (std::size_t i = 0; i < n; ++i) {
                double b = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    b += hmm.A(i, j) * hmm.B(j, obs[t + 1]) * beta(t + 1, j);
                beta(t, i) = b / scale[t + 1];
            }
        }

        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t i = 0; i < n; ++i) {
                const double gamma = alpha(t, i) * beta(t, i);
                if (t == 0)
                    acc.pi[i] += gamma;
                acc.emit(i, obs[t]) += gamma;
                acc.emit_from[i] += gamma;
                if (t + 1 < T) {
                    acc.trans_from[i] += gamma;
                    for (std::size_t j = 0; j < n; ++j)
                        acc.trans(i, j) +=
                            alpha(t, i) * hmm.A(i, j) * hmm.B(j, obs[t + 1]) * beta(t + 1, j) / scale[t + 1];
                }
            }
        }
    }
    return acc;
}

// Floors every entry allowed by `mask` and renormalizes over those entries.
inline void floor_and_normalize(std::span<double> row, std::span<const unsigned char> mask, double floor) {
    double sum = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        row[j] = mask[j] ? std::max(row[j], floor) : 0.0;
        sum += row[j];
    }
    if (sum > 0.0)
        for (double& v : row)
            v /= sum;
}

} // namespace detail

/// Multi-sequence Baum-Welch. Zeros of the input pi and A are structural and
/// stay zero; every other probability is floored at `options.floor` after each
/// M-step. A re-estimate that lowers the training likelihood is rejected and
/// training stops, so the reported trajectory is non-decreasing.
inline BaumWelchResult baum_welch(const DiscreteHMM& hmm, std::span<const SymbolSequence> training,
                                  const BaumWelchOptions& options = {},
                                  const BaumWelchObserver& observer = {}) {
    detail::require(!training.empty(), ErrorCode::EmptyInput, "Baum-Welch needs at least one training sequence");
    for (const auto& seq : training)
        detail::check_symbols(hmm, seq.symbols);

    BaumWelchResult result{hmm, {}};
    if (options.max_iter == 0)
        return result;

    const std::size_t n = hmm.n_states();
    const std::size_t k = hmm.n_symbols();
    std::vector<unsigned char> pi_mask(n), a_mask(n * n), b_mask(k, 1);
    for (std::size_t i = 0; i < n; ++i) {
        pi_mask[i] = hmm.pi[i] > 0.0;
        for (std::size_t j = 0; j < n; ++j)
            a_mask[i * n + j] = hmm.A(i, j) > 0.0;
    }

    auto stats = detail::expected_counts(result.model, training);
    double ll = stats.log_likelihood;
    result.report.log_likelihood.push_back(ll);

    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        DiscreteHMM next = result.model;
        double pi_total = 0.0;
        for (double v : stats.pi)
            pi_total += v;
        if (pi_total > 0.0)
            for (std::size_t i = 0; i < n; ++i)
                next.pi[i] = stats.pi[i] / pi_total;
        detail::floor_and_normalize(next.pi, pi_mask, options.floor);

        for (std::size_t i = 0; i < n; ++i) {
            if (stats.trans_from[i] > 0.0)
                for (std::size_t j = 0; j < n; ++j)
                    next.A(i, j) = stats.trans(i, j) / stats.trans_from[i];
            detail::floor_and_normalize(next.A.row(i), std::span<const unsigned char>(a_mask.data() + i * n, n),
                                        options.floor);
            if (stats.emit_from[i] > 0.0)
                for (std::size_t s = 0; s < k; ++s)
                    next.B(i, s) = stats.emit(i, s) / stats.emit_from[i];
            detail::floor_and_normalize(next.B.row(i), b_mask, options.floor);
        }

        auto next_stats = detail::expected_counts(next, training);
        const double next_ll = next_stats.log_likelihood;
        if (next_ll < ll) {
            result.report.converged = true;
            break;
        }
        result.model = std::move(next);
        stats = std::move(next_stats);
        result.report.log_likelihood.push_back(next_ll);
        result.report.iterations = it;
        if (observer)
            observer(it, result.model, next_ll);
        const bool small_gain = next_ll - ll < options.tol;
        ll = next_ll;
        if (small_gain) {
            result.report.converged = true;
            break;
        }
    }
    return result;
}

struct GestureResponse {
    /// Length-normalized log-likelihood per class; -infinity marks an
    /// impossible sequence.
    Vector scores;
    std::size_t best = 0;
};

/// Scores `obs` under every class model, normalized by sequence length;
/// ties resolve to the lowest class id.
inline GestureResponse classify_gesture(std::span<const DiscreteHMM> models, std::span<const Symbol> obs) {
    detail::require(!models.empty(), ErrorCode::EmptyInput, "no class models");
    for (const auto& m : models)
        detail::require(m.n_symbols() == models.front().n_symbols(), ErrorCode::DimensionMismatch,
                        "class models disagree on symbol count");
    GestureResponse response;
    response.scores.reserve(models.size());
    for (const auto& m : models)
        response.scores.push_back(forward_log_likelihood(m, obs) / static_cast<double>(obs.size()));
    response.best = argmax(response.scores);
    return response;
}

inline GestureResponse classify_gesture(std::span<const DiscreteHMM> models, const SymbolSequence& obs) {
    return classify_gesture(models, std::span<const Symbol>(obs.symbols));
}

} // namespace signflow
