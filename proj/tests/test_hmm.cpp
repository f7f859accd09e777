#include <gtest/gtest.h>

#include <cmath>

#include "signflow/hmm.hpp"
#include "signflow/random.hpp"

using namespace signflow;

namespace {

// Sums the joint probability over all N^T state paths.
double brute_force_likelihood(const DiscreteHMM& h, const std::vector<Symbol>& obs) {
    const std::size_t n = h.n_states(), T = obs.size();
    std::vector<std::size_t> path(T, 0);
    double total = 0.0;
    while (true) {
        double p = h.pi[path[0]] * h.B(path[0], obs[0]);
        for (std::size_t t = 1; t < T && p > 0; ++t)
            p *= h.A(path[t - 1], path[t]) * h.B(path[t], obs[t]);
        total += p;
        std::size_t t = 0;
        while (t < T && ++path[t] == n)
            path[t++] = 0;
        if (t == T)
            break;
    }
    return total;
}

Vector random_simplex(Rng& rng, std::size_t n) {
    Vector v(n);
    double s = 0;
    for (auto& x : v)
        s += (x = rng.uniform() + 1e-3);
    for (auto& x : v)
        x /= s;
    return v;
}

DiscreteHMM random_hmm(Rng& rng, std::size_t n, std::size_t k) {
    DiscreteHMM h;
    h.pi = random_simplex(rng, n);
    h.A = Matrix(n, n);
    h.B = Matrix(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = random_simplex(rng, n), b = random_simplex(rng, k);
        for (std::size_t j = 0; j < n; ++j)
            h.A(i, j) = a[j];
        for (std::size_t s = 0; s < k; ++s)
            h.B(i, s) = b[s];
    }
    return h;
}

std::vector<Symbol> random_obs(Rng& rng, std::size_t T, std::size_t k) {
    std::vector<Symbol> o(T);
    for (auto& s : o)
        s = static_cast<Symbol>(rng.index(k));
    return o;
}

void expect_stochastic(const DiscreteHMM& h) {
    double s = 0;
    for (double v : h.pi) {
        EXPECT_GE(v, 0.0);
        s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
    for (std::size_t i = 0; i < h.n_states(); ++i) {
        double a = 0, b = 0;
        for (std::size_t j = 0; j < h.n_states(); ++j)
            a += h.A(i, j);
        for (std::size_t j = 0; j < h.n_symbols(); ++j)
            b += h.B(i, j);
        EXPECT_NEAR(a, 1.0, 1e-9);
        EXPECT_NEAR(b, 1.0, 1e-9);
    }
}

} // namespace

TEST(HmmInit, LeftRightStructure) {
    const auto h = init_left_right(3, 4);
    EXPECT_EQ(h.pi, (Vector{1, 0, 0}));
    EXPECT_EQ(h.A, Matrix::from_rows({{0.5, 0.5, 0}, {0, 0.5, 0.5}, {0, 0, 1}}));
    for (double v : h.B.data())
        EXPECT_EQ(v, 0.25);
    const auto one = init_left_right(1, 2);
    EXPECT_EQ(one.A(0, 0), 1.0);
    EXPECT_THROW(init_left_right(0, 2), Error);
}

TEST(HmmForward, UniformEmissionExample) {
    const auto h = init_left_right(2, 2);
    EXPECT_NEAR(forward_log_likelihood(h, std::vector<Symbol>{0, 1, 0}), std::log(0.125), 1e-12);
}

TEST(HmmForward, ImpossibleSequenceIsNegInf) {
    auto h = init_left_right(2, 2);
    h.B = Matrix::from_rows({{1, 0}, {1, 0}});
    EXPECT_EQ(forward_log_likelihood(h, std::vector<Symbol>{0, 1}), kNegInf);
}

TEST(HmmForward, MatchesPathEnumeration) {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.index(4), k = 1 + rng.index(5), T = 1 + rng.index(6);
        const auto h = random_hmm(rng, n, k);
        const auto obs = random_obs(rng, T, k);
        const double oracle = std::log(brute_force_likelihood(h, obs));
        EXPECT_NEAR(forward_log_likelihood(h, obs), oracle, 1e-9 * std::abs(oracle) + 1e-12);
    }
}

TEST(HmmForward, LongSequencesStayFinite) {
    Rng rng(32);
    const auto h = init_left_right(8, 100);
    const auto obs = random_obs(rng, 5000, 100);
    const double ll = forward_log_likelihood(h, obs);
    EXPECT_TRUE(std::isfinite(ll));
    EXPECT_NEAR(ll, 5000 * std::log(0.01), 1e-6);
}

TEST(HmmForward, RejectsBadSymbols) {
    const auto h = init_left_right(2, 3);
    try {
        forward_log_likelihood(h, std::vector<Symbol>{0, 3});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SymbolOutOfRange);
    }
    EXPECT_THROW(forward_log_likelihood(h, std::vector<Symbol>{}), Error);
}

TEST(BaumWelch, ConstantSymbolConcentratesEmission) {
    const auto h = init_left_right(2, 2);
    std::vector<SymbolSequence> train(3, SymbolSequence{{0, 0, 0, 0, 0}, ""});
    const auto r = baum_welch(h, train, {50, 1e-10});
    for (std::size_t i = 0; i < 2; ++i)
        EXPECT_NEAR(r.model.B(i, 0), 1.0 - kProbabilityFloor, 1e-9);
    EXPECT_NEAR(forward_log_likelihood(r.model, train[0]), 5 * std::log(1 - kProbabilityFloor), 1e-6);
}

TEST(BaumWelch, ZeroIterationsReturnsInput) {
    const auto h = init_left_right(3, 4);
    std::vector<SymbolSequence> train{{{0, 1, 2, 3}, ""}};
    const auto r = baum_welch(h, train, {0});
    EXPECT_EQ(r.model, h);
    EXPECT_TRUE(r.report.log_likelihood.empty());
}

TEST(BaumWelch, MonotoneStochasticAndStructural) {
    Rng rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.index(6), k = 2 + rng.index(10);
        const auto h = init_left_right(n, k);
        std::vector<SymbolSequence> train;
        for (int s = 0; s < 5; ++s)
            train.push_back({random_obs(rng, n + rng.index(30), k), ""});
        const auto r = baum_welch(h, train, {30, 0.0});
        const auto& ll = r.report.log_likelihood;
        ASSERT_FALSE(ll.empty());
        for (std::size_t i = 1; i < ll.size(); ++i)
            EXPECT_GE(ll[i], ll[i - 1] - 1e-8);
        expect_stochastic(r.model);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (h.A(i, j) == 0.0)
                    EXPECT_EQ(r.model.A(i, j), 0.0);
                else
                    EXPECT_GE(r.model.A(i, j), kProbabilityFloor * 0.5);
        for (double b : r.model.B.data())
            EXPECT_GT(b, 0.0);
    }
}

TEST(BaumWelch, ObserverSeesEveryAcceptedStep) {
    const auto h = init_left_right(3, 3);
    std::vector<SymbolSequence> train{{{0, 0, 1, 1, 2, 2}, ""}, {{0, 1, 1, 2}, ""}};
    std::vector<double> seen;
    const auto r = baum_welch(h, train, {20, 0.0}, [&](std::size_t, const DiscreteHMM&, double ll) {
        seen.push_back(ll);
    });
    ASSERT_EQ(seen.size() + 1, r.report.log_likelihood.size());
    for (std::size_t i = 0; i < seen.size(); ++i)
        EXPECT_EQ(seen[i], r.report.log_likelihood[i + 1]);
}

TEST(BaumWelch, RecoversLeftRightGenerator) {
    // Two states, symbol 0 then symbol 1, staying in state 0 for about half of each sequence.
    Rng rng(34);
    std::vector<SymbolSequence> train;
    for (int s = 0; s < 60; ++s) {
        std::vector<Symbol> obs;
        std::size_t state = 0;
        for (int t = 0; t < 20; ++t) {
            obs.push_back(static_cast<Symbol>(rng.uniform() < 0.9 ? state : 1 - state));
            if (state == 0 && rng.uniform() < 0.1)
                state = 1;
        }
        train.push_back({obs, ""});
    }
    const auto r = baum_welch(init_left_right(2, 2), train, {200, 1e-9});
    EXPECT_NEAR(r.model.B(0, 0), 0.9, 0.05);
    EXPECT_NEAR(r.model.B(1, 1), 0.9, 0.05);
    EXPECT_NEAR(r.model.A(0, 1), 0.1, 0.05);
}

TEST(ClassifyGesture, LengthNormalizedAndTieBreak) {
    const auto a = init_left_right(2, 4);
    const auto b = init_left_right(3, 4);
    const std::vector<DiscreteHMM> models{a, b};
    const std::vector<Symbol> obs{0, 1, 2, 3};
    const auto r = classify_gesture(models, obs);
    EXPECT_NEAR(r.scores[0], std::log(0.25), 1e-12);
    EXPECT_EQ(r.scores[0], r.scores[1]);
    EXPECT_EQ(r.best, 0u);
}

TEST(ClassifyGesture, PicksMatchingModel) {
    auto a = init_left_right(1, 2);
    auto b = init_left_right(1, 2);
    a.B = Matrix::from_rows({{0.9, 0.1}});
    b.B = Matrix::from_rows({{0.1, 0.9}});
    const std::vector<DiscreteHMM> models{a, b};
    EXPECT_EQ(classify_gesture(models, std::vector<Symbol>{1, 1, 0}).best, 1u);
    EXPECT_EQ(classify_gesture(models, std::vector<Symbol>{0, 0}).best, 0u);
    auto c = b;
    c.B = Matrix::from_rows({{1.0, 0.0}});
    const std::vector<DiscreteHMM> with_impossible{c, a};
    const auto r = classify_gesture(with_impossible, std::vector<Symbol>{1});
    EXPECT_EQ(r.scores[0], kNegInf);
    EXPECT_EQ(r.best, 1u);
}
