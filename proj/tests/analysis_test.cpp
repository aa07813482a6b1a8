#include "laser/analysis.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace laser {
namespace {

// Independent oracle: sort a copy and interpolate between closest ranks.
double q3_oracle(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double pos = 0.75 * (static_cast<double>(v.size()) - 1.0);
    const std::size_t i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= v.size()) return v[i];
    return v[i] * (1.0 - (pos - i)) + v[i + 1] * (pos - i);
}

TEST(EstimateThreshold, FourSampleInterpolation) {
    const auto stats = estimate_threshold({1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(stats.t_q3, 3.25);
    EXPECT_DOUBLE_EQ(stats.t_min, 1);
    EXPECT_DOUBLE_EQ(stats.t_max, 4);
    EXPECT_DOUBLE_EQ(stats.t_avg, 2.5);
    EXPECT_EQ(stats.sample_count, 4u);
}

TEST(EstimateThreshold, ConstantSamples) {
    const auto stats = estimate_threshold({7, 7, 7, 7, 7});
    EXPECT_DOUBLE_EQ(stats.t_min, 7);
    EXPECT_DOUBLE_EQ(stats.t_max, 7);
    EXPECT_DOUBLE_EQ(stats.t_avg, 7);
    EXPECT_DOUBLE_EQ(stats.t_q3, 7);
}

TEST(EstimateThreshold, RejectsTinyDatasets) {
    EXPECT_THROW(estimate_threshold({1, 2, 3}), std::invalid_argument);
    EXPECT_THROW(estimate_threshold({}), std::invalid_argument);
}

TEST(EstimateThreshold, AgreesWithOracleOnRandomDatasets) {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> value(0.0, 500.0);
    for (int iter = 0; iter < 1000; ++iter) {
        const std::size_t n = 4 + rng() % 200;
        std::vector<double> samples(n);
        for (auto& s : samples) s = value(rng);
        const auto stats = estimate_threshold(samples);
        EXPECT_DOUBLE_EQ(stats.t_q3, q3_oracle(samples));
        EXPECT_LE(stats.t_min, stats.t_avg);
        EXPECT_LE(stats.t_avg, stats.t_max);
        EXPECT_LE(stats.t_min, stats.t_q3);
        EXPECT_LE(stats.t_q3, stats.t_max);
    }
}

TEST(EstimateThreshold, ModelSamplesRecoverQ3) {
    std::mt19937_64 rng(102);
    const LatencyModel model{55, 79, 136};
    std::vector<double> samples(1000);
    for (auto& s : samples) s = sample_latency(model, rng);
    const auto stats = estimate_threshold(samples);
    EXPECT_NEAR(stats.t_q3, 79.0, 2.0);
}

// ── success_rate_experiment ──────────────────────────────────────────────────

TEST(SuccessRate, UnconstrainedThresholdAlwaysSucceeds) {
    const LatencyModel model{55, 79, 136};
    const auto rates = success_rate_experiment(model.max_ms, model, 2000, 1, 7);
    EXPECT_DOUBLE_EQ(rates.per_message, 1.0);
    EXPECT_DOUBLE_EQ(rates.per_press, 1.0);
}

TEST(SuccessRate, Q3ThresholdGivesThreeQuarters) {
    const LatencyModel model{55, 79, 136};
    const auto rates = success_rate_experiment(79, model, 10000, 1, 8);
    EXPECT_NEAR(rates.per_message, 0.75, 0.03);
}

TEST(SuccessRate, SixMessagesPerPressNearlyAlwaysSucceed) {
    const LatencyModel model{55, 79, 136};
    const auto rates = success_rate_experiment(79, model, 10000, 6, 9);
    EXPECT_NEAR(rates.per_message, 0.75, 0.03);
    EXPECT_GE(rates.per_press, 0.999);
    EXPECT_GE(rates.per_press, rates.per_message);
}

TEST(SuccessRate, SingleMessageRatesCoincide) {
    const LatencyModel model{113, 164, 175};
    const auto rates = success_rate_experiment(150, model, 5000, 1, 10);
    EXPECT_DOUBLE_EQ(rates.per_message, rates.per_press);
}

TEST(SuccessRate, MonotoneInGammaForFixedSeed) {
    const LatencyModel model{55, 79, 136};
    double last = -1;
    for (double gamma = 55; gamma <= 140; gamma += 5) {
        const auto rates = success_rate_experiment(gamma, model, 4000, 1, 11);
        EXPECT_GE(rates.per_message, last) << "gamma=" << gamma;
        last = rates.per_message;
    }
}

// ── relay_margin ─────────────────────────────────────────────────────────────

TEST(RelayMargin, TableValues) {
    EXPECT_DOUBLE_EQ(relay_margin(79, 55), 24.0);
    EXPECT_DOUBLE_EQ(relay_margin(164, 113), 51.0);
    EXPECT_DOUBLE_EQ(relay_margin(42, 42), 0.0);
}

TEST(RelayMargin, RejectsGammaBelowFloor) {
    EXPECT_THROW(relay_margin(50, 55), std::invalid_argument);
}

// ── CSV I/O ──────────────────────────────────────────────────────────────────

TEST(LatencyCsv, RoundTrip) {
    const std::vector<double> samples = {55, 79.5, 136, 70.25};
    std::stringstream buf;
    write_latency_csv(buf, samples);
    const auto loaded = load_latency_csv(buf);
    EXPECT_EQ(loaded, samples);
}

TEST(LatencyCsv, AcceptsHeaderlessIntegers) {
    std::stringstream buf("55\n79\n136\n70\n");
    EXPECT_EQ(load_latency_csv(buf).size(), 4u);
}

TEST(LatencyCsv, RejectsJunkWithLineNumber) {
    std::stringstream buf("latency_ms\n55\npotato\n");
    try {
        load_latency_csv(buf);
        FAIL() << "expected parse failure";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(StatsCsv, TableRowLayout) {
    std::stringstream buf;
    write_stats_csv_row(buf, "RKE", LatencyStats{136, 55, 71, 79, 1000});
    EXPECT_EQ(buf.str(), "RKE,136,55,71,79\n");
}

// ── sample_latency (model behavior) ──────────────────────────────────────────

TEST(SampleLatency, StaysWithinBounds) {
    std::mt19937_64 rng(103);
    const LatencyModel model{55, 79, 136};
    for (int i = 0; i < 20000; ++i) {
        const double v = sample_latency(model, rng);
        EXPECT_GE(v, 55.0);
        EXPECT_LE(v, 136.0);
    }
}

TEST(SampleLatency, DegenerateModelIsConstant) {
    std::mt19937_64 rng(104);
    const LatencyModel model{42, 42, 42};
    for (int i = 0; i < 100; ++i) EXPECT_DOUBLE_EQ(sample_latency(model, rng), 42.0);
}

// Oracle: sort the draws and read the 75th percentile by index.
TEST(SampleLatency, EmpiricalQ3MatchesAnchor) {
    std::mt19937_64 rng(105);
    const LatencyModel model{55, 79, 136};
    std::vector<double> draws(100000);
    for (auto& d : draws) d = sample_latency(model, rng);
    std::sort(draws.begin(), draws.end());
    const double q3 = draws[static_cast<std::size_t>(0.75 * (draws.size() - 1))];
    EXPECT_NEAR(q3, 79.0, 1.0);
}

TEST(SampleLatency, RejectsInvalidModel) {
    std::mt19937_64 rng(106);
    EXPECT_THROW(sample_latency(LatencyModel{100, 90, 136}, rng), std::invalid_argument);
}

}  // namespace
}  // namespace laser
