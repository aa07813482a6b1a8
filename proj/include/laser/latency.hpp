#pragma once

#include <random>
#include <stdexcept>

namespace laser {

// Radio-link latency summarized by (min, Q3, max) anchors. Samples come
// from the piecewise-linear inverse CDF through (0 -> min, 0.75 -> q3,
// 1.0 -> max), which reproduces the anchor quantiles by construction.
struct LatencyModel {
    double min_ms = 0;
    double q3_ms = 0;
    double max_ms = 0;

    bool valid() const { return min_ms <= q3_ms && q3_ms <= max_ms; }

    friend bool operator==(const LatencyModel&, const LatencyModel&) = default;
};

inline double latency_quantile(const LatencyModel& m, double u) {
    if (u <= 0.75) return m.min_ms + (u / 0.75) * (m.q3_ms - m.min_ms);
    return m.q3_ms + ((u - 0.75) / 0.25) * (m.max_ms - m.q3_ms);
}

inline double sample_latency(const LatencyModel& m, std::mt19937_64& rng) {
    if (!m.valid()) throw std::invalid_argument("latency model violates min <= q3 <= max");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return latency_quantile(m, unit(rng));
}

}  // namespace laser
