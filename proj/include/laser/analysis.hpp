#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "laser/latency.hpp"

namespace laser {

struct LatencyStats {
    double t_max = 0;
    double t_min = 0;
    double t_avg = 0;
    double t_q3 = 0;
    std::size_t sample_count = 0;
};

// Summarizes a latency dataset; gamma is conventionally taken as t_q3.
// Q3 uses linear interpolation between closest ranks at p = 0.75.
inline LatencyStats estimate_threshold(std::vector<double> samples) {
    if (samples.size() < 4) {
        throw std::invalid_argument("threshold estimation needs at least 4 samples, got " +
                                    std::to_string(samples.size()));
    }
    std::sort(samples.begin(), samples.end());
    LatencyStats stats;
    stats.sample_count = samples.size();
    stats.t_min = samples.front();
    stats.t_max = samples.back();
    stats.t_avg = std::accumulate(samples.begin(), samples.end(), 0.0) /
                  static_cast<double>(samples.size());
    const double pos = 0.75 * static_cast<double>(samples.size() - 1);
    const auto lower = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lower);
    stats.t_q3 = lower + 1 < samples.size()
                     ? samples[lower] + frac * (samples[lower + 1] - samples[lower])
                     : samples[lower];
    return stats;
}

struct SuccessRates {
    double per_message = 0;
    double per_press = 0;
};

// Monte Carlo acceptance rates for a given threshold: each frame's latency
// is an independent draw from the model; a press succeeds when at least one
// of its messages_per_press frames lands within gamma.
inline SuccessRates success_rate_experiment(double gamma_ms, const LatencyModel& model,
                                            int trials, int messages_per_press,
                                            std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (messages_per_press < 1) throw std::invalid_argument("messages_per_press must be >= 1");
    std::mt19937_64 rng(seed);
    long frame_hits = 0;
    long press_hits = 0;
    for (int trial = 0; trial < trials; ++trial) {
        bool any = false;
        for (int i = 0; i < messages_per_press; ++i) {
            if (sample_latency(model, rng) <= gamma_ms) {
                ++frame_hits;
                any = true;
            }
        }
        if (any) ++press_hits;
    }
    const double frames = static_cast<double>(trials) * messages_per_press;
    return SuccessRates{frame_hits / frames, press_hits / static_cast<double>(trials)};
}

// The relay attacker's total timing budget: gamma minus the floor the
// honest hardware imposes on its own legs.
inline double relay_margin(double gamma_ms, double t_min_ms) {
    if (gamma_ms < t_min_ms) {
        throw std::invalid_argument("relay margin requires gamma >= t_min");
    }
    return gamma_ms - t_min_ms;
}

// Single-column latency CSV (integer or decimal ms). An optional
// "latency_ms" header line is tolerated.
inline std::vector<double> load_latency_csv(std::istream& in) {
    std::vector<double> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.find_first_not_of("0123456789.-+eE \t\r") != std::string::npos) {
            continue;  // header
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(line, &used);
            if (line.find_first_not_of(" \t\r", used) != std::string::npos) {
                throw std::invalid_argument("trailing junk");
            }
            samples.push_back(v);
        } catch (const std::exception&) {
            throw std::invalid_argument("line " + std::to_string(line_no) +
                                        ": not a latency value: '" + line + "'");
        }
    }
    return samples;
}

inline void write_latency_csv(std::ostream& out, const std::vector<double>& samples) {
    out << "latency_ms\n";
    for (const double v : samples) out << v << "\n";
}

// Row layout: system, t_max, t_min, t_avg, t_Q3.
inline void write_stats_csv_row(std::ostream& out, const std::string& system,
                                const LatencyStats& stats) {
    out << system << "," << stats.t_max << "," << stats.t_min << "," << stats.t_avg << ","
        << stats.t_q3 << "\n";
}

}  // namespace laser
