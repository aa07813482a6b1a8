#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "laser/simnet.hpp"

namespace laser {

// Scenario configuration is flat "key = value" text with '#' comments.
// Every diagnostic carries the offending line number.
struct ConfigError : std::runtime_error {
    ConfigError(std::size_t line, const std::string& msg)
        : std::runtime_error("config line " + std::to_string(line) + ": " + msg), line_no(line) {}
    std::size_t line_no;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline double parse_double(std::size_t line, const std::string& v) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return out;
    } catch (const std::exception&) {
        throw ConfigError(line, "expected a number, got '" + v + "'");
    }
}

inline std::uint64_t parse_u64(std::size_t line, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError(line, "expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

inline std::int64_t parse_i64(std::size_t line, const std::string& v) {
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError(line, "expected an integer, got '" + v + "'");
    }
    return out;
}

inline LatencyModel parse_model(std::size_t line, const std::string& v) {
    std::vector<std::string> parts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(trim(item));
    if (parts.size() != 3) {
        throw ConfigError(line, "latency model needs 'min,q3,max', got '" + v + "'");
    }
    const LatencyModel model{parse_double(line, parts[0]), parse_double(line, parts[1]),
                             parse_double(line, parts[2])};
    if (!model.valid()) throw ConfigError(line, "latency model violates min <= q3 <= max");
    return model;
}

inline std::vector<std::uint8_t> parse_hex(std::size_t line, const std::string& v,
                                           std::size_t want_bytes) {
    if (v.size() != 2 * want_bytes) {
        throw ConfigError(line, "expected " + std::to_string(2 * want_bytes) +
                                    " hex chars, got " + std::to_string(v.size()));
    }
    std::vector<std::uint8_t> out(want_bytes);
    for (std::size_t i = 0; i < want_bytes; ++i) {
        const auto nibble = [&](char c) -> int {
            if (c >= '0' && c <= '9') return c - '0';
            if (c >= 'a' && c <= 'f') return c - 'a' + 10;
            if (c >= 'A' && c <= 'F') return c - 'A' + 10;
            throw ConfigError(line, std::string("invalid hex character '") + c + "'");
        };
        out[i] = static_cast<std::uint8_t>((nibble(v[2 * i]) << 4) | nibble(v[2 * i + 1]));
    }
    return out;
}

}  // namespace detail

inline sim::SimConfig load_sim_config(std::istream& in) {
    sim::SimConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(line_no, "expected 'key = value', got '" + line + "'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (value.empty()) throw ConfigError(line_no, "empty value for '" + key + "'");

        if (key == "seed") {
            cfg.seed = detail::parse_u64(line_no, value);
            cfg.seed_explicit = true;
        }
        else if (key == "period_ms") cfg.hop.period_ms = detail::parse_u64(line_no, value);
        else if (key == "channel_count") {
            cfg.hop.channel_count = static_cast<std::uint32_t>(detail::parse_u64(line_no, value));
        } else if (key == "base_frequency_mhz") {
            cfg.hop.base_frequency_mhz = detail::parse_double(line_no, value);
        } else if (key == "spacing_mhz") cfg.hop.spacing_mhz = detail::parse_double(line_no, value);
        else if (key == "rke_latency") cfg.rke_latency = detail::parse_model(line_no, value);
        else if (key == "prke_latency") cfg.prke_latency = detail::parse_model(line_no, value);
        else if (key == "attacker_latency") {
            cfg.attacker_latency = detail::parse_model(line_no, value);
        } else if (key == "fob_skew_ms") cfg.fob_skew_ms = detail::parse_i64(line_no, value);
        else if (key == "device_skew_ms") cfg.device_skew_ms = detail::parse_i64(line_no, value);
        else if (key == "duration_ms") cfg.duration_ms = detail::parse_u64(line_no, value);
        else if (key == "gamma_ms") cfg.gamma_ms = detail::parse_double(line_no, value);
        else if (key == "messages_per_press") {
            cfg.messages_per_press = static_cast<int>(detail::parse_u64(line_no, value));
        } else if (key == "inter_frame_gap_ms") {
            cfg.inter_frame_gap_ms = detail::parse_u64(line_no, value);
        } else if (key == "syn_retry_ms") cfg.syn_retry_ms = detail::parse_u64(line_no, value);
        else if (key == "syn_timeout_ms") cfg.syn_timeout_ms = detail::parse_u64(line_no, value);
        else if (key == "airtime_per_byte_ms") {
            cfg.airtime_per_byte_ms = detail::parse_double(line_no, value);
        } else if (key == "sk") {
            const auto raw = detail::parse_hex(line_no, value, 32);
            SecretKey sk;
            std::copy(raw.begin(), raw.end(), sk.bytes.begin());
            cfg.sk = sk;
        } else if (key == "device_id") {
            const auto raw = detail::parse_hex(line_no, value, 4);
            std::copy(raw.begin(), raw.end(), cfg.device_id.begin());
        } else {
            throw ConfigError(line_no, "unknown key '" + key + "'");
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(line_no, std::string("invalid configuration: ") + e.what());
    }
    return cfg;
}

inline sim::SimConfig load_sim_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return load_sim_config(in);
}

}  // namespace laser
