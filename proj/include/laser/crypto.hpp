#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <cstdio>
#include <span>

#include <boost/multiprecision/cpp_int.hpp>

#include "laser/blake2s.hpp"

namespace laser {

// Milliseconds since the Unix epoch. Any uint64 fits in the 20-digit
// decimal field carried on the wire.
using Timestamp = std::uint64_t;

struct SecretKey {
    std::array<std::uint8_t, 32> bytes{};

    friend bool operator==(const SecretKey&, const SecretKey&) = default;
};

// 6-byte truncation of the full tag digest.
struct AuthTag {
    std::array<std::uint8_t, 6> bytes{};

    bool is_zero() const {
        return std::all_of(bytes.begin(), bytes.end(), [](auto b) { return b == 0; });
    }
    friend bool operator==(const AuthTag&, const AuthTag&) = default;
};

struct ChannelId {
    std::uint32_t index = 0;

    friend bool operator==(const ChannelId&, const ChannelId&) = default;
    friend auto operator<=>(const ChannelId&, const ChannelId&) = default;
};

// Hop period and channel count shared by fob and device. The frequency
// labels are informational only; channel selection works on indices.
struct HopConfig {
    std::uint64_t period_ms = 10000;
    std::uint32_t channel_count = 16;
    double base_frequency_mhz = 433.05;
    double spacing_mhz = 0.05;
};

// Timestamps are hashed and transmitted as fixed-width 20-char ASCII
// decimal, so the hashed bytes equal the wire bytes.
inline std::array<char, 20> ascii_decimal_20(Timestamp t) {
    std::array<char, 21> buf;  // snprintf needs room for the terminator
    std::snprintf(buf.data(), buf.size(), "%020llu", static_cast<unsigned long long>(t));
    std::array<char, 20> out;
    std::copy_n(buf.begin(), 20, out.begin());
    return out;
}

// Full digest behind both the auth tag and the channel derivation:
// Blake2s-256(sk || ascii_decimal_20(t)).
inline Blake2s::Digest tag_digest(const SecretKey& sk, Timestamp t) {
    Blake2s state;
    state.update(sk.bytes);
    const auto ts = ascii_decimal_20(t);
    state.update(std::span(reinterpret_cast<const std::uint8_t*>(ts.data()), ts.size()));
    return state.finish();
}

inline AuthTag derive_auth_tag(const SecretKey& sk, Timestamp t) {
    const auto digest = tag_digest(sk, t);
    AuthTag tag;
    std::copy_n(digest.begin(), tag.bytes.size(), tag.bytes.begin());
    return tag;
}

// Previous multiple of the hop period (t_p).
inline Timestamp round_to_period(Timestamp t, std::uint64_t period_ms) {
    assert(period_ms > 0);
    return (t / period_ms) * period_ms;
}

// Big-endian integer interpretation of the full 32-byte digest.
inline boost::multiprecision::cpp_int digest_to_int(const Blake2s::Digest& digest) {
    boost::multiprecision::cpp_int value = 0;
    for (const auto byte : digest) {
        value <<= 8;
        value += byte;
    }
    return value;
}

// ch = int(Blake2s(sk || t_p)) mod N_c, with t_p the period-rounded
// timestamp, so any two clocks inside the same period bucket agree.
inline ChannelId derive_channel(const SecretKey& sk, Timestamp t, const HopConfig& cfg) {
    assert(cfg.channel_count >= 1);
    const Timestamp t_p = round_to_period(t, cfg.period_ms);
    const auto value = digest_to_int(tag_digest(sk, t_p));
    return ChannelId{static_cast<std::uint32_t>(value % cfg.channel_count)};
}

}  // namespace laser
