#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <variant>

#include "laser/crypto.hpp"

namespace laser {

using DeviceId = std::array<std::uint8_t, 4>;
using Command = std::array<std::uint8_t, 2>;

// Framing sentinels bracketing every frame.
inline constexpr std::array<std::uint8_t, 4> kFrameStart = {0xAA, 0x55, 0xAA, 0x55};
inline constexpr std::array<std::uint8_t, 4> kFrameEnd = {0x55, 0xAA, 0x55, 0xAA};

// Layouts (sentinels included):
//   RKE:      START(4) device_id(4) tag(6) t_start ascii(20) cmd(2) END(4) = 40
//   PRKE:     START(4) device_id(4) tag(6) END(4)                         = 18
//   sync:     START(4) device_id(4) tag(6) t_sync ascii(20) END(4)        = 38
// A PRKE frame with an all-zero tag is the device's SYN; a non-zero tag is
// the fob's response. Frame types are told apart by length, then zero-tag.
inline constexpr std::size_t kRkeFrameSize = 40;
inline constexpr std::size_t kPrkeFrameSize = 18;
inline constexpr std::size_t kSyncFrameSize = 38;

struct RkeMessage {
    DeviceId device_id{};
    AuthTag tag{};
    Timestamp t_start = 0;
    Command cmd{};

    friend bool operator==(const RkeMessage&, const RkeMessage&) = default;
};

struct PrkeSyn {
    DeviceId device_id{};

    friend bool operator==(const PrkeSyn&, const PrkeSyn&) = default;
};

struct PrkeResponse {
    DeviceId device_id{};
    AuthTag tag{};

    friend bool operator==(const PrkeResponse&, const PrkeResponse&) = default;
};

struct SyncMessage {
    DeviceId device_id{};
    AuthTag tag{};   // derive_auth_tag(sk, t_sync)
    Timestamp t_sync = 0;

    friend bool operator==(const SyncMessage&, const SyncMessage&) = default;
};

enum class DecodeError {
    bad_length,
    bad_sentinel,
    bad_timestamp,
};

inline const char* to_string(DecodeError e) {
    switch (e) {
        case DecodeError::bad_length: return "bad_length";
        case DecodeError::bad_sentinel: return "bad_sentinel";
        case DecodeError::bad_timestamp: return "bad_timestamp";
    }
    return "unknown";
}

template <typename T>
using Decoded = std::variant<T, DecodeError>;

using PrkeFrame = std::variant<PrkeSyn, PrkeResponse>;
using Frame = std::variant<RkeMessage, PrkeSyn, PrkeResponse, SyncMessage>;

namespace detail {

template <std::size_t N>
class FrameWriter {
public:
    std::array<std::uint8_t, N> buf{};

    void put(std::span<const std::uint8_t> bytes) {
        for (const auto b : bytes) buf[pos_++] = b;
    }
    void put_timestamp(Timestamp t) {
        const auto ascii = ascii_decimal_20(t);
        for (const char c : ascii) buf[pos_++] = static_cast<std::uint8_t>(c);
    }

private:
    std::size_t pos_ = 0;
};

inline bool sentinels_ok(std::span<const std::uint8_t> b) {
    return std::equal(kFrameStart.begin(), kFrameStart.end(), b.begin()) &&
           std::equal(kFrameEnd.begin(), kFrameEnd.end(), b.end() - 4);
}

inline bool parse_timestamp(std::span<const std::uint8_t> field, Timestamp& out) {
    // 20 ASCII digits; values beyond uint64 range are unrepresentable and
    // rejected alongside non-digits.
    constexpr Timestamp max = ~Timestamp{0};
    Timestamp value = 0;
    for (const auto byte : field) {
        if (byte < '0' || byte > '9') return false;
        const Timestamp digit = byte - '0';
        if (value > max / 10 || (value == max / 10 && digit > max % 10)) return false;
        value = value * 10 + digit;
    }
    out = value;
    return true;
}

template <std::size_t N>
std::array<std::uint8_t, N> take(std::span<const std::uint8_t> b, std::size_t offset) {
    std::array<std::uint8_t, N> out;
    std::copy_n(b.begin() + offset, N, out.begin());
    return out;
}

}  // namespace detail

inline std::array<std::uint8_t, kRkeFrameSize> encode_rke(const RkeMessage& m) {
    detail::FrameWriter<kRkeFrameSize> w;
    w.put(kFrameStart);
    w.put(m.device_id);
    w.put(m.tag.bytes);
    w.put_timestamp(m.t_start);
    w.put(m.cmd);
    w.put(kFrameEnd);
    return w.buf;
}

inline Decoded<RkeMessage> decode_rke(std::span<const std::uint8_t> b) {
    if (b.size() != kRkeFrameSize) return DecodeError::bad_length;
    if (!detail::sentinels_ok(b)) return DecodeError::bad_sentinel;
    RkeMessage m;
    m.device_id = detail::take<4>(b, 4);
    m.tag.bytes = detail::take<6>(b, 8);
    if (!detail::parse_timestamp(b.subspan(14, 20), m.t_start)) {
        return DecodeError::bad_timestamp;
    }
    m.cmd = detail::take<2>(b, 34);
    return m;
}

inline std::array<std::uint8_t, kPrkeFrameSize> encode_prke_syn(const PrkeSyn& m) {
    detail::FrameWriter<kPrkeFrameSize> w;
    w.put(kFrameStart);
    w.put(m.device_id);
    w.put(AuthTag{}.bytes);  // "hash is null" marks the SYN
    w.put(kFrameEnd);
    return w.buf;
}

inline std::array<std::uint8_t, kPrkeFrameSize> encode_prke_resp(const PrkeResponse& m) {
    detail::FrameWriter<kPrkeFrameSize> w;
    w.put(kFrameStart);
    w.put(m.device_id);
    w.put(m.tag.bytes);
    w.put(kFrameEnd);
    return w.buf;
}

inline Decoded<PrkeFrame> decode_prke(std::span<const std::uint8_t> b) {
    if (b.size() != kPrkeFrameSize) return DecodeError::bad_length;
    if (!detail::sentinels_ok(b)) return DecodeError::bad_sentinel;
    const DeviceId id = detail::take<4>(b, 4);
    AuthTag tag;
    tag.bytes = detail::take<6>(b, 8);
    if (tag.is_zero()) return PrkeFrame{PrkeSyn{id}};
    return PrkeFrame{PrkeResponse{id, tag}};
}

inline std::array<std::uint8_t, kSyncFrameSize> encode_sync(const SyncMessage& m) {
    detail::FrameWriter<kSyncFrameSize> w;
    w.put(kFrameStart);
    w.put(m.device_id);
    w.put(m.tag.bytes);
    w.put_timestamp(m.t_sync);
    w.put(kFrameEnd);
    return w.buf;
}

inline Decoded<SyncMessage> decode_sync(std::span<const std::uint8_t> b) {
    if (b.size() != kSyncFrameSize) return DecodeError::bad_length;
    if (!detail::sentinels_ok(b)) return DecodeError::bad_sentinel;
    SyncMessage m;
    m.device_id = detail::take<4>(b, 4);
    m.tag.bytes = detail::take<6>(b, 8);
    if (!detail::parse_timestamp(b.subspan(14, 20), m.t_sync)) {
        return DecodeError::bad_timestamp;
    }
    return m;
}

// Length-discriminated decode for receivers that accept any frame type.
inline std::variant<Frame, DecodeError> decode_frame(std::span<const std::uint8_t> b) {
    auto lift = [](auto&& decoded) -> std::variant<Frame, DecodeError> {
        return std::visit(
            [](auto&& v) -> std::variant<Frame, DecodeError> {
                using V = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<V, DecodeError>) {
                    return v;
                } else if constexpr (std::is_same_v<V, PrkeFrame>) {
                    return std::visit([](auto&& p) { return std::variant<Frame, DecodeError>{Frame{p}}; }, v);
                } else {
                    return Frame{v};
                }
            },
            decoded);
    };
    switch (b.size()) {
        case kRkeFrameSize: return lift(decode_rke(b));
        case kPrkeFrameSize: return lift(decode_prke(b));
        case kSyncFrameSize: return lift(decode_sync(b));
        default: return DecodeError::bad_length;
    }
}

}  // namespace laser
