#pragma once

#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "laser/crypto.hpp"
#include "laser/wire.hpp"

namespace laser {

// The two seams an actor talks to the world through. The simulator binds
// virtual clocks and a radio medium here; real hardware would bind an RTC
// and a transceiver.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now_ms() const = 0;
    // Re-bases the clock so reads continue from t (sync correction).
    virtual void set_now_ms(Timestamp t) = 0;
};

class Transmitter {
public:
    virtual ~Transmitter() = default;
    virtual void send(ChannelId ch, std::span<const std::uint8_t> frame) = 0;
};

enum class VerdictKind {
    accept,
    reject_bad_tag,
    reject_stale,
    reject_duplicate,
    sync_sent,
};

inline const char* to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::accept: return "accept";
        case VerdictKind::reject_bad_tag: return "reject_bad_tag";
        case VerdictKind::reject_stale: return "reject_stale";
        case VerdictKind::reject_duplicate: return "reject_duplicate";
        case VerdictKind::sync_sent: return "sync_sent";
    }
    return "unknown";
}

// Exactly one verdict per received frame; cmd is set only on accept.
struct Verdict {
    VerdictKind kind;
    std::optional<Command> cmd;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

class Fob {
public:
    struct Config {
        SecretKey sk;
        DeviceId device_id{};
        HopConfig hop;
        int messages_per_press = 6;
    };

    Fob(Config cfg, Clock& clock, Transmitter& tx) : cfg_(std::move(cfg)), clock_(clock), tx_(tx) {}

    // One authenticated frame stamped with a fresh clock reading, sent on
    // the hop channel of that reading's period bucket.
    std::pair<ChannelId, RkeMessage> press_once(Command cmd) {
        const Timestamp t_start = clock_.now_ms();
        RkeMessage m{cfg_.device_id, derive_auth_tag(cfg_.sk, t_start), t_start, cmd};
        const ChannelId ch = derive_channel(cfg_.sk, t_start, cfg_.hop);
        tx_.send(ch, encode_rke(m));
        return {ch, m};
    }

    // The burst a button press produces (messages_per_press frames). Event
    // driven hosts may instead call press_once per repeat interval so each
    // frame reads an advanced clock.
    std::vector<std::pair<ChannelId, RkeMessage>> press(Command cmd) {
        std::vector<std::pair<ChannelId, RkeMessage>> frames;
        frames.reserve(static_cast<std::size_t>(cfg_.messages_per_press));
        for (int i = 0; i < cfg_.messages_per_press; ++i) frames.push_back(press_once(cmd));
        return frames;
    }

    // Applies a clock correction iff the sync tag verifies; forged frames
    // are a silent no-op.
    bool on_sync(const SyncMessage& s) {
        if (s.tag != derive_auth_tag(cfg_.sk, s.t_sync)) return false;
        clock_.set_now_ms(s.t_sync);
        return true;
    }

    // PRKE: answer a SYN addressed to our device with the period-bucket tag.
    std::optional<PrkeResponse> on_syn(const PrkeSyn& syn) {
        if (syn.device_id != cfg_.device_id) return std::nullopt;
        const Timestamp now = clock_.now_ms();
        const Timestamp t_p = round_to_period(now, cfg_.hop.period_ms);
        PrkeResponse resp{cfg_.device_id, derive_auth_tag(cfg_.sk, t_p)};
        tx_.send(derive_channel(cfg_.sk, now, cfg_.hop), encode_prke_resp(resp));
        return resp;
    }

    // Channel this fob is currently listening on.
    ChannelId current_channel() const { return derive_channel(cfg_.sk, clock_.now_ms(), cfg_.hop); }

    const Config& config() const { return cfg_; }

private:
    Config cfg_;
    Clock& clock_;
    Transmitter& tx_;
};

class Device {
public:
    struct Config {
        SecretKey sk;
        DeviceId device_id{};
        HopConfig hop;
        double gamma_ms = 79;
    };

    Device(Config cfg, Clock& clock, Transmitter& tx) : cfg_(std::move(cfg)), clock_(clock), tx_(tx) {}

    ChannelId current_channel() const {
        return derive_channel(cfg_.sk, clock_.now_ms(), cfg_.hop);
    }

    // RKE receive path. Checks run tag -> freshness -> duplicate; only an
    // authenticated-but-stale frame earns a sync reply, sent on the channel
    // the frame arrived on.
    Verdict on_rke(const RkeMessage& m, ChannelId arrival) {
        return on_rke(m, arrival, clock_.now_ms());
    }

    Verdict on_rke(const RkeMessage& m, ChannelId arrival, Timestamp t_end) {
        if (m.tag != derive_auth_tag(cfg_.sk, m.t_start)) {
            return {VerdictKind::reject_bad_tag, std::nullopt};
        }
        prune_cache(t_end);
        const bool fresh = t_end >= m.t_start &&
                           static_cast<double>(t_end - m.t_start) <= cfg_.gamma_ms;
        if (!fresh) {
            send_sync(arrival);
            return {VerdictKind::sync_sent, std::nullopt};
        }
        const CacheKey key{m.tag.bytes, m.t_start};
        if (accepted_.contains(key)) {
            return {VerdictKind::reject_duplicate, std::nullopt};
        }
        accepted_.insert(key);
        oldest_cached_ = accepted_.size() == 1 ? m.t_start
                                               : std::min(oldest_cached_, m.t_start);
        return {VerdictKind::accept, m.cmd};
    }

    // PRKE: emit a SYN on the current hop channel. The exchange timer is
    // anchored to the first SYN of the session; retransmissions while the
    // input persists do not move it, so a response's round trip is always
    // measured against the challenge that opened the exchange.
    struct Trigger {
        ChannelId channel;
        PrkeSyn syn;
        Timestamp started_at;
    };

    Trigger prke_trigger() {
        const Timestamp now = clock_.now_ms();
        if (!syn_started_) syn_started_ = now;
        PrkeSyn syn{cfg_.device_id};
        const ChannelId ch = derive_channel(cfg_.sk, now, cfg_.hop);
        tx_.send(ch, encode_prke_syn(syn));
        return {ch, syn, *syn_started_};
    }

    bool has_pending_syn() const { return syn_started_.has_value(); }

    // Input released or exchange resolved; the next trigger starts fresh.
    void end_prke_session() { syn_started_.reset(); }

    // Verdict for a response, measured from the session's first SYN.
    // Responses with no SYN outstanding are ignored.
    std::optional<Verdict> on_prke_response(const PrkeResponse& r) {
        if (!syn_started_) return std::nullopt;
        const Timestamp now = clock_.now_ms();
        const Verdict v = check_prke_response(r, now - *syn_started_, now);
        if (v.kind == VerdictKind::accept) end_prke_session();
        return v;
    }

    // Decision core: tag must match our own period bucket, and the
    // exchange time must sit within gamma.
    Verdict check_prke_response(const PrkeResponse& r, std::uint64_t t_e_ms,
                                Timestamp device_now) const {
        const Timestamp t_p = round_to_period(device_now, cfg_.hop.period_ms);
        if (r.tag != derive_auth_tag(cfg_.sk, t_p)) {
            return {VerdictKind::reject_bad_tag, std::nullopt};
        }
        if (static_cast<double>(t_e_ms) > cfg_.gamma_ms) {
            return {VerdictKind::reject_stale, std::nullopt};
        }
        return {VerdictKind::accept, std::nullopt};
    }

    // Unanswered-SYN recovery: push the authenticated time onto every
    // channel so a fob with a wrong period bucket hears it somewhere.
    std::vector<std::pair<ChannelId, SyncMessage>> prke_broadcast_sync() {
        const Timestamp t_sync = clock_.now_ms();
        const SyncMessage sync{cfg_.device_id, derive_auth_tag(cfg_.sk, t_sync), t_sync};
        std::vector<std::pair<ChannelId, SyncMessage>> sent;
        sent.reserve(cfg_.hop.channel_count);
        for (std::uint32_t ch = 0; ch < cfg_.hop.channel_count; ++ch) {
            tx_.send(ChannelId{ch}, encode_sync(sync));
            sent.emplace_back(ChannelId{ch}, sync);
        }
        end_prke_session();
        return sent;
    }

    const Config& config() const { return cfg_; }

private:
    using CacheKey = std::pair<std::array<std::uint8_t, 6>, Timestamp>;

    void send_sync(ChannelId ch) {
        const Timestamp t_sync = clock_.now_ms();
        tx_.send(ch, encode_sync(SyncMessage{cfg_.device_id,
                                             derive_auth_tag(cfg_.sk, t_sync), t_sync}));
    }

    // Entries older than gamma cannot pass the freshness check anyway, so
    // the live window is all the cache ever needs to hold. The scan only
    // runs once the oldest entry has actually left the window.
    void prune_cache(Timestamp t_end) {
        const auto stale = [&](Timestamp t_start) {
            return t_end >= t_start && static_cast<double>(t_end - t_start) > cfg_.gamma_ms;
        };
        if (accepted_.empty() || !stale(oldest_cached_)) return;
        std::erase_if(accepted_, [&](const CacheKey& key) { return stale(key.second); });
        oldest_cached_ = ~Timestamp{0};
        for (const auto& key : accepted_) {
            oldest_cached_ = std::min(oldest_cached_, key.second);
        }
    }

    Config cfg_;
    Clock& clock_;
    Transmitter& tx_;
    std::set<CacheKey> accepted_;
    Timestamp oldest_cached_ = 0;
    std::optional<Timestamp> syn_started_;
};

}  // namespace laser
