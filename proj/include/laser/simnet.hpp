#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "laser/actors.hpp"
#include "laser/crypto.hpp"
#include "laser/latency.hpp"
#include "laser/wire.hpp"

namespace laser::sim {

// Virtual time runs in microseconds so sub-millisecond link latencies stay
// exact; protocol clocks expose floor-divided milliseconds.
using SimTime = std::uint64_t;

inline SimTime ms_to_us(double ms) {
    return static_cast<SimTime>(std::llround(ms * 1000.0));
}

inline constexpr SimTime ms_to_us(std::uint64_t ms) { return ms * 1000; }

// "55" for whole milliseconds, "10.500" otherwise; integer arithmetic only
// so trace output is reproducible byte for byte.
inline std::string format_ms(SimTime us) {
    std::string out = std::to_string(us / 1000);
    const auto rem = static_cast<unsigned>(us % 1000);
    if (rem != 0) {
        char frac[8];
        std::snprintf(frac, sizeof(frac), ".%03u", rem);
        out += frac;
    }
    return out;
}

// ── event scheduler ──────────────────────────────────────────────────────────

// Single-threaded discrete-event queue. Events fire in (time, insertion)
// order; virtual time never depends on the wall clock.
class Scheduler {
public:
    SimTime now() const { return now_; }

    void schedule_at(SimTime t, std::function<void()> fn) {
        if (t < now_) {
            throw std::logic_error("event scheduled in the past: t=" + std::to_string(t) +
                                   "us now=" + std::to_string(now_) + "us");
        }
        queue_.emplace(std::make_pair(t, seq_++), std::move(fn));
    }

    void schedule_after(SimTime delay, std::function<void()> fn) {
        schedule_at(now_ + delay, std::move(fn));
    }

    // Fires every event up to and including t, then parks time at t.
    void run_until(SimTime t) {
        while (!queue_.empty() && queue_.begin()->first.first <= t) {
            auto node = queue_.extract(queue_.begin());
            now_ = node.key().first;
            node.mapped()();
        }
        now_ = std::max(now_, t);
    }

    void run_until_idle() {
        while (!queue_.empty()) {
            auto node = queue_.extract(queue_.begin());
            now_ = node.key().first;
            node.mapped()();
        }
    }

    bool idle() const { return queue_.empty(); }

private:
    SimTime now_ = 0;
    std::uint64_t seq_ = 0;
    std::map<std::pair<SimTime, std::uint64_t>, std::function<void()>> queue_;
};

// ── virtual clock ────────────────────────────────────────────────────────────

// reading = floor_ms(virtual time + configured skew + sync corrections).
class VirtualClock : public Clock {
public:
    VirtualClock(const Scheduler& sched, std::int64_t skew_ms)
        : sched_(&sched), skew_us_(skew_ms * 1000) {}

    Timestamp now_ms() const override {
        const auto reading_us = static_cast<std::int64_t>(sched_->now()) + skew_us_;
        assert(reading_us >= 0 && "scenario let a skewed clock read before epoch");
        return static_cast<Timestamp>(reading_us / 1000);
    }

    void set_now_ms(Timestamp t) override {
        skew_us_ = static_cast<std::int64_t>(t) * 1000 - static_cast<std::int64_t>(sched_->now());
    }

    std::int64_t skew_us() const { return skew_us_; }

private:
    const Scheduler* sched_;
    std::int64_t skew_us_;
};

// ── event trace ──────────────────────────────────────────────────────────────

struct TraceEvent {
    SimTime time_us;
    std::string node;
    std::string kind;
    std::string detail;
};

class EventTrace {
public:
    void note(SimTime t, const std::string& node, const std::string& kind,
              const std::string& detail) {
        events_.push_back({t, node, kind, detail});
    }

    const std::vector<TraceEvent>& events() const { return events_; }

    void write_csv(std::ostream& out) const {
        out << "time_ms,node,event,detail\n";
        for (const auto& e : events_) {
            out << format_ms(e.time_us) << "," << e.node << "," << e.kind << "," << e.detail
                << "\n";
        }
    }

    std::string to_csv() const {
        std::ostringstream out;
        write_csv(out);
        return out.str();
    }

private:
    std::vector<TraceEvent> events_;
};

// ── nodes and the radio medium ───────────────────────────────────────────────

enum class Role { fob, device, jammer, sniffer, relay_endpoint };

// position class decides which jammers can hit a receiver and which side of
// a partitioned field (relay scenarios) a node lives on
enum class Position { near_fob, near_device };

inline const char* to_string(Role r) {
    switch (r) {
        case Role::fob: return "fob";
        case Role::device: return "device";
        case Role::jammer: return "jammer";
        case Role::sniffer: return "sniffer";
        case Role::relay_endpoint: return "relay_endpoint";
    }
    return "unknown";
}

// Latency charged to a node's transmissions, in milliseconds. The measured
// timings are dominated by the sending hardware, so the model rides on the
// sender.
using LatencySampler = std::function<double(std::mt19937_64&)>;

inline LatencySampler model_sampler(LatencyModel m) {
    return [m](std::mt19937_64& rng) { return sample_latency(m, rng); };
}

inline LatencySampler fixed_sampler(double ms) {
    return [ms](std::mt19937_64&) { return ms; };
}

// A node listens on at most one channel at a time: either a pinned channel
// or the hop sequence derived from its own (possibly skewed) clock.
struct FollowHops {
    SecretKey sk;
    HopConfig hop;
};
using ListenPolicy = std::variant<std::monostate, ChannelId, FollowHops>;

struct Delivery {
    ChannelId channel;
    std::vector<std::uint8_t> bytes;
    std::string from;
    SimTime at_us;
    SimTime latency_us;  // realized leg latency, for per-leg accounting

    double latency_ms() const { return static_cast<double>(latency_us) / 1000.0; }
};

class Medium;

class Node : public Transmitter {
public:
    Node(Medium& medium, const Scheduler& sched, std::string name, Role role, Position pos,
         std::int64_t skew_ms)
        : name_(std::move(name)), role_(role), pos_(pos), clock_(sched, skew_ms),
          medium_(&medium) {}

    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;

    void send(ChannelId ch, std::span<const std::uint8_t> frame) override;

    const std::string& name() const { return name_; }
    Role role() const { return role_; }
    Position position() const { return pos_; }
    VirtualClock& clock() { return clock_; }
    const VirtualClock& clock() const { return clock_; }

    void set_sampler(LatencySampler s) { sampler_ = std::move(s); }
    void set_listen(ListenPolicy p) { listen_ = std::move(p); }
    void set_on_receive(std::function<void(const Delivery&)> fn) { on_receive_ = std::move(fn); }

    bool listening_on(ChannelId ch) const {
        if (std::holds_alternative<std::monostate>(listen_)) return false;
        if (const auto* fixed = std::get_if<ChannelId>(&listen_)) return *fixed == ch;
        const auto& hops = std::get<FollowHops>(listen_);
        return derive_channel(hops.sk, clock_.now_ms(), hops.hop) == ch;
    }

private:
    friend class Medium;

    std::string name_;
    Role role_;
    Position pos_;
    VirtualClock clock_;
    Medium* medium_;
    LatencySampler sampler_ = fixed_sampler(0);
    ListenPolicy listen_{};
    std::function<void(const Delivery&)> on_receive_;

    // jammer state: covered channels plus on/off interval history
    std::set<std::uint32_t> jam_channels_;
    std::vector<std::pair<SimTime, std::optional<SimTime>>> jam_intervals_;
};

struct NodeSpec {
    std::string name;
    Role role = Role::fob;
    Position pos = Position::near_fob;
    std::int64_t clock_skew_ms = 0;
    LatencySampler sampler = fixed_sampler(0);
    ListenPolicy listen{};
    std::set<std::uint32_t> jam_channels{};
};

// Multi-channel radio field. Delivery eligibility is decided at transmit
// time: the receiver must be listening on the channel and, when the field
// is partitioned (relay scenarios), share the sender's position class.
// A jammer destroys frames at co-located receivers whenever its activity
// overlaps the frame's airtime on a covered channel; listeners elsewhere
// (the attacker's sniffer) still hear the frame.
class Medium {
public:
    Medium(Scheduler& sched, std::uint64_t seed, double airtime_per_byte_ms = 0.2)
        : sched_(sched), rng_(seed), airtime_per_byte_us_(ms_to_us(airtime_per_byte_ms)) {}

    Node& add_node(NodeSpec spec) {
        auto node = std::make_unique<Node>(*this, sched_, spec.name, spec.role, spec.pos,
                                           spec.clock_skew_ms);
        node->sampler_ = std::move(spec.sampler);
        node->listen_ = std::move(spec.listen);
        node->jam_channels_ = std::move(spec.jam_channels);
        nodes_.push_back(std::move(node));
        return *nodes_.back();
    }

    void set_partitioned(bool on) { partitioned_ = on; }

    // Passive tap on every delivery, before the receiver's handler runs;
    // scenario harnesses use it for per-leg latency accounting.
    void set_delivery_observer(std::function<void(const Node&, const Delivery&)> fn) {
        delivery_observer_ = std::move(fn);
    }

    void jam_start(Node& jammer) {
        jammer.jam_intervals_.emplace_back(sched_.now(), std::nullopt);
        trace_.note(sched_.now(), jammer.name(), "jam_on", channels_detail(jammer));
    }

    void jam_stop(Node& jammer) {
        for (auto it = jammer.jam_intervals_.rbegin(); it != jammer.jam_intervals_.rend(); ++it) {
            if (!it->second) {
                it->second = sched_.now();
                break;
            }
        }
        trace_.note(sched_.now(), jammer.name(), "jam_off", channels_detail(jammer));
    }

    void transmit(Node& src, ChannelId ch, std::span<const std::uint8_t> frame) {
        assert(!frame.empty());
        const SimTime t = sched_.now();
        const SimTime air_end = t + airtime_per_byte_us_ * frame.size();
        const std::string payload = digest8(frame);
        trace_.note(t, src.name(), "tx",
                    "ch=" + std::to_string(ch.index) + " len=" + std::to_string(frame.size()) +
                        " payload=" + payload);

        int eligible = 0;
        for (const auto& dst : nodes_) {
            if (dst.get() == &src) continue;
            if (partitioned_ && dst->position() != src.position()) continue;
            if (!dst->listening_on(ch)) continue;
            ++eligible;
            if (jammed_at(*dst, ch, t, air_end)) {
                trace_.note(t, dst->name(), "jam_drop",
                            "ch=" + std::to_string(ch.index) + " payload=" + payload);
                continue;
            }
            const SimTime latency = ms_to_us(src.sampler_ ? src.sampler_(rng_) : 0.0);
            Node* receiver = dst.get();
            Delivery d{ch, {frame.begin(), frame.end()}, src.name(), t + latency, latency};
            sched_.schedule_at(t + latency, [this, receiver, payload, d = std::move(d)] {
                trace_.note(d.at_us, receiver->name(), "rx",
                            "ch=" + std::to_string(d.channel.index) +
                                " lat=" + format_ms(d.latency_us) + " payload=" + payload);
                if (delivery_observer_) delivery_observer_(*receiver, d);
                if (receiver->on_receive_) receiver->on_receive_(d);
            });
        }
        if (eligible == 0) {
            trace_.note(t, src.name(), "no_listener",
                        "ch=" + std::to_string(ch.index) + " payload=" + payload);
        }
    }

    // Bridges two relay endpoints: a frame captured at one end reappears at
    // the other after the bridge delay, charged with that end's own radio
    // latency on re-transmission.
    void make_relay_bridge(Node& a, Node& b, double bridge_latency_ms) {
        const SimTime bridge_us = ms_to_us(bridge_latency_ms);
        auto forward = [this, bridge_us](Node& out, const Delivery& d) {
            trace_.note(sched_.now(), out.name(), "bridge_in",
                        "ch=" + std::to_string(d.channel.index) + " payload=" + digest8(d.bytes));
            sched_.schedule_after(bridge_us,
                                  [this, &out, d] { transmit(out, d.channel, d.bytes); });
        };
        a.set_on_receive([&b, forward](const Delivery& d) { forward(b, d); });
        b.set_on_receive([&a, forward](const Delivery& d) { forward(a, d); });
    }

    Scheduler& scheduler() { return sched_; }
    std::mt19937_64& rng() { return rng_; }
    EventTrace& trace() { return trace_; }
    const EventTrace& trace() const { return trace_; }

    static std::string digest8(std::span<const std::uint8_t> frame) {
        const auto digest = blake2s_256(frame);
        static const char* hex = "0123456789abcdef";
        std::string out;
        for (int i = 0; i < 4; ++i) {
            out.push_back(hex[digest[i] >> 4]);
            out.push_back(hex[digest[i] & 0x0F]);
        }
        return out;
    }

private:
    static std::string channels_detail(const Node& jammer) {
        std::string out = "channels=";
        for (const auto ch : jammer.jam_channels_) out += std::to_string(ch) + ";";
        return out;
    }

    bool jammed_at(const Node& receiver, ChannelId ch, SimTime from, SimTime to) const {
        for (const auto& node : nodes_) {
            if (node->role() != Role::jammer) continue;
            if (node->position() != receiver.position()) continue;
            if (!node->jam_channels_.contains(ch.index)) continue;
            for (const auto& [on, off] : node->jam_intervals_) {
                if (on <= to && (!off || *off > from)) return true;
            }
        }
        return false;
    }

    Scheduler& sched_;
    std::mt19937_64 rng_;
    SimTime airtime_per_byte_us_;
    bool partitioned_ = false;
    EventTrace trace_;
    std::function<void(const Node&, const Delivery&)> delivery_observer_;
    std::vector<std::unique_ptr<Node>> nodes_;
};

inline void Node::send(ChannelId ch, std::span<const std::uint8_t> frame) {
    medium_->transmit(*this, ch, frame);
}

// ── scenario configuration ───────────────────────────────────────────────────

struct SimConfig {
    std::uint64_t seed = 1;
    bool seed_explicit = false;  // set when a config file or flag pinned the seed
    HopConfig hop{};
    LatencyModel rke_latency{55, 79, 136};
    LatencyModel prke_latency{113, 164, 175};
    LatencyModel attacker_latency{0, 0, 0};
    std::int64_t fob_skew_ms = 0;
    std::int64_t device_skew_ms = 0;
    std::uint64_t duration_ms = 600000;
    double gamma_ms = 0;  // 0 -> use the relevant model's q3
    int messages_per_press = 6;
    std::uint64_t inter_frame_gap_ms = 50;
    std::uint64_t syn_retry_ms = 50;
    std::uint64_t syn_timeout_ms = 400;
    double airtime_per_byte_ms = 0.2;
    std::optional<SecretKey> sk;  // absent -> derived from the seed
    DeviceId device_id{0x4C, 0x53, 0x01, 0x01};

    double rke_gamma() const { return gamma_ms > 0 ? gamma_ms : rke_latency.q3_ms; }
    double prke_gamma() const { return gamma_ms > 0 ? gamma_ms : prke_latency.q3_ms; }

    void validate() const {
        if (!rke_latency.valid()) throw std::invalid_argument("rke_latency: need min <= q3 <= max");
        if (!prke_latency.valid())
            throw std::invalid_argument("prke_latency: need min <= q3 <= max");
        if (!attacker_latency.valid())
            throw std::invalid_argument("attacker_latency: need min <= q3 <= max");
        if (duration_ms == 0) throw std::invalid_argument("duration_ms must be > 0");
        if (hop.period_ms == 0) throw std::invalid_argument("period_ms must be > 0");
        if (hop.channel_count < 1) throw std::invalid_argument("channel_count must be >= 1");
        if (messages_per_press < 1)
            throw std::invalid_argument("messages_per_press must be >= 1");
        if (airtime_per_byte_ms < 0)
            throw std::invalid_argument("airtime_per_byte_ms must be >= 0");
    }
};

inline SecretKey secret_key_for(const SimConfig& cfg) {
    if (cfg.sk) return *cfg.sk;
    std::mt19937_64 rng(cfg.seed ^ 0x6b65796b65796b65ull);  // distinct stream from the medium's
    SecretKey sk;
    for (auto& b : sk.bytes) b = static_cast<std::uint8_t>(rng());
    return sk;
}

}  // namespace laser::sim
