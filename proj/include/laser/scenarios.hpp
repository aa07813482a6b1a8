#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "laser/actors.hpp"
#include "laser/simnet.hpp"
#include "laser/wire.hpp"

namespace laser::scenario {

// Scenario action starts here so negatively skewed clocks never read
// before the epoch.
inline constexpr std::uint64_t kBaseMs = 1'000'000;

inline constexpr Command kDefaultCommand = {0x00, 0x01};

// Keeps a scheduled exchange clear of the hop-period boundary so the whole
// round trip stays inside one channel bucket.
inline std::uint64_t bucket_safe_ms(std::uint64_t at_ms, std::uint64_t period_ms,
                                    std::uint64_t margin_ms = 1000) {
    if (period_ms <= 2 * margin_ms) return at_ms;
    const std::uint64_t phase = at_ms % period_ms;
    if (phase + margin_ms > period_ms) return at_ms + margin_ms + (period_ms - phase);
    if (phase < margin_ms) return at_ms + (margin_ms - phase);
    return at_ms;
}

struct MeasurementResult {
    std::vector<double> latencies_ms;
    std::vector<VerdictKind> verdicts;
    std::string trace_csv;
};

// Legitimate RKE presses against an unconstrained threshold: the device
// accepts everything and we log each frame's apparent age, exactly the
// dataset the threshold is later estimated from.
inline MeasurementResult run_rke_measurement(const sim::SimConfig& cfg, int trials) {
    cfg.validate();
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");

    sim::Scheduler sched;
    sim::Medium medium(sched, cfg.seed, cfg.airtime_per_byte_ms);
    const SecretKey sk = secret_key_for(cfg);

    sim::Node& fob_node = medium.add_node({.name = "fob",
                                           .role = sim::Role::fob,
                                           .pos = sim::Position::near_fob,
                                           .clock_skew_ms = cfg.fob_skew_ms,
                                           .sampler = sim::model_sampler(cfg.rke_latency)});
    sim::Node& dev_node = medium.add_node({.name = "device",
                                           .role = sim::Role::device,
                                           .pos = sim::Position::near_device,
                                           .clock_skew_ms = cfg.device_skew_ms,
                                           .listen = sim::FollowHops{sk, cfg.hop}});

    Fob fob({sk, cfg.device_id, cfg.hop, 1}, fob_node.clock(), fob_node);
    Device device({sk, cfg.device_id, cfg.hop, 1e15}, dev_node.clock(), dev_node);

    MeasurementResult result;
    dev_node.set_on_receive([&](const sim::Delivery& d) {
        const auto decoded = decode_frame(d.bytes);
        if (!std::holds_alternative<Frame>(decoded)) return;
        const auto* m = std::get_if<RkeMessage>(&std::get<Frame>(decoded));
        if (!m) return;
        const Timestamp t_end = dev_node.clock().now_ms();
        const Verdict v = device.on_rke(*m, d.channel, t_end);
        medium.trace().note(sched.now(), "device", "verdict", to_string(v.kind));
        result.verdicts.push_back(v.kind);
        if (v.kind == VerdictKind::accept) {
            result.latencies_ms.push_back(static_cast<double>(t_end - m->t_start));
        }
    });

    for (int k = 0; k < trials; ++k) {
        const std::uint64_t at_ms = kBaseMs + 1000ull * static_cast<std::uint64_t>(k);
        sched.schedule_at(sim::ms_to_us(at_ms), [&fob] { fob.press_once(kDefaultCommand); });
    }
    sched.run_until_idle();
    result.trace_csv = medium.trace().to_csv();
    return result;
}

// Legitimate PRKE exchanges. The summary row the dataset reproduces was
// measured over whole challenge/response round trips, so each trial draws
// one round-trip latency and splits it across the SYN and response legs.
inline MeasurementResult run_prke_measurement(const sim::SimConfig& cfg, int trials) {
    cfg.validate();
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");

    sim::Scheduler sched;
    sim::Medium medium(sched, cfg.seed, cfg.airtime_per_byte_ms);
    const SecretKey sk = secret_key_for(cfg);

    sim::Node& fob_node = medium.add_node({.name = "fob",
                                           .role = sim::Role::fob,
                                           .pos = sim::Position::near_fob,
                                           .clock_skew_ms = cfg.fob_skew_ms,
                                           .listen = sim::FollowHops{sk, cfg.hop}});
    sim::Node& dev_node = medium.add_node({.name = "device",
                                           .role = sim::Role::device,
                                           .pos = sim::Position::near_device,
                                           .clock_skew_ms = cfg.device_skew_ms,
                                           .listen = sim::FollowHops{sk, cfg.hop}});

    Fob fob({sk, cfg.device_id, cfg.hop, 1}, fob_node.clock(), fob_node);
    Device device({sk, cfg.device_id, cfg.hop, 1e15}, dev_node.clock(), dev_node);

    fob_node.set_on_receive([&](const sim::Delivery& d) {
        const auto decoded = decode_frame(d.bytes);
        if (!std::holds_alternative<Frame>(decoded)) return;
        if (const auto* syn = std::get_if<PrkeSyn>(&std::get<Frame>(decoded))) {
            fob.on_syn(*syn);
        }
    });

    MeasurementResult result;
    Timestamp trigger_ms = 0;
    dev_node.set_on_receive([&](const sim::Delivery& d) {
        const auto decoded = decode_frame(d.bytes);
        if (!std::holds_alternative<Frame>(decoded)) return;
        const auto* r = std::get_if<PrkeResponse>(&std::get<Frame>(decoded));
        if (!r) return;
        const Timestamp now = dev_node.clock().now_ms();
        const auto v = device.on_prke_response(*r);
        if (!v) return;
        medium.trace().note(sched.now(), "device", "verdict", to_string(v->kind));
        result.verdicts.push_back(v->kind);
        if (v->kind == VerdictKind::accept) {
            result.latencies_ms.push_back(static_cast<double>(now - trigger_ms));
        }
    });

    std::mt19937_64 trial_rng(cfg.seed ^ 0x70726b65ull);
    std::uint64_t prev_at_ms = 0;
    for (int k = 0; k < trials; ++k) {
        std::uint64_t at_ms = bucket_safe_ms(kBaseMs + 1000ull * static_cast<std::uint64_t>(k),
                                             cfg.hop.period_ms);
        // bucket-safety shifts must not stack trials onto each other
        at_ms = std::max(at_ms, prev_at_ms + 600);
        prev_at_ms = at_ms;
        const double roundtrip = sample_latency(cfg.prke_latency, trial_rng);
        sched.schedule_at(sim::ms_to_us(at_ms), [&, roundtrip] {
            const sim::SimTime rt_us = sim::ms_to_us(roundtrip);
            const sim::SimTime syn_leg = rt_us / 2;
            dev_node.set_sampler(sim::fixed_sampler(static_cast<double>(syn_leg) / 1000.0));
            fob_node.set_sampler(
                sim::fixed_sampler(static_cast<double>(rt_us - syn_leg) / 1000.0));
            device.end_prke_session();
            trigger_ms = dev_node.clock().now_ms();
            device.prke_trigger();
        });
    }
    sched.run_until_idle();
    result.trace_csv = medium.trace().to_csv();
    return result;
}

struct SyncRecoveryResult {
    std::vector<VerdictKind> first_press;
    std::vector<VerdictKind> retry_press;
    bool corrected = false;
    bool recovered = false;
    std::string trace_csv;
};

// A skewed fob presses, earns a sync instead of an accept, corrects its
// clock from the reply, and presses again. The gamma in cfg must absorb the
// residual skew a correction leaves behind (one sync flight) plus the retry
// frame's own latency.
inline SyncRecoveryResult run_sync_recovery(const sim::SimConfig& cfg) {
    cfg.validate();
    sim::Scheduler sched;
    sim::Medium medium(sched, cfg.seed, cfg.airtime_per_byte_ms);
    const SecretKey sk = secret_key_for(cfg);

    sim::Node& fob_node = medium.add_node({.name = "fob",
                                           .role = sim::Role::fob,
                                           .pos = sim::Position::near_fob,
                                           .clock_skew_ms = cfg.fob_skew_ms,
                                           .sampler = sim::model_sampler(cfg.rke_latency),
                                           .listen = sim::FollowHops{sk, cfg.hop}});
    sim::Node& dev_node = medium.add_node({.name = "device",
                                           .role = sim::Role::device,
                                           .pos = sim::Position::near_device,
                                           .clock_skew_ms = cfg.device_skew_ms,
                                           .sampler = sim::model_sampler(cfg.rke_latency),
                                           .listen = sim::FollowHops{sk, cfg.hop}});

    Fob fob({sk, cfg.device_id, cfg.hop, cfg.messages_per_press}, fob_node.clock(), fob_node);
    Device device({sk, cfg.device_id, cfg.hop, cfg.rke_gamma()}, dev_node.clock(), dev_node);

    SyncRecoveryResult result;
    const std::uint64_t retry_at_ms = kBaseMs + 1000;

    fob_node.set_on_receive([&](const sim::Delivery& d) {
        const auto decoded = decode_frame(d.bytes);
        if (!std::holds_alternative<Frame>(decoded)) return;
        if (const auto* s = std::get_if<SyncMessage>(&std::get<Frame>(decoded))) {
            if (fob.on_sync(*s)) {
                result.corrected = true;
                medium.trace().note(sched.now(), "fob", "clock_sync",
                                    "t_sync=" + std::to_string(s->t_sync));
            }
        }
    });
    dev_node.set_on_receive([&](const sim::Delivery& d) {
        const auto decoded = decode_frame(d.bytes);
        if (!std::holds_alternative<Frame>(decoded)) return;
        const auto* m = std::get_if<RkeMessage>(&std::get<Frame>(decoded));
        if (!m) return;
        const Verdict v = device.on_rke(*m, d.channel);
        medium.trace().note(sched.now(), "device", "verdict", to_string(v.kind));
        auto& bucket = sched.now() < sim::ms_to_us(retry_at_ms) ? result.first_press
                                                                : result.retry_press;
        bucket.push_back(v.kind);
        if (&bucket == &result.retry_press && v.kind == VerdictKind::accept) {
            result.recovered = true;
        }
    });

    for (int i = 0; i < cfg.messages_per_press; ++i) {
        const std::uint64_t gap = cfg.inter_frame_gap_ms * static_cast<std::uint64_t>(i);
        sched.schedule_at(sim::ms_to_us(kBaseMs + gap),
                          [&fob] { fob.press_once(kDefaultCommand); });
        sched.schedule_at(sim::ms_to_us(retry_at_ms + gap),
                          [&fob] { fob.press_once(kDefaultCommand); });
    }
    sched.run_until_idle();
    result.trace_csv = medium.trace().to_csv();
    return result;
}

struct PrkeRecoveryResult {
    bool broadcast_sent = false;
    bool corrected = false;
    bool accepted = false;
    std::size_t syn_count = 0;
    std::string trace_csv;
};

// A fob whose clock sits in the wrong hop bucket cannot hear the device's
// SYNs. After the unanswered-SYN timeout the device pushes the signed time
// onto every channel; the fob picks it up on whichever channel it was
// stuck on, corrects, and the next SYN completes normally.
inline PrkeRecoveryResult run_prke_broadcast_recovery(const sim::SimConfig& cfg) {
    cfg.validate();
    sim::Scheduler sched;
    sim::Medium medium(sched, cfg.seed, cfg.airtime_per_byte_ms);
    const SecretKey sk = secret_key_for(cfg);

    const double syn_leg_ms = 56;
    const double resp_leg_ms = 57;
    sim::Node& fob_node = medium.add_node({.name = "fob",
                                           .role = sim::Role::fob,
                                           .pos = sim::Position::near_fob,
                                           .clock_skew_ms = cfg.fob_skew_ms,
                                           .sampler = sim::fixed_sampler(resp_leg_ms),
                                           .listen = sim::FollowHops{sk, cfg.hop}});
    sim::Node& dev_node = medium.add_node({.name = "device",
                                           .role = sim::Role::device,
                                           .pos = sim::Position::near_device,
                                           .clock_skew_ms = cfg.device_skew_ms,
                                           .sampler = sim::fixed_sampler(syn_leg_ms),
                                           .listen = sim::FollowHops{sk, cfg.hop}});

    Fob fob({sk, cfg.device_id, cfg.hop, 1}, fob_node.clock(), fob_node);
    Device device({sk, cfg.device_id, cfg.hop, cfg.prke_gamma()}, dev_node.clock(), dev_node);

    PrkeRecoveryResult result;
    fob_node.set_on_receive([&](const sim::Delivery& d) {
        const auto decoded = decode_frame(d.bytes);
        if (!std::holds_alternative<Frame>(decoded)) return;
        const Frame& frame = std::get<Frame>(decoded);
        if (const auto* syn = std::get_if<PrkeSyn>(&frame)) {
            fob.on_syn(*syn);
        } else if (const auto* s = std::get_if<SyncMessage>(&frame)) {
            if (fob.on_sync(*s)) {
                result.corrected = true;
                medium.trace().note(sched.now(), "fob", "clock_sync",
                                    "t_sync=" + std::to_string(s->t_sync));
            }
        }
    });
    dev_node.set_on_receive([&](const sim::Delivery& d) {
        const auto decoded = decode_frame(d.bytes);
        if (!std::holds_alternative<Frame>(decoded)) return;
        const auto* r = std::get_if<PrkeResponse>(&std::get<Frame>(decoded));
        if (!r) return;
        const auto v = device.on_prke_response(*r);
        if (!v) return;
        medium.trace().note(sched.now(), "device", "verdict", to_string(v->kind));
        if (v->kind == VerdictKind::accept) result.accepted = true;
    });

    const std::uint64_t t0 = bucket_safe_ms(kBaseMs, cfg.hop.period_ms);
    const sim::SimTime hold_until = sim::ms_to_us(t0 + 2000);  // how long the handle is pulled

    // The timeout watchdog re-arms: each expiry without an accepted
    // response broadcasts the signed time and resets the exchange, so a
    // session anchored before the fob's correction cannot wedge the device.
    std::function<void()> watchdog = [&] {
        if (result.accepted || sched.now() > hold_until) return;
        if (device.has_pending_syn()) {
            device.prke_broadcast_sync();
            result.broadcast_sent = true;
        }
        sched.schedule_after(sim::ms_to_us(cfg.syn_timeout_ms), watchdog);
    };
    std::function<void()> pull = [&] {
        if (result.accepted || sched.now() > hold_until) return;
        device.prke_trigger();
        ++result.syn_count;
        sched.schedule_after(sim::ms_to_us(cfg.syn_retry_ms), pull);
    };
    sched.schedule_at(sim::ms_to_us(t0 + cfg.syn_timeout_ms), watchdog);
    sched.schedule_at(sim::ms_to_us(t0), [&] { pull(); });
    sched.run_until_idle();
    result.trace_csv = medium.trace().to_csv();
    return result;
}

}  // namespace laser::scenario
