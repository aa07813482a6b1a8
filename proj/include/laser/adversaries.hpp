#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "laser/actors.hpp"
#include "laser/scenarios.hpp"
#include "laser/simnet.hpp"
#include "laser/wire.hpp"

namespace laser::attack {

struct VerdictRecord {
    VerdictKind kind;
    std::string frame_from;  // transmitting node of the judged frame
};

struct AttackOutcome {
    std::string kind;
    bool succeeded = false;  // the device executed an attacker-injected command
    std::size_t frames_captured = 0;
    std::vector<std::pair<std::string, double>> timing_breakdown;  // leg name -> ms
    std::vector<VerdictRecord> verdicts;
    std::string trace_csv;

    bool any_verdict(VerdictKind k) const {
        return std::any_of(verdicts.begin(), verdicts.end(),
                           [k](const VerdictRecord& v) { return v.kind == k; });
    }
};

// ── jamming and replay ───────────────────────────────────────────────────────

struct JamReplayParams {
    std::uint64_t replay_delay_ms = 5000;
    bool jamming = true;  // both off = control run (legitimate press only)
    bool replay = true;
};

// The press is jammed at the device while a sniffer next to the victim
// captures every frame; the attacker later re-airs the loot on whatever
// channel the device has hopped to. The strongest capture and channel
// tracking are granted to the attacker, so the outcome isolates the
// freshness check.
inline AttackOutcome run_jam_replay(const sim::SimConfig& cfg, const JamReplayParams& p = {}) {
    cfg.validate();
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
                                           .listen = sim::FollowHops{sk, cfg.hop}});
    sim::Node& sniffer = medium.add_node({.name = "sniffer",
                                          .role = sim::Role::sniffer,
                                          .pos = sim::Position::near_fob,
                                          .clock_skew_ms = cfg.fob_skew_ms,
                                          .listen = sim::FollowHops{sk, cfg.hop}});
    sim::Node& replayer = medium.add_node({.name = "replayer",
                                           .role = sim::Role::relay_endpoint,
                                           .pos = sim::Position::near_device,
                                           .sampler = sim::model_sampler(cfg.attacker_latency)});
    std::set<std::uint32_t> all_channels;
    for (std::uint32_t ch = 0; ch < cfg.hop.channel_count; ++ch) all_channels.insert(ch);
    sim::Node& jammer = medium.add_node({.name = "jammer",
                                         .role = sim::Role::jammer,
                                         .pos = sim::Position::near_device,
                                         .jam_channels = std::move(all_channels)});

    Fob fob({sk, cfg.device_id, cfg.hop, cfg.messages_per_press}, fob_node.clock(), fob_node);
    Device device({sk, cfg.device_id, cfg.hop, cfg.rke_gamma()}, dev_node.clock(), dev_node);

    AttackOutcome outcome;
    outcome.kind = "jam_replay";

    std::vector<std::vector<std::uint8_t>> captures;
    bool capture_window = true;
    sniffer.set_on_receive([&](const sim::Delivery& d) {
        if (capture_window && d.bytes.size() == kRkeFrameSize) captures.push_back(d.bytes);
    });

    dev_node.set_on_receive([&](const sim::Delivery& d) {
        const auto decoded = decode_frame(d.bytes);
        if (!std::holds_alternative<Frame>(decoded)) return;
        const auto* m = std::get_if<RkeMessage>(&std::get<Frame>(decoded));
        if (!m) return;
        const Verdict v = device.on_rke(*m, d.channel);
        medium.trace().note(sched.now(), "device", "verdict",
                            std::string(to_string(v.kind)) + " from=" + d.from);
        outcome.verdicts.push_back({v.kind, d.from});
        if (v.kind == VerdictKind::accept && d.from == "replayer") outcome.succeeded = true;
    });

    const std::uint64_t press_at = scenario::kBaseMs;
    const std::uint64_t press_span =
        cfg.inter_frame_gap_ms * static_cast<std::uint64_t>(cfg.messages_per_press);

    if (p.jamming) {
        sched.schedule_at(sim::ms_to_us(press_at - 10), [&] { medium.jam_start(jammer); });
        sched.schedule_at(sim::ms_to_us(press_at + press_span + 500),
                          [&] { medium.jam_stop(jammer); });
    }
    for (int i = 0; i < cfg.messages_per_press; ++i) {
        const std::uint64_t gap = cfg.inter_frame_gap_ms * static_cast<std::uint64_t>(i);
        sched.schedule_at(sim::ms_to_us(press_at + gap),
                          [&fob] { fob.press_once(scenario::kDefaultCommand); });
    }
    if (p.replay) {
        sched.schedule_at(sim::ms_to_us(press_at + p.replay_delay_ms), [&] {
            capture_window = false;
            std::uint64_t offset = 0;
            for (const auto& bytes : captures) {
                sched.schedule_after(sim::ms_to_us(offset), [&, bytes] {
                    // re-air on the device's current hop channel
                    const ChannelId ch = derive_channel(sk, dev_node.clock().now_ms(), cfg.hop);
                    replayer.send(ch, bytes);
                });
                offset += cfg.inter_frame_gap_ms;
            }
        });
    }
    sched.run_until_idle();
    outcome.frames_captured = captures.size();
    outcome.trace_csv = medium.trace().to_csv();
    return outcome;
}

// ── relay attacks ────────────────────────────────────────────────────────────

struct RelayRkeParams {
    double bridge_latency_ms = 10.5;
    std::optional<double> fob_leg_ms;  // force t_FA1 (defaults to the rke model)
    std::optional<double> a2_leg_ms;   // force t_A2D (defaults to the attacker model)
};

// Fob and device sit out of each other's range (partitioned field); the
// bridge hauls frames across. Verdicts depend purely on whether the
// accumulated path beats gamma.
inline AttackOutcome run_relay_rke(const sim::SimConfig& cfg, const RelayRkeParams& p = {}) {
    cfg.validate();
    sim::Scheduler sched;
    sim::Medium medium(sched, cfg.seed, cfg.airtime_per_byte_ms);
    medium.set_partitioned(true);
    const SecretKey sk = secret_key_for(cfg);

    const sim::LatencySampler fob_leg = p.fob_leg_ms ? sim::fixed_sampler(*p.fob_leg_ms)
                                                     : sim::model_sampler(cfg.rke_latency);
    const sim::LatencySampler a2_leg = p.a2_leg_ms ? sim::fixed_sampler(*p.a2_leg_ms)
                                                   : sim::model_sampler(cfg.attacker_latency);

    sim::Node& fob_node = medium.add_node({.name = "fob",
                                           .role = sim::Role::fob,
                                           .pos = sim::Position::near_fob,
                                           .clock_skew_ms = cfg.fob_skew_ms,
                                           .sampler = fob_leg});
    sim::Node& a1 = medium.add_node({.name = "relay_a1",
                                     .role = sim::Role::relay_endpoint,
                                     .pos = sim::Position::near_fob,
                                     .sampler = sim::model_sampler(cfg.attacker_latency),
                                     .listen = sim::FollowHops{sk, cfg.hop}});
    sim::Node& a2 = medium.add_node({.name = "relay_a2",
                                     .role = sim::Role::relay_endpoint,
                                     .pos = sim::Position::near_device,
                                     .sampler = a2_leg,
                                     .listen = sim::FollowHops{sk, cfg.hop}});
    sim::Node& dev_node = medium.add_node({.name = "device",
                                           .role = sim::Role::device,
                                           .pos = sim::Position::near_device,
                                           .listen = sim::FollowHops{sk, cfg.hop}});
    medium.make_relay_bridge(a1, a2, p.bridge_latency_ms);

    Fob fob({sk, cfg.device_id, cfg.hop, 1}, fob_node.clock(), fob_node);
    Device device({sk, cfg.device_id, cfg.hop, cfg.rke_gamma()}, dev_node.clock(), dev_node);

    AttackOutcome outcome;
    outcome.kind = "relay_rke";

    medium.set_delivery_observer([&](const sim::Node& receiver, const sim::Delivery& d) {
        if (receiver.role() == sim::Role::relay_endpoint) ++outcome.frames_captured;
        if (d.bytes.size() != kRkeFrameSize) return;
        if (receiver.name() == "relay_a1" && d.from == "fob") {
            outcome.timing_breakdown.emplace_back("t_fa1", d.latency_ms());
            outcome.timing_breakdown.emplace_back("t_a1a2", p.bridge_latency_ms);
        } else if (receiver.name() == "device" && d.from == "relay_a2") {
            outcome.timing_breakdown.emplace_back("t_a2d", d.latency_ms());
        }
    });
    dev_node.set_on_receive([&](const sim::Delivery& d) {
        const auto decoded = decode_frame(d.bytes);
        if (!std::holds_alternative<Frame>(decoded)) return;
        const auto* m = std::get_if<RkeMessage>(&std::get<Frame>(decoded));
        if (!m) return;
        const Verdict v = device.on_rke(*m, d.channel);
        medium.trace().note(sched.now(), "device", "verdict",
                            std::string(to_string(v.kind)) + " from=" + d.from);
        outcome.verdicts.push_back({v.kind, d.from});
        if (v.kind == VerdictKind::accept) outcome.succeeded = true;
    });

    const std::uint64_t press_at =
        scenario::bucket_safe_ms(scenario::kBaseMs, cfg.hop.period_ms);
    sched.schedule_at(sim::ms_to_us(press_at),
                      [&fob] { fob.press_once(scenario::kDefaultCommand); });
    sched.run_until_idle();
    outcome.trace_csv = medium.trace().to_csv();
    return outcome;
}

struct RelayPrkeParams {
    double bridge_latency_ms = 10.5;
    std::optional<double> honest_roundtrip_ms;  // force t_DA2 + t_FA1 (else prke model draw)
    std::optional<double> a1_leg_ms;            // force t_A1F
    std::optional<double> a2_leg_ms;            // force t_A2D
};

// Full relayed challenge/response: SYN out through the bridge, response
// back the same way; six legs accumulate into the exchange time the device
// checks.
inline AttackOutcome run_relay_prke(const sim::SimConfig& cfg, const RelayPrkeParams& p = {}) {
    cfg.validate();
    sim::Scheduler sched;
    sim::Medium medium(sched, cfg.seed, cfg.airtime_per_byte_ms);
    medium.set_partitioned(true);
    const SecretKey sk = secret_key_for(cfg);

    // the legit legs share one round-trip draw, split down the middle
    std::mt19937_64 leg_rng(cfg.seed ^ 0x72656c6179ull);
    const double roundtrip = p.honest_roundtrip_ms ? *p.honest_roundtrip_ms
                                                   : sample_latency(cfg.prke_latency, leg_rng);
    const sim::SimTime rt_us = sim::ms_to_us(roundtrip);
    const double syn_leg_ms = static_cast<double>(rt_us / 2) / 1000.0;
    const double resp_leg_ms = static_cast<double>(rt_us - rt_us / 2) / 1000.0;

    const sim::LatencySampler a1_leg = p.a1_leg_ms ? sim::fixed_sampler(*p.a1_leg_ms)
                                                   : sim::model_sampler(cfg.attacker_latency);
    const sim::LatencySampler a2_leg = p.a2_leg_ms ? sim::fixed_sampler(*p.a2_leg_ms)
                                                   : sim::model_sampler(cfg.attacker_latency);

    sim::Node& dev_node = medium.add_node({.name = "device",
                                           .role = sim::Role::device,
                                           .pos = sim::Position::near_device,
                                           .sampler = sim::fixed_sampler(syn_leg_ms),
                                           .listen = sim::FollowHops{sk, cfg.hop}});
    sim::Node& a2 = medium.add_node({.name = "relay_a2",
                                     .role = sim::Role::relay_endpoint,
                                     .pos = sim::Position::near_device,
                                     .sampler = a2_leg,
                                     .listen = sim::FollowHops{sk, cfg.hop}});
    sim::Node& a1 = medium.add_node({.name = "relay_a1",
                                     .role = sim::Role::relay_endpoint,
                                     .pos = sim::Position::near_fob,
                                     .sampler = a1_leg,
                                     .listen = sim::FollowHops{sk, cfg.hop}});
    sim::Node& fob_node = medium.add_node({.name = "fob",
                                           .role = sim::Role::fob,
                                           .pos = sim::Position::near_fob,
                                           .clock_skew_ms = cfg.fob_skew_ms,
                                           .sampler = sim::fixed_sampler(resp_leg_ms),
                                           .listen = sim::FollowHops{sk, cfg.hop}});
    medium.make_relay_bridge(a1, a2, p.bridge_latency_ms);

    Fob fob({sk, cfg.device_id, cfg.hop, 1}, fob_node.clock(), fob_node);
    Device device({sk, cfg.device_id, cfg.hop, cfg.prke_gamma()}, dev_node.clock(), dev_node);

    AttackOutcome outcome;
    outcome.kind = "relay_prke";

    medium.set_delivery_observer([&](const sim::Node& receiver, const sim::Delivery& d) {
        if (receiver.role() == sim::Role::relay_endpoint) ++outcome.frames_captured;
        if (d.bytes.size() != kPrkeFrameSize) return;
        if (receiver.name() == "relay_a2" && d.from == "device") {
            outcome.timing_breakdown.emplace_back("t_da2", d.latency_ms());
            outcome.timing_breakdown.emplace_back("t_a2a1", p.bridge_latency_ms);
        } else if (receiver.name() == "fob" && d.from == "relay_a1") {
            outcome.timing_breakdown.emplace_back("t_a1f", d.latency_ms());
        } else if (receiver.name() == "relay_a1" && d.from == "fob") {
            outcome.timing_breakdown.emplace_back("t_fa1", d.latency_ms());
            outcome.timing_breakdown.emplace_back("t_a1a2", p.bridge_latency_ms);
        } else if (receiver.name() == "device" && d.from == "relay_a2") {
            outcome.timing_breakdown.emplace_back("t_a2d", d.latency_ms());
        }
    });

    fob_node.set_on_receive([&](const sim::Delivery& d) {
        const auto decoded = decode_frame(d.bytes);
        if (!std::holds_alternative<Frame>(decoded)) return;
        if (const auto* syn = std::get_if<PrkeSyn>(&std::get<Frame>(decoded))) fob.on_syn(*syn);
    });
    dev_node.set_on_receive([&](const sim::Delivery& d) {
        const auto decoded = decode_frame(d.bytes);
        if (!std::holds_alternative<Frame>(decoded)) return;
        const auto* r = std::get_if<PrkeResponse>(&std::get<Frame>(decoded));
        if (!r) return;
        const auto v = device.on_prke_response(*r);
        if (!v) return;
        medium.trace().note(sched.now(), "device", "verdict",
                            std::string(to_string(v->kind)) + " from=" + d.from);
        outcome.verdicts.push_back({v->kind, d.from});
        if (v->kind == VerdictKind::accept) outcome.succeeded = true;
    });

    const std::uint64_t trigger_at =
        scenario::bucket_safe_ms(scenario::kBaseMs, cfg.hop.period_ms);
    sched.schedule_at(sim::ms_to_us(trigger_at), [&device] { device.prke_trigger(); });
    sched.run_until_idle();
    outcome.trace_csv = medium.trace().to_csv();
    return outcome;
}

// ── jamming denial of service ────────────────────────────────────────────────

struct DosOutcome {
    std::size_t presses = 0;
    std::size_t blocked = 0;  // presses whose every frame was destroyed
    double blocked_fraction = 0;
    std::string trace_csv;
};

// Continuous jamming of a channel subset while the victim presses at random
// times across many hop periods. A press survives if any one of its frames
// lands on an unjammed channel.
inline DosOutcome run_dos(const sim::SimConfig& cfg, const std::set<std::uint32_t>& jammed,
                          int presses) {
    cfg.validate();
    if (presses < 1) throw std::invalid_argument("presses must be >= 1");
    for (const auto ch : jammed) {
        if (ch >= cfg.hop.channel_count) {
            throw std::invalid_argument("jammed channel " + std::to_string(ch) +
                                        " outside [0, " +
                                        std::to_string(cfg.hop.channel_count) + ")");
        }
    }

    sim::Scheduler sched;
    sim::Medium medium(sched, cfg.seed, cfg.airtime_per_byte_ms);
    const SecretKey sk = secret_key_for(cfg);

    sim::Node& fob_node = medium.add_node({.name = "fob",
                                           .role = sim::Role::fob,
                                           .pos = sim::Position::near_fob,
                                           .sampler = sim::model_sampler(cfg.rke_latency)});
    sim::Node& dev_node = medium.add_node({.name = "device",
                                           .role = sim::Role::device,
                                           .pos = sim::Position::near_device,
                                           .listen = sim::FollowHops{sk, cfg.hop}});
    sim::Node& jammer = medium.add_node({.name = "jammer",
                                         .role = sim::Role::jammer,
                                         .pos = sim::Position::near_device,
                                         .jam_channels = jammed});

    Fob fob({sk, cfg.device_id, cfg.hop, cfg.messages_per_press}, fob_node.clock(), fob_node);
    Device device({sk, cfg.device_id, cfg.hop, 1e15}, dev_node.clock(), dev_node);

    // press start times: uniform over the scenario window, then nudged
    // apart so bursts never interleave and frame timestamps stay unique
    std::mt19937_64 press_rng(cfg.seed ^ 0x646f73ull);
    std::vector<std::uint64_t> press_times(static_cast<std::size_t>(presses));
    std::uniform_int_distribution<std::uint64_t> in_window(0, cfg.duration_ms - 1);
    for (auto& t : press_times) t = scenario::kBaseMs + in_window(press_rng);
    std::sort(press_times.begin(), press_times.end());
    const std::uint64_t spacing =
        cfg.inter_frame_gap_ms * static_cast<std::uint64_t>(cfg.messages_per_press + 1);
    for (std::size_t i = 1; i < press_times.size(); ++i) {
        press_times[i] = std::max(press_times[i], press_times[i - 1] + spacing);
    }

    std::unordered_map<Timestamp, std::size_t> press_of_tstart;
    std::vector<bool> delivered(static_cast<std::size_t>(presses), false);
    dev_node.set_on_receive([&](const sim::Delivery& d) {
        const auto decoded = decode_frame(d.bytes);
        if (!std::holds_alternative<Frame>(decoded)) return;
        const auto* m = std::get_if<RkeMessage>(&std::get<Frame>(decoded));
        if (!m) return;
        (void)device.on_rke(*m, d.channel);
        if (const auto it = press_of_tstart.find(m->t_start); it != press_of_tstart.end()) {
            delivered[it->second] = true;
        }
    });

    medium.jam_start(jammer);
    for (std::size_t k = 0; k < press_times.size(); ++k) {
        for (int i = 0; i < cfg.messages_per_press; ++i) {
            const std::uint64_t at =
                press_times[k] + cfg.inter_frame_gap_ms * static_cast<std::uint64_t>(i);
            press_of_tstart[at] = k;
            sched.schedule_at(sim::ms_to_us(at),
                              [&fob] { fob.press_once(scenario::kDefaultCommand); });
        }
    }
    sched.run_until_idle();

    DosOutcome outcome;
    outcome.presses = static_cast<std::size_t>(presses);
    outcome.blocked = static_cast<std::size_t>(
        std::count(delivered.begin(), delivered.end(), false));
    outcome.blocked_fraction =
        static_cast<double>(outcome.blocked) / static_cast<double>(presses);
    outcome.trace_csv = medium.trace().to_csv();
    return outcome;
}

}  // namespace laser::attack
