#include "laser/actors.hpp"

#include <gtest/gtest.h>

#include <random>

namespace laser {
namespace {

class ManualClock : public Clock {
public:
    explicit ManualClock(Timestamp t = 0) : now_(t) {}
    Timestamp now_ms() const override { return now_; }
    void set_now_ms(Timestamp t) override { now_ = t; }
    void advance(std::uint64_t d) { now_ += d; }

private:
    Timestamp now_;
};

struct SentFrame {
    ChannelId channel;
    std::vector<std::uint8_t> bytes;
};

class RecordingTransmitter : public Transmitter {
public:
    void send(ChannelId ch, std::span<const std::uint8_t> frame) override {
        sent.push_back({ch, {frame.begin(), frame.end()}});
    }
    std::vector<SentFrame> sent;
};

SecretKey test_key() {
    SecretKey sk;
    for (int i = 0; i < 32; ++i) sk.bytes[i] = static_cast<std::uint8_t>(i * 3 + 1);
    return sk;
}

constexpr DeviceId kId = {0xAB, 0xCD, 0xEF, 0x01};
constexpr Command kUnlock = {0x00, 0x01};

struct FobHarness {
    ManualClock clock;
    RecordingTransmitter tx;
    Fob fob;

    explicit FobHarness(Timestamp t = 1000000, int mpp = 6, HopConfig hop = {})
        : clock(t), fob(Fob::Config{test_key(), kId, hop, mpp}, clock, tx) {}
};

struct DeviceHarness {
    ManualClock clock;
    RecordingTransmitter tx;
    Device device;

    explicit DeviceHarness(Timestamp t = 1000000, double gamma = 79, HopConfig hop = {})
        : clock(t), device(Device::Config{test_key(), kId, hop, gamma}, clock, tx) {}
};

// ── fob RKE press ────────────────────────────────────────────────────────────

TEST(FobPress, DefaultConfigEmitsSixFrames) {
    FobHarness h;
    const auto frames = h.fob.press(kUnlock);
    EXPECT_EQ(frames.size(), 6u);
    EXPECT_EQ(h.tx.sent.size(), 6u);
}

TEST(FobPress, SingleMessageConfig) {
    FobHarness h(1000000, 1);
    EXPECT_EQ(h.fob.press(kUnlock).size(), 1u);
}

TEST(FobPress, FramesWithinOnePeriodShareChannel) {
    FobHarness h;
    const auto frames = h.fob.press(kUnlock);
    for (const auto& [ch, m] : frames) EXPECT_EQ(ch, frames.front().first);
}

TEST(FobPress, EachFrameReadsFreshTimestampAndValidTag) {
    FobHarness h(1000000, 1);
    std::vector<Timestamp> stamps;
    for (int i = 0; i < 3; ++i) {
        const auto [ch, m] = h.fob.press_once(kUnlock);
        EXPECT_EQ(m.tag, derive_auth_tag(test_key(), m.t_start));
        EXPECT_EQ(ch, derive_channel(test_key(), m.t_start, HopConfig{}));
        EXPECT_EQ(m.cmd, kUnlock);
        stamps.push_back(m.t_start);
        h.clock.advance(50);
    }
    EXPECT_EQ(stamps[0] + 50, stamps[1]);
    EXPECT_EQ(stamps[1] + 50, stamps[2]);
}

// ── device RKE verdicts ──────────────────────────────────────────────────────

RkeMessage valid_frame(Timestamp t_start) {
    return RkeMessage{kId, derive_auth_tag(test_key(), t_start), t_start, kUnlock};
}

TEST(DeviceRke, AcceptsFreshAuthenticFrame) {
    DeviceHarness h;
    const auto v = h.device.on_rke(valid_frame(1000000 - 70), ChannelId{0});
    EXPECT_EQ(v.kind, VerdictKind::accept);
    EXPECT_EQ(v.cmd, kUnlock);
    EXPECT_TRUE(h.tx.sent.empty());
}

TEST(DeviceRke, BoundaryLatencyEqualToGammaAccepts) {
    DeviceHarness h;
    EXPECT_EQ(h.device.on_rke(valid_frame(1000000 - 79), ChannelId{0}).kind,
              VerdictKind::accept);
}

TEST(DeviceRke, DuplicateWithinWindowRejected) {
    DeviceHarness h;
    const auto m = valid_frame(1000000 - 10);
    EXPECT_EQ(h.device.on_rke(m, ChannelId{0}).kind, VerdictKind::accept);
    const auto v = h.device.on_rke(m, ChannelId{0});
    EXPECT_EQ(v.kind, VerdictKind::reject_duplicate);
    EXPECT_FALSE(v.cmd.has_value());
}

TEST(DeviceRke, StaleAuthenticFrameTriggersSync) {
    DeviceHarness h;
    const auto v = h.device.on_rke(valid_frame(1000000 - 5000), ChannelId{3});
    EXPECT_EQ(v.kind, VerdictKind::sync_sent);
    EXPECT_FALSE(v.cmd.has_value());
    ASSERT_EQ(h.tx.sent.size(), 1u);
    EXPECT_EQ(h.tx.sent[0].channel, ChannelId{3});  // reply on arrival channel
    const auto decoded = decode_sync(h.tx.sent[0].bytes);
    ASSERT_TRUE(std::holds_alternative<SyncMessage>(decoded));
    const auto& sync = std::get<SyncMessage>(decoded);
    EXPECT_EQ(sync.t_sync, 1000000u);
    EXPECT_EQ(sync.tag, derive_auth_tag(test_key(), sync.t_sync));
}

TEST(DeviceRke, FobClockAheadCountsAsStale) {
    DeviceHarness h;
    EXPECT_EQ(h.device.on_rke(valid_frame(1000000 + 5000), ChannelId{0}).kind,
              VerdictKind::sync_sent);
}

TEST(DeviceRke, BadTagIsSilentlyRejected) {
    DeviceHarness h;
    auto m = valid_frame(1000000 - 10);
    m.tag.bytes[0] ^= 0xFF;
    EXPECT_EQ(h.device.on_rke(m, ChannelId{0}).kind, VerdictKind::reject_bad_tag);
    EXPECT_TRUE(h.tx.sent.empty());  // no sync for unauthenticated frames
}

TEST(DeviceRke, StaleBadTagStillSilent) {
    DeviceHarness h;
    auto m = valid_frame(1000000 - 5000);
    m.tag.bytes[2] ^= 0x01;
    EXPECT_EQ(h.device.on_rke(m, ChannelId{0}).kind, VerdictKind::reject_bad_tag);
    EXPECT_TRUE(h.tx.sent.empty());
}

// Acceptance requires tag AND freshness AND non-duplication; falsify each
// factor independently.
TEST(DeviceRke, AcceptanceConjunction) {
    DeviceHarness h;
    const auto good = valid_frame(1000000 - 20);

    auto bad_tag = good;
    bad_tag.tag.bytes[5] ^= 0x10;
    EXPECT_EQ(h.device.on_rke(bad_tag, ChannelId{0}).kind, VerdictKind::reject_bad_tag);

    EXPECT_EQ(h.device.on_rke(valid_frame(1000000 - 80), ChannelId{0}).kind,
              VerdictKind::sync_sent);

    EXPECT_EQ(h.device.on_rke(good, ChannelId{0}).kind, VerdictKind::accept);
    EXPECT_EQ(h.device.on_rke(good, ChannelId{0}).kind, VerdictKind::reject_duplicate);
}

TEST(DeviceRke, CacheExpiresWithWindow) {
    DeviceHarness h;
    const auto m = valid_frame(1000000 - 10);
    EXPECT_EQ(h.device.on_rke(m, ChannelId{0}).kind, VerdictKind::accept);
    // Past the window the same frame is stale, not a duplicate.
    h.clock.advance(200);
    EXPECT_EQ(h.device.on_rke(m, ChannelId{0}).kind, VerdictKind::sync_sent);
}

// ── fob sync handling ────────────────────────────────────────────────────────

TEST(FobSync, ValidSyncRebasesClock) {
    FobHarness h(1005000);  // fob 5 s ahead of the reference 1000000
    const Timestamp t_sync = 1000000;
    const SyncMessage s{kId, derive_auth_tag(test_key(), t_sync), t_sync};
    EXPECT_TRUE(h.fob.on_sync(s));
    EXPECT_EQ(h.clock.now_ms(), t_sync);
}

TEST(FobSync, ForgedSyncLeavesClockUntouched) {
    FobHarness h(1005000);
    std::mt19937_64 rng(55);
    for (int i = 0; i < 1000; ++i) {
        SyncMessage s{kId, {}, 1000000};
        for (auto& b : s.tag.bytes) b = static_cast<std::uint8_t>(rng());
        if (s.tag == derive_auth_tag(test_key(), s.t_sync)) continue;
        EXPECT_FALSE(h.fob.on_sync(s));
        EXPECT_EQ(h.clock.now_ms(), 1005000u);
    }
}

TEST(FobSync, TamperedTimestampFailsVerification) {
    FobHarness h(1005000);
    SyncMessage s{kId, derive_auth_tag(test_key(), 1000000), 1000001};
    EXPECT_FALSE(h.fob.on_sync(s));
    EXPECT_EQ(h.clock.now_ms(), 1005000u);
}

// ── PRKE exchange ────────────────────────────────────────────────────────────

TEST(DevicePrke, TriggerUsesCurrentHopChannel) {
    DeviceHarness h(1000000, 164);
    const auto trig = h.device.prke_trigger();
    EXPECT_EQ(trig.channel, derive_channel(test_key(), 1000000, HopConfig{}));
    EXPECT_EQ(trig.syn.device_id, kId);
    EXPECT_EQ(trig.started_at, 1000000u);
    ASSERT_EQ(h.tx.sent.size(), 1u);
    const auto frame = decode_prke(h.tx.sent[0].bytes);
    ASSERT_TRUE(std::holds_alternative<PrkeFrame>(frame));
    EXPECT_TRUE(std::holds_alternative<PrkeSyn>(std::get<PrkeFrame>(frame)));
}

TEST(DevicePrke, SingleChannelTriggerOnZero) {
    DeviceHarness h(1000000, 164, HopConfig{.period_ms = 10000, .channel_count = 1});
    EXPECT_EQ(h.device.prke_trigger().channel, ChannelId{0});
}

TEST(DevicePrke, RetransmissionKeepsTimerAnchor) {
    DeviceHarness h(1000000, 164);
    const auto first = h.device.prke_trigger();
    EXPECT_EQ(first.started_at, 1000000u);
    h.clock.advance(50);
    const auto second = h.device.prke_trigger();
    EXPECT_EQ(second.started_at, 1000000u);        // anchor unchanged
    EXPECT_EQ(second.channel, first.channel);      // same period, same channel
    h.device.end_prke_session();
    h.clock.advance(50);
    EXPECT_EQ(h.device.prke_trigger().started_at, 1000100u);  // fresh session
}

TEST(FobPrke, AnswersSynForItsDevice) {
    FobHarness h(1000000);
    const auto resp = h.fob.on_syn(PrkeSyn{kId});
    ASSERT_TRUE(resp.has_value());
    const Timestamp t_p = round_to_period(1000000, HopConfig{}.period_ms);
    EXPECT_EQ(resp->tag, derive_auth_tag(test_key(), t_p));
    EXPECT_EQ(h.tx.sent.size(), 1u);
}

TEST(FobPrke, IgnoresForeignDeviceId) {
    FobHarness h;
    EXPECT_FALSE(h.fob.on_syn(PrkeSyn{{9, 9, 9, 9}}).has_value());
    EXPECT_TRUE(h.tx.sent.empty());
}

TEST(DevicePrke, AcceptsTimelyResponse) {
    DeviceHarness h(1000000, 164);
    h.device.prke_trigger();
    h.clock.advance(157);

    FobHarness fob(1000157);  // synchronized fob
    const auto resp = fob.fob.on_syn(PrkeSyn{kId});
    ASSERT_TRUE(resp.has_value());

    const auto v = h.device.on_prke_response(*resp);
    ASSERT_TRUE(v.has_value());
    EXPECT_EQ(v->kind, VerdictKind::accept);
    EXPECT_FALSE(h.device.has_pending_syn());  // session resolved
}

TEST(DevicePrke, RejectsSlowResponse) {
    DeviceHarness h(1000000, 164);
    h.device.prke_trigger();
    h.clock.advance(175);  // observed worst case, beyond gamma = 164
    const Timestamp t_p = round_to_period(1000175, HopConfig{}.period_ms);
    const auto v = h.device.on_prke_response(PrkeResponse{kId, derive_auth_tag(test_key(), t_p)});
    ASSERT_TRUE(v.has_value());
    EXPECT_EQ(v->kind, VerdictKind::reject_stale);
}

TEST(DevicePrke, BoundaryExchangeTimeAccepts) {
    DeviceHarness h(1000000, 164);
    h.device.prke_trigger();
    h.clock.advance(164);
    const Timestamp t_p = round_to_period(1000164, HopConfig{}.period_ms);
    const auto v = h.device.on_prke_response(PrkeResponse{kId, derive_auth_tag(test_key(), t_p)});
    EXPECT_EQ(v->kind, VerdictKind::accept);
}

TEST(DevicePrke, RejectsWrongBucketTag) {
    DeviceHarness h(1000000, 164);
    h.device.prke_trigger();
    h.clock.advance(100);
    // Fob stuck in the previous period bucket computes a different tag.
    const Timestamp stale_bucket = round_to_period(1000000, 10000) - 10000;
    const auto v =
        h.device.on_prke_response(PrkeResponse{kId, derive_auth_tag(test_key(), stale_bucket)});
    ASSERT_TRUE(v.has_value());
    EXPECT_EQ(v->kind, VerdictKind::reject_bad_tag);
}

TEST(DevicePrke, ResponseWithoutPendingSynIgnored) {
    DeviceHarness h(1000000, 164);
    const Timestamp t_p = round_to_period(1000000, HopConfig{}.period_ms);
    EXPECT_FALSE(
        h.device.on_prke_response(PrkeResponse{kId, derive_auth_tag(test_key(), t_p)}).has_value());
}

TEST(DevicePrke, BroadcastSyncCoversEveryChannel) {
    DeviceHarness h(1000000, 164, HopConfig{.period_ms = 10000, .channel_count = 16});
    h.device.prke_trigger();
    h.tx.sent.clear();
    const auto sent = h.device.prke_broadcast_sync();
    ASSERT_EQ(sent.size(), 16u);
    ASSERT_EQ(h.tx.sent.size(), 16u);
    for (std::uint32_t i = 0; i < 16; ++i) {
        EXPECT_EQ(sent[i].first, ChannelId{i});
        EXPECT_EQ(sent[i].second, sent[0].second);  // same payload everywhere
    }
    EXPECT_EQ(sent[0].second.tag, derive_auth_tag(test_key(), sent[0].second.t_sync));
    EXPECT_FALSE(h.device.has_pending_syn());
}

TEST(DevicePrke, BroadcastSingleChannel) {
    DeviceHarness h(1000000, 164, HopConfig{.period_ms = 10000, .channel_count = 1});
    EXPECT_EQ(h.device.prke_broadcast_sync().size(), 1u);
}

}  // namespace
}  // namespace laser
