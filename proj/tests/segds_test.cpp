#include <gtest/gtest.h>

#include <memory>

#include "uavshare/errors.hpp"
#include "uavshare/segds.hpp"

using namespace uavshare;
using namespace uavshare::segds;

namespace {

// Largest-remainder reference computed with plain long division per part.
std::vector<std::uint64_t> hamilton(std::uint64_t total, const std::vector<std::uint64_t>& w) {
    std::uint64_t sum = 0;
    for (auto x : w) sum += x;
    std::vector<std::uint64_t> out;
    std::vector<std::pair<std::uint64_t, std::size_t>> rems;
    std::uint64_t given = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        out.push_back(total * w[i] / sum);
        rems.push_back({total * w[i] % sum, i});
        given += out.back();
    }
    std::stable_sort(rems.begin(), rems.end(), [](auto a, auto b) { return a.first > b.first; });
    for (std::size_t k = 0; given < total; ++k, ++given) ++out[rems[k].second];
    return out;
}

struct Group {
    Drbg rng{11, "segds-test"};
    KeyGenerationCenter kgc = KeyGenerationCenter::setup(128, rng);
    FullKeyPair ch_key, sp_key;
    std::vector<FullKeyPair> member_keys;
    GroupConfig config;
    Bytes content;

    explicit Group(std::size_t n, std::uint64_t size = 1000) {
        ch_key = enroll(kgc, "ch", rng);
        sp_key = enroll(kgc, "sp", rng);
        config.ch = "ch";
        config.sp = "sp";
        config.file_name = "map.tiles";
        config.file_size = size;
        for (std::size_t i = 1; i <= n; ++i) {
            auto id = "uav" + std::to_string(i);
            member_keys.push_back(enroll(kgc, id, rng));
            config.members.push_back(id);
        }
        content = rng.bytes(size);
    }

    Env env() const { return {&kgc.params(), &kgc.registry()}; }
};

struct SimRun {
    Group& g;
    std::unique_ptr<ServiceProvider> sp;
    std::unique_ptr<CoordinatorHead> ch;
    std::vector<std::unique_ptr<GroupMember>> members;
    sim::Simulator sim;

    SimRun(Group& group, std::map<PartyId, MemberBehavior> behavior = {}, sim::AdversaryScript script = {},
           std::uint64_t seed = 5)
        : g(group), sim(seed, std::move(script)) {
        sp = std::make_unique<ServiceProvider>(g.sp_key, g.env(), g.config.timing);
        sp->publish(g.config.file_name, g.content);
        ch = std::make_unique<CoordinatorHead>(g.ch_key, g.env(), g.config);
        sim.add_party("sp", *sp);
        sim.add_party("ch", *ch);
        for (const auto& k : g.member_keys) {
            auto b = behavior.contains(k.id) ? behavior[k.id] : MemberBehavior::Honest;
            members.push_back(std::make_unique<GroupMember>(k, g.env(), g.config, b));
            sim.add_party(k.id, *members.back());
        }
        sim.run();
    }
};

}  // namespace

TEST(SegdsSplit, EqualSplitRemainderToLast) {
    EXPECT_EQ(split_equal(1000, 5), (std::vector<std::uint64_t>{200, 200, 200, 200, 200}));
    EXPECT_EQ(split_equal(1001, 5), (std::vector<std::uint64_t>{200, 200, 200, 200, 201}));
    EXPECT_EQ(split_equal(3, 5), (std::vector<std::uint64_t>{0, 0, 0, 0, 3}));
}

TEST(SegdsSplit, WeightedMatchesLargestRemainderOracle) {
    EXPECT_EQ(split_weighted(1000, std::vector<std::uint64_t>{2, 1, 1, 1}),
              (std::vector<std::uint64_t>{400, 200, 200, 200}));
    Drbg rng(3, "weights");
    for (int t = 0; t < 500; ++t) {
        std::vector<std::uint64_t> w(1 + rng.uniform(9));
        for (auto& x : w) x = rng.uniform(20);
        w[0] += 1;
        auto total = rng.uniform(1'000'000);
        auto got = split_weighted(total, w);
        EXPECT_EQ(got, hamilton(total, w));
        std::uint64_t sum = 0;
        for (auto x : got) sum += x;
        EXPECT_EQ(sum, total);
    }
}

TEST(SegdsSplit, PlanTilesSpanAndSkipsEmptyParts) {
    std::vector<PartyId> who{"a", "b", "c"};
    auto segs = plan_segments({100, 2}, who);
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_EQ(segs[0].range, (ByteRange{100, 2}));
    EXPECT_THROW(plan_segments({0, 10}, std::vector<PartyId>{}), ProtocolError);

    SegmentPlan p{"f", plan_segments({0, 1001}, who)};
    EXPECT_TRUE(p.tiles(1001));
    EXPECT_FALSE(p.tiles(1002));
    EXPECT_EQ(SegmentPlan::decode(p.encode()).segments, p.segments);
}

TEST(SegdsFreshness, WindowIsInclusiveBothWays) {
    EXPECT_TRUE(fresh(1000, 31000, 30000));
    EXPECT_FALSE(fresh(1000, 31001, 30000));
    EXPECT_TRUE(fresh(31000, 1000, 30000));
    EXPECT_FALSE(fresh(31001, 1000, 30000));
}

TEST(SegdsDirect, SetupAgreesOnDataKey) {
    Group g(3);
    ServiceProvider sp(g.sp_key, g.env());
    sp.publish(g.config.file_name, g.content);
    CoordinatorHead ch(g.ch_key, g.env(), g.config);
    auto kd = session_setup(ch, sp, 0, g.rng);
    ASSERT_NE(sp.session_key("ch", g.config.file_name), nullptr);
    EXPECT_EQ(kd, *sp.session_key("ch", g.config.file_name));
}

TEST(SegdsDirect, SetupRejectsUnknownFileAndStaleInit) {
    Group g(2);
    ServiceProvider sp(g.sp_key, g.env());
    CoordinatorHead ch(g.ch_key, g.env(), g.config);
    auto init = ch.begin_setup(0, g.rng);
    try {
        sp.respond_setup(init, 0, g.rng);
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), Error::UnknownFile);
    }
    sp.publish(g.config.file_name, g.content);
    try {
        sp.respond_setup(init, 30'001, g.rng);
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), Error::StaleTimestamp);
    }
}

TEST(SegdsDirect, FullFlowWithoutSimulator) {
    Group g(4, 1001);
    ServiceProvider sp(g.sp_key, g.env());
    sp.publish(g.config.file_name, g.content);
    CoordinatorHead ch(g.ch_key, g.env(), g.config);
    std::vector<std::unique_ptr<GroupMember>> ms;
    for (const auto& k : g.member_keys) ms.push_back(std::make_unique<GroupMember>(k, g.env(), g.config));
    session_setup(ch, sp, 0, g.rng);

    auto m1s = ch.assign_tasks(1, g.rng);
    ASSERT_EQ(m1s.size(), 5u);
    EXPECT_EQ(m1s.back().range, (ByteRange{800, 201}));
    std::vector<M3> shares;
    for (const auto& m1 : m1s) {
        if (m1.member == "ch") {
            shares.push_back(ch.share_own_segment(sp.serve(m1, 2, g.rng), 3, g.rng));
            continue;
        }
        auto& m = *ms[std::stoi(m1.member.substr(3)) - 1];
        shares.push_back(m.share_segment(member_fetch(m, m1, sp, 2, g.rng), 3, g.rng));
    }
    for (const auto& s : shares) {
        auto owner = M2::decode(s.m2_frame).member;
        if (owner != "ch") EXPECT_TRUE(ch.accept_m3(s, 4));
        for (auto& m : ms)
            if (m->id() != owner) m->accept_m3(s, 4);
    }
    ASSERT_TRUE(ch.all_segments_done());
    auto m4 = ch.consolidate(5, g.rng);
    EXPECT_EQ(m4.key_box.boxes.size(), 4u);
    for (auto& m : ms) EXPECT_EQ(m->finalize(M4::decode(m4.encode()), 6), g.content);
}

TEST(SegdsSim, HonestRunDeliversFileToEveryMember) {
    Group g(5, 4096);
    SimRun run(g);
    EXPECT_TRUE(run.ch->consolidated());
    EXPECT_TRUE(run.ch->blacklist().empty());
    for (const auto& m : run.members) {
        ASSERT_TRUE(m->output().has_value()) << m->id();
        EXPECT_EQ(*m->output(), g.content);
    }
    EXPECT_TRUE(run.sim.forgeries().empty());
    EXPECT_TRUE(run.sim.conservation().balanced());
    EXPECT_EQ(run.sim.count_notes("reject"), 0u) << run.sim.transcript();
}

TEST(SegdsSim, CoordinatorAndMemberCostsMatchOperationCount) {
    for (std::size_t n : {2u, 5u, 10u}) {
        Group g(n);
        SimRun run(g);
        auto ch = run.sim.costs().counts("ch");
        EXPECT_EQ(ch.scalar_mults, 8 * n + 11) << n;
        EXPECT_EQ(ch.modexps, 2u);
        EXPECT_EQ(ch.sym_cipher_calls, 1 * n);  // one key box per member
        auto m = run.sim.costs().counts("uav1");
        EXPECT_EQ(m.scalar_mults, 6 * n + 11) << n;
        EXPECT_EQ(m.modexps, 0u);
    }
}

TEST(SegdsSim, FreeRiderIsBlacklistedAndGetsNothing) {
    Group g(5, 5000);
    SimRun run(g, {{"uav3", MemberBehavior::FreeRide}});
    EXPECT_TRUE(run.ch->consolidated());
    EXPECT_TRUE(run.ch->blacklist().contains("uav3"));
    for (const auto& m : run.members) {
        if (m->id() == "uav3") {
            EXPECT_FALSE(m->output().has_value());
            EXPECT_FALSE(m->holds_data_key());
        } else {
            ASSERT_TRUE(m->output().has_value()) << m->id();
            EXPECT_EQ(*m->output(), g.content);
        }
    }
    EXPECT_EQ(run.sim.count_notes("reject", "NoBoxForId"), 1u);
    EXPECT_GE(run.sim.count_notes("reassign"), 1u);
}

TEST(SegdsSim, TamperedResignIsBlacklistedNotForged) {
    Group g(4, 2048);
    SimRun run(g, {{"uav2", MemberBehavior::TamperResign}});
    EXPECT_TRUE(run.ch->blacklist().contains("uav2"));
    EXPECT_EQ(run.sim.count_notes("blacklist", "uav2 reason=sp-signature"), 1u);
    for (const auto& m : run.members)
        if (m->id() != "uav2") EXPECT_EQ(m->output(), std::optional<Bytes>(g.content)) << m->id();
    EXPECT_TRUE(run.sim.forgeries().empty());
}

TEST(SegdsSim, ReplayedM1IsIgnored) {
    Group g(3);
    sim::AdversaryScript s;
    sim::Rule r;
    r.match.type = static_cast<std::uint8_t>(MsgType::M1);
    r.match.nth = 1;
    r.action.kind = sim::ActionKind::Replay;
    r.action.ms = 20;
    s.rules.push_back(r);
    SimRun run(g, {}, s);
    EXPECT_EQ(run.sim.conservation().replayed, 1u);
    EXPECT_GE(run.sim.count_notes("duplicate", "M1"), 1u);
    for (const auto& m : run.members) EXPECT_EQ(m->output(), std::optional<Bytes>(g.content));
}

TEST(SegdsSim, TamperedFramesNeverAccepted) {
    for (auto t : {MsgType::M1, MsgType::M2, MsgType::M3, MsgType::M4}) {
        Group g(3);
        sim::AdversaryScript s;
        sim::Rule r;
        r.match.type = static_cast<std::uint8_t>(t);
        r.action.kind = sim::ActionKind::Tamper;
        s.rules.push_back(r);
        SimRun run(g, {}, s);
        EXPECT_TRUE(run.sim.forgeries().empty()) << msg_type_name(static_cast<std::uint8_t>(t));
        for (const auto& m : run.members)
            if (m->output()) EXPECT_EQ(*m->output(), g.content);
    }
}

TEST(SegdsSim, CrossSessionKeyDoesNotOpenOtherSession) {
    Group g(3);
    SimRun a(g, {}, {}, 5);
    Group g2(3);
    g2.content = g.content;
    SimRun b(g2, {}, {}, 6);
    ASSERT_TRUE(a.ch->data_key() && b.ch->data_key());
    EXPECT_NE(*a.ch->data_key(), *b.ch->data_key());
}

TEST(SegdsFootprint, ContentBytesExcluded) {
    Group g(5, 10'000);
    SimRun run(g);
    const auto& frames = run.sim.first_frames();
    auto m2 = frames.at(static_cast<std::uint8_t>(MsgType::M2));
    auto m3 = frames.at(static_cast<std::uint8_t>(MsgType::M3));
    EXPECT_LT(overhead_bytes(m2), 250u);
    EXPECT_EQ(overhead_bytes(m3) - overhead_bytes(m2), m3.size() - m2.size());
}
