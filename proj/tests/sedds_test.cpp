#include <gtest/gtest.h>

#include <memory>

#include "uavshare/errors.hpp"
#include "uavshare/sedds.hpp"

using namespace uavshare;
using namespace uavshare::sedds;

namespace {

const std::string kFile = "survey.bin";

Digest xor_oracle(const Digest& a, const Digest& b) {
    Digest out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>(a[i] ^ b[i]);
    return out;
}

struct World {
    Drbg rng{21, "sedds-test"};
    KeyGenerationCenter kgc = KeyGenerationCenter::setup(128, rng);
    FullKeyPair ue_key = enroll(kgc, "ue1", rng);
    FullKeyPair uav_key = enroll(kgc, "uav1", rng);
    FullKeyPair sp_key = enroll(kgc, "sp", rng);
    Bytes content = rng.bytes(2000);
    SignedContent signed_content = sp_sign_content(kgc.params(), sp_key, kFile, content, rng);
    PaymentLedger ledger;
    SessionConfig config;

    Env env() const { return {&kgc.params(), &kgc.registry()}; }
};

struct Session {
    World& w;
    Ausf ausf;
    UserEquipment ue;
    UavNode uav;
    sim::Simulator sim;

    Session(World& world, UeBehavior ub = UeBehavior::Honest, UavBehavior vb = UavBehavior::Honest,
        sim::AdversaryScript script = {}, bool go = true)
        : w(world),
          ausf(w.kgc, w.ledger, "sp"),
          ue(w.ue_key, w.env(), w.config, w.ledger, ub),
          uav(w.uav_key, w.env(), w.config, vb),
          sim(3, std::move(script)) {
        ausf.register_original(kFile, w.content);
        uav.cache(kFile, w.signed_content);
        ue.want("uav1", kFile);
        sim.add_party("ue1", ue);
        sim.add_party("uav1", uav);
        sim.add_party("ausf", ausf);
        if (go) sim.run();
    }
};

sim::AdversaryScript rule(MsgType t, sim::Action a, std::optional<std::uint32_t> nth = std::nullopt) {
    sim::Rule r;
    r.match.type = static_cast<std::uint8_t>(t);
    r.match.nth = nth;
    r.action = std::move(a);
    return {{r}};
}

}  // namespace

TEST(SeddsBinding, XorOfDigestsMatchesBytewiseOracle) {
    Bytes blob{1, 2, 3};
    EXPECT_EQ(file_binding("f", blob), xor_oracle(sha256(to_bytes("f")), sha256(blob)));
    EXPECT_NE(file_binding("f", blob), file_binding("g", blob));
}

TEST(SeddsDirect, RequestsUseFreshShares) {
    World w;
    UserEquipment ue(w.ue_key, w.env(), w.config, w.ledger);
    auto a = ue.request("uav1", kFile, 0, w.rng);
    auto b = ue.request("uav1", kFile, 1, w.rng);
    EXPECT_NE(a.ga, b.ga);
    EXPECT_EQ(Req::decode(a.encode()).body(), a.body());
}

TEST(SeddsDirect, HonestStepsAndKeyWithheld) {
    World w;
    UserEquipment ue(w.ue_key, w.env(), w.config, w.ledger);
    UavNode uav(w.uav_key, w.env(), w.config);
    uav.cache(kFile, w.signed_content);
    auto req = ue.request("uav1", kFile, 0, w.rng);
    auto data = uav.respond(Req::decode(req.encode()), 1, w.rng);
    EXPECT_EQ(data.m_prime.size(), w.content.size() + kSymOverhead);
    EXPECT_TRUE(ue.received().empty());
    auto hint = ue.hint(Data::decode(data.encode()), 2, w.rng);
    EXPECT_EQ(w.ledger.entry("ue1", kFile).state, PaymentState::Prepaid);
    EXPECT_EQ(w.ledger.entry("ue1", kFile).percent, 20);
    auto kr = uav.release_key(Hint::decode(hint.encode()), 3, w.rng);
    auto ack = ue.finalize(KeyRel::decode(kr.encode()), 4, w.rng);
    EXPECT_EQ(ue.received().at(kFile), w.content);
    EXPECT_EQ(ack.x2, file_binding(kFile, w.content));
    EXPECT_EQ(ack.ti, hint.ti);
}

TEST(SeddsDirect, ForgedRequestAndRevokedUeRejected) {
    World w;
    UserEquipment ue(w.ue_key, w.env(), w.config, w.ledger);
    UavNode uav(w.uav_key, w.env(), w.config);
    uav.cache(kFile, w.signed_content);
    auto req = ue.request("uav1", kFile, 0, w.rng);
    auto forged = req;
    forged.file_name = "other";
    try {
        uav.respond(forged, 0, w.rng);
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), Error::AuthFailure);
    }
    w.kgc.revoke("ue1");
    try {
        uav.respond(req, 0, w.rng);
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), Error::BlacklistedId);
    }
}

TEST(SeddsDirect, UnknownFileAndStaleRequest) {
    World w;
    UserEquipment ue(w.ue_key, w.env(), w.config, w.ledger);
    UavNode uav(w.uav_key, w.env(), w.config);
    auto req = ue.request("uav1", kFile, 0, w.rng);
    try {
        uav.respond(req, 0, w.rng);
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), Error::UnknownFile);
    }
    uav.cache(kFile, w.signed_content);
    try {
        uav.respond(req, 30'001, w.rng);
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), Error::StaleTimestamp);
    }
}

TEST(SeddsDirect, HintOverOtherCiphertextMismatches) {
    World w;
    UserEquipment ue(w.ue_key, w.env(), w.config, w.ledger);
    UavNode uav(w.uav_key, w.env(), w.config);
    uav.cache(kFile, w.signed_content);
    auto data = uav.respond(ue.request("uav1", kFile, 0, w.rng), 1, w.rng);
    auto hint = ue.hint(data, 2, w.rng);
    hint.x1 = file_binding(kFile, Bytes{9, 9, 9});
    hint.sig = sign(w.kgc.params(), w.ue_key, hint.body(), w.rng);
    try {
        uav.release_key(hint, 3, w.rng);
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), Error::HintMismatch);
    }
}

TEST(SeddsDirect, WrongKeyShareFailsDecryption) {
    World w;
    UserEquipment ue(w.ue_key, w.env(), w.config, w.ledger);
    UavNode uav(w.uav_key, w.env(), w.config);
    uav.cache(kFile, w.signed_content);
    auto data = uav.respond(ue.request("uav1", kFile, 0, w.rng), 1, w.rng);
    auto kr = uav.release_key(ue.hint(data, 2, w.rng), 3, w.rng);
    kr.gb = dh_exp(DhElement::generator(), Scalar::from_u64(12345)).encode();
    kr.sig = sign(w.kgc.params(), w.uav_key, kr.body(), w.rng);
    try {
        ue.finalize(kr, 4, w.rng);
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), Error::DecryptFailure);
    }
    EXPECT_TRUE(ue.received().empty());
}

TEST(SeddsLedger, TransitionsAreMonotone) {
    PaymentLedger l;
    EXPECT_FALSE(l.settle("u", "f"));
    EXPECT_TRUE(l.prepay("u", "f", 20));
    EXPECT_TRUE(l.prepay("u", "f", 50));
    EXPECT_EQ(l.entry("u", "f").percent, 20);
    EXPECT_TRUE(l.settle("u", "f"));
    EXPECT_FALSE(l.refund("u", "f"));
    EXPECT_FALSE(l.prepay("u", "f", 20));
    EXPECT_EQ(l.entry("u", "f").state, PaymentState::Settled);
    EXPECT_THROW(l.prepay("v", "f", 0), std::invalid_argument);
    EXPECT_THROW(l.prepay("v", "f", 100), std::invalid_argument);
    EXPECT_EQ(l.export_text(), "u,f,settled,100\n");
}

TEST(SeddsSim, HonestRunSettlesAndMatchesCounts) {
    World w;
    Session r(w);
    EXPECT_EQ(r.ue.received().at(kFile), w.content);
    EXPECT_EQ(w.ledger.entry("ue1", kFile).state, PaymentState::Settled);
    ASSERT_EQ(r.ausf.verdicts().size(), 1u);
    EXPECT_EQ(r.ausf.verdicts()[0].outcome, Outcome::SuccessfulTransfer);
    auto ue = r.sim.costs().counts("ue1");
    auto uav = r.sim.costs().counts("uav1");
    EXPECT_EQ(ue.scalar_mults, 12u);
    EXPECT_EQ(ue.modexps, 2u);
    EXPECT_EQ(ue.sym_cipher_calls, 1u);
    EXPECT_EQ(uav.scalar_mults, 8u);
    EXPECT_EQ(uav.modexps, 2u);
    EXPECT_EQ(uav.sym_cipher_calls, 1u);
    EXPECT_EQ(r.sim.costs().counts("ausf").scalar_mults, 3u);
    EXPECT_TRUE(r.sim.forgeries().empty());
    EXPECT_EQ(r.sim.count_notes("reject"), 0u) << r.sim.transcript();
}

TEST(SeddsSim, FreeRiderHoldsOnlyCiphertextAndPaysNothing) {
    World w;
    Session r(w, UeBehavior::FreeRide);
    EXPECT_TRUE(r.ue.received().empty());
    EXPECT_EQ(r.ue.held_ciphertexts(), 0u);  // session expired with the ciphertext
    EXPECT_EQ(r.uav.keys_released(), 0u);
    EXPECT_EQ(w.ledger.entry("ue1", kFile).state, PaymentState::None);
    EXPECT_EQ(r.sim.count_notes("abort"), 1u);
}

TEST(SeddsSim, SubstitutedContentIsRefundedAndUavPenalised) {
    World w;
    Session r(w, UeBehavior::Honest, UavBehavior::Substitute);
    EXPECT_TRUE(r.ue.received().empty());
    EXPECT_EQ(r.ue.rejected().count(kFile), 1u);
    EXPECT_EQ(w.ledger.entry("ue1", kFile).state, PaymentState::Refunded);
    ASSERT_GE(r.ausf.verdicts().size(), 1u);
    EXPECT_EQ(r.ausf.verdicts()[0].outcome, Outcome::FailedConnection);
    EXPECT_TRUE(w.kgc.registry().is_blacklisted("uav1"));
    for (const auto& v : r.ausf.verdicts()) EXPECT_NE(v.outcome, Outcome::SuccessfulTransfer);
}

TEST(SeddsSim, FabricatedFailureClaimIsInvalidAndForfeits) {
    World w;
    Session r(w, UeBehavior::ForgeClaim);
    ASSERT_GE(r.ausf.verdicts().size(), 1u);
    EXPECT_EQ(r.ausf.verdicts()[0].outcome, Outcome::InvalidClaim);
    EXPECT_TRUE(w.kgc.registry().is_blacklisted("ue1"));
    EXPECT_FALSE(w.kgc.registry().is_blacklisted("uav1"));
    // The UAV's later hint claim cannot refund a revoked UE.
    EXPECT_EQ(w.ledger.entry("ue1", kFile).state, PaymentState::Prepaid);
}

TEST(SeddsSim, DroppedAckFallsBackToHintClaim) {
    World w;
    Session r(w, UeBehavior::Honest, UavBehavior::Honest, rule(MsgType::Ack, {.kind = sim::ActionKind::Drop}));
    EXPECT_EQ(r.ue.received().at(kFile), w.content);
    ASSERT_EQ(r.ausf.verdicts().size(), 1u);
    EXPECT_EQ(r.ausf.verdicts()[0].outcome, Outcome::FailedConnection);
    EXPECT_EQ(w.ledger.entry("ue1", kFile).state, PaymentState::Refunded);
}

TEST(SeddsSim, TamperedDataAbortsBeforePayment) {
    World w;
    Session r(w, UeBehavior::Honest, UavBehavior::Honest,
          rule(MsgType::Data, {.kind = sim::ActionKind::Tamper, .offset = 40}));
    EXPECT_EQ(w.ledger.entry("ue1", kFile).state, PaymentState::None);
    EXPECT_EQ(r.sim.count_notes("reject", "Data AuthFailure"), 1u);
    EXPECT_TRUE(r.sim.forgeries().empty());
}

TEST(SeddsSim, StaleHintReplayRejected) {
    World w;
    Session r(w, UeBehavior::Honest, UavBehavior::Honest,
          rule(MsgType::Hint, {.kind = sim::ActionKind::Replay, .ms = 31'000}));
    EXPECT_EQ(r.sim.count_notes("reject", "Hint StaleTimestamp"), 1u);
    EXPECT_EQ(r.uav.keys_released(), 1u);
}

TEST(SeddsSim, KeyReleaseReplayIgnoredThenNoSession) {
    World w;
    sim::AdversaryScript s = rule(MsgType::KeyRel, {.kind = sim::ActionKind::Replay, .ms = 10});
    s.rules.push_back(rule(MsgType::KeyRel, {.kind = sim::ActionKind::Replay, .ms = 40'000}).rules[0]);
    Session r(w, UeBehavior::Honest, UavBehavior::Honest, s);
    EXPECT_EQ(r.sim.count_notes("duplicate", "KeyRel"), 1u);
    EXPECT_EQ(r.sim.count_notes("reject", "KeyRel NoSession"), 1u);
    EXPECT_EQ(w.ledger.entry("ue1", kFile).state, PaymentState::Settled);
}

TEST(SeddsAdjudicate, UnknownPartiesAndFiles) {
    World w;
    Session r(w, UeBehavior::Honest, UavBehavior::Honest, {}, false);
    Ack ack;
    ack.ue = "nobody";
    ack.uav = "uav1";
    ack.file_name = kFile;
    ack.sig = sign(w.kgc.params(), w.ue_key, ack.body(), w.rng);
    try {
        r.ausf.adjudicate("uav1", ack.encode());
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), Error::UnknownUE);
    }
    ack.ue = "ue1";
    ack.file_name = "missing";
    try {
        r.ausf.adjudicate("uav1", ack.encode());
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), Error::UnknownFile);
    }
}

TEST(SeddsAdjudicate, ForgedAckIsInvalidAndCountsAgainstSubmitter) {
    World w;
    Session r(w, UeBehavior::Honest, UavBehavior::Honest, {}, false);
    w.ledger.prepay("ue1", kFile, 20);
    Ack ack;
    ack.ue = "ue1";
    ack.uav = "uav1";
    ack.file_name = kFile;
    ack.x2 = file_binding(kFile, w.content);
    ack.sig = sign(w.kgc.params(), w.uav_key, ack.body(), w.rng);  // not the UE's key
    EXPECT_EQ(r.ausf.adjudicate("uav1", ack.encode()).outcome, Outcome::InvalidClaim);
    EXPECT_TRUE(w.kgc.registry().is_blacklisted("uav1"));
    EXPECT_EQ(w.ledger.entry("ue1", kFile).state, PaymentState::Prepaid);
}

TEST(SeddsFootprint, FiveMessagesExcludingContent) {
    World w;
    Session r(w);
    std::uint64_t total = 0;
    for (auto t : {MsgType::Req, MsgType::Data, MsgType::Hint, MsgType::KeyRel, MsgType::Ack})
        total += overhead_bytes(r.sim.first_frames().at(static_cast<std::uint8_t>(t)));
    // Two 128-byte DH shares and six 65-byte signatures alone exceed 600 bytes.
    EXPECT_GT(total, 2u * kDhSize + 6u * kSignatureSize);
}
