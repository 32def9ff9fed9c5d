#include <gtest/gtest.h>

#include "uavshare/errors.hpp"
#include "uavshare/metering.hpp"
#include "uavshare/mre.hpp"

using namespace uavshare;

namespace {

struct Group {
    Drbg rng{31};
    KeyGenerationCenter kgc = KeyGenerationCenter::setup(128, rng);
    std::vector<FullKeyPair> keys;
    std::vector<Recipient> recipients;

    explicit Group(int n) {
        for (int i = 1; i <= n; ++i) {
            auto id = "uav" + std::to_string(i);
            keys.push_back(enroll(kgc, id, rng));
            recipients.push_back(*kgc.registry().recipient(id));
        }
    }
    SymKey fresh_key() {
        SymKey k{};
        rng.fill(k);
        return k;
    }
};

Error error_of(auto&& fn) {
    try {
        fn();
    } catch (const ProtocolError& e) {
        return e.code();
    }
    return Error::ParseError;
}

const std::set<std::string, std::less<>> kNone;

}  // namespace

TEST(MreEncrypt, EveryRecipientRecoversTheKey) {
    Group g(5);
    auto kd = g.fresh_key();
    auto ct = mre_encrypt(g.kgc.params(), g.recipients, kNone, kd, g.rng);
    ASSERT_EQ(ct.boxes.size(), 5u);
    for (const auto& k : g.keys) EXPECT_EQ(mre_decrypt(g.kgc.params(), k, ct), kd);
}

TEST(MreEncrypt, BlacklistedRecipientHasNoBox) {
    Group g(5);
    auto kd = g.fresh_key();
    std::set<std::string, std::less<>> blacklist{"uav3"};
    auto ct = mre_encrypt(g.kgc.params(), g.recipients, blacklist, kd, g.rng);
    EXPECT_EQ(ct.boxes.size(), 4u);
    EXPECT_EQ(ct.box_for("uav3"), nullptr);
    EXPECT_EQ(error_of([&] { mre_decrypt(g.kgc.params(), g.keys[2], ct); }), Error::NoBoxForId);
    for (std::size_t i = 0; i < g.keys.size(); ++i)
        if (i != 2) EXPECT_EQ(mre_decrypt(g.kgc.params(), g.keys[i], ct), kd);
}

TEST(MreEncrypt, EmptyRecipientSet) {
    Group g(2);
    EXPECT_EQ(error_of([&] { mre_encrypt(g.kgc.params(), {}, kNone, g.fresh_key(), g.rng); }),
              Error::EmptyRecipientSet);
    std::set<std::string, std::less<>> everyone{"uav1", "uav2"};
    EXPECT_EQ(error_of([&] { mre_encrypt(g.kgc.params(), g.recipients, everyone, g.fresh_key(), g.rng); }),
              Error::EmptyRecipientSet);
}

TEST(MreDecrypt, CrossBoxOnlyDiagonalSucceeds) {
    Group g(4);
    auto kd = g.fresh_key();
    auto ct = mre_encrypt(g.kgc.params(), g.recipients, kNone, kd, g.rng);
    for (std::size_t owner = 0; owner < g.keys.size(); ++owner) {
        for (std::size_t box = 0; box < ct.boxes.size(); ++box) {
            // Relabel box `box` so that `owner` picks it up.
            MreCiphertext swapped{ct.ephemeral, {ct.boxes[box]}};
            swapped.boxes[0].recipient_id = g.keys[owner].id;
            auto e = error_of([&] { EXPECT_EQ(mre_decrypt(g.kgc.params(), g.keys[owner], swapped), kd); });
            if (owner == box)
                EXPECT_EQ(e, Error::ParseError);
            else
                EXPECT_EQ(e, Error::DecryptFailure);
        }
    }
}

TEST(MreDecrypt, SingleBitTamperingOfAnyBoxFails) {
    Group g(2);
    auto ct = mre_encrypt(g.kgc.params(), g.recipients, kNone, g.fresh_key(), g.rng);
    for (std::size_t i = 0; i < ct.boxes[0].wrapped.size() * 8; ++i) {
        auto t = ct;
        t.boxes[0].wrapped[i / 8] ^= static_cast<std::uint8_t>(1 << (i % 8));
        EXPECT_EQ(error_of([&] { mre_decrypt(g.kgc.params(), g.keys[0], t); }), Error::DecryptFailure);
    }
}

TEST(MreCiphertext, WireFormat) {
    Group g(3);
    auto ct = mre_encrypt(g.kgc.params(), g.recipients, kNone, g.fresh_key(), g.rng);
    auto enc = ct.encode();
    std::size_t expected = 33 + 2;
    for (const auto& b : ct.boxes) expected += 2 + b.recipient_id.size() + 2 + b.wrapped.size();
    EXPECT_EQ(enc.size(), expected);
    EXPECT_EQ(get_u16(enc, 33), 3u);
    auto back = MreCiphertext::decode(enc);
    EXPECT_EQ(back.encode(), enc);
    EXPECT_EQ(mre_decrypt(g.kgc.params(), g.keys[1], back), mre_decrypt(g.kgc.params(), g.keys[1], ct));
    enc.push_back(0);
    EXPECT_THROW(MreCiphertext::decode(enc), ProtocolError);
}

TEST(MreCosts, OnePlusNScalarMultsToEncryptOneToDecrypt) {
    Group g(5);
    CostLedger ledger;
    MreCiphertext ct;
    {
        LedgerScope scope(&ledger);
        ct = mre_encrypt(g.kgc.params(), g.recipients, {"uav5"}, g.fresh_key(), g.rng);
    }
    EXPECT_EQ(ledger.counts().scalar_mults, 1u + 4u);
    EXPECT_EQ(ledger.counts().sym_cipher_calls, 4u);
    ledger.reset();
    {
        LedgerScope scope(&ledger);
        mre_decrypt(g.kgc.params(), g.keys[0], ct);
    }
    EXPECT_EQ(ledger.counts().scalar_mults, 1u);
    EXPECT_EQ(ledger.counts().sym_cipher_calls, 1u);
}

TEST(MreCiphertext, FreshEphemeralIsolatesSessions) {
    Group g(3);
    auto a = mre_encrypt(g.kgc.params(), g.recipients, kNone, g.fresh_key(), g.rng);
    auto b = mre_encrypt(g.kgc.params(), g.recipients, kNone, g.fresh_key(), g.rng);
    EXPECT_FALSE(a.ephemeral == b.ephemeral);
    // Box from session A grafted into session B's ciphertext no longer opens.
    auto graft = b;
    graft.boxes[0] = a.boxes[0];
    EXPECT_EQ(error_of([&] { mre_decrypt(g.kgc.params(), g.keys[0], graft); }), Error::DecryptFailure);
}
