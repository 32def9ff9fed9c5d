#include <gtest/gtest.h>
#include <openssl/bn.h>

#include <set>

#include "uavshare/crypto.hpp"
#include "uavshare/errors.hpp"
#include "uavshare/metering.hpp"

using namespace uavshare;

namespace {

// Independent oracle: left-to-right double-and-add using only point addition.
GroupElement double_and_add(const Scalar& k, const GroupElement& a) {
    GroupElement acc;
    for (auto byte : k.encode()) {
        for (int bit = 7; bit >= 0; --bit) {
            acc = acc + acc;
            if ((byte >> bit) & 1) acc = acc + a;
        }
    }
    return acc;
}

Digest digest_from_hex(std::string_view hex) {
    auto b = from_hex(hex);
    Digest d{};
    std::copy(b.begin(), b.end(), d.begin());
    return d;
}

}  // namespace

TEST(ScalarMult, ZeroGivesIdentity) {
    EXPECT_TRUE(scalar_mult(Scalar{}, GroupElement::generator()).is_identity());
}

TEST(ScalarMult, OneGivesBase) {
    EXPECT_EQ(scalar_mult(Scalar::from_u64(1), GroupElement::generator()), GroupElement::generator());
}

TEST(ScalarMult, AgreesWithDoubleAndAddOracle) {
    Drbg rng(1);
    for (int i = 0; i < 10; ++i) {
        auto k = Scalar::random_nonzero(rng);
        auto kp = scalar_mult(k, GroupElement::generator());
        EXPECT_EQ(kp, double_and_add(k, GroupElement::generator()));
        EXPECT_EQ(base_mult(k), kp);
        auto two = Scalar::from_u64(2);
        EXPECT_EQ(scalar_mult(two, kp), scalar_mult(two * k, GroupElement::generator()));
        EXPECT_EQ(scalar_mult(two, kp), double_and_add(two * k, GroupElement::generator()));
    }
}

TEST(ScalarMult, GroupLawHolds) {
    Drbg rng(2);
    auto a = base_mult(Scalar::random_nonzero(rng));
    for (int i = 0; i < 100; ++i) {
        auto k1 = Scalar::random_nonzero(rng);
        auto k2 = Scalar::random_nonzero(rng);
        EXPECT_EQ(scalar_mult(k1, scalar_mult(k2, a)), scalar_mult(k1 * k2, a));
    }
}

TEST(GroupElement, EncodingRoundTripsAndIsCompressed) {
    Drbg rng(3);
    for (int i = 0; i < 50; ++i) {
        auto p = base_mult(Scalar::random_nonzero(rng));
        auto enc = p.encode();
        EXPECT_TRUE(enc[0] == 0x02 || enc[0] == 0x03);
        EXPECT_EQ(GroupElement::decode(enc), p);
    }
    EXPECT_TRUE(GroupElement::decode(GroupElement::identity().encode()).is_identity());
}

TEST(GroupElement, RejectsOffCurveAndWrongLength) {
    // About half of all x coordinates have no point; at least one of the
    // first sixteen must be rejected.
    int rejected = 0;
    for (std::uint8_t x = 1; x <= 16; ++x) {
        PointBytes enc{};
        enc[0] = 0x02;
        enc[32] = x;
        try {
            GroupElement::decode(enc);
        } catch (const ProtocolError&) {
            ++rejected;
        }
    }
    EXPECT_GT(rejected, 0);

    PointBytes beyond_field{};
    std::fill(beyond_field.begin(), beyond_field.end(), 0xff);
    beyond_field[0] = 0x02;
    EXPECT_THROW(GroupElement::decode(beyond_field), ProtocolError);

    Bytes short_enc(32, 0x02);
    EXPECT_THROW(GroupElement::decode(short_enc), ProtocolError);
}

TEST(Scalar, DecodeRejectsOrderAndAbove) {
    auto q = group_order();
    EXPECT_THROW(Scalar::decode(q), ProtocolError);
    auto below = q;
    below[31] -= 1;
    EXPECT_NO_THROW(Scalar::decode(below));
    EXPECT_TRUE(Scalar::reduce(q).is_zero());
}

TEST(DhExp, ExponentOneIsIdentityMap) {
    EXPECT_EQ(dh_exp(DhElement::generator(), Scalar::from_u64(1)), DhElement::generator());
}

TEST(DhExp, SquareMatchesDirectMultiplication) {
    auto g = DhElement::generator();
    auto squared = dh_exp(g, Scalar::from_u64(2));
    BIGNUM* p = BN_get_rfc2409_prime_1024(nullptr);
    BIGNUM* r = BN_new();
    BN_CTX* ctx = BN_CTX_new();
    BN_mod_mul(r, g.raw(), g.raw(), p, ctx);
    EXPECT_EQ(BN_cmp(r, squared.raw()), 0);
    BN_free(p);
    BN_free(r);
    BN_CTX_free(ctx);
}

TEST(DhExp, Commutes) {
    Drbg rng(4);
    for (int i = 0; i < 100; ++i) {
        auto a = Scalar::random_nonzero(rng);
        auto b = Scalar::random_nonzero(rng);
        auto g = DhElement::generator();
        EXPECT_EQ(dh_exp(dh_exp(g, a), b), dh_exp(dh_exp(g, b), a));
    }
}

TEST(DhElement, EncodingIs128BytesAndRangeChecked) {
    Drbg rng(5);
    auto ga = dh_exp(DhElement::generator(), Scalar::random_nonzero(rng));
    auto enc = ga.encode();
    ASSERT_EQ(enc.size(), kDhSize);
    EXPECT_EQ(DhElement::decode(enc), ga);
    Bytes one(kDhSize, 0);
    one.back() = 1;
    EXPECT_THROW(DhElement::decode(one), ProtocolError);
    auto p_minus_one = dh_modulus();
    p_minus_one.back() -= 1;
    EXPECT_THROW(DhElement::decode(p_minus_one), ProtocolError);
}

TEST(SymCipher, RoundTrip) {
    Drbg rng(6);
    SymKey key{};
    rng.fill(key);
    auto msg = to_bytes("segment payload");
    auto aad = to_bytes("header");
    auto ct = sym_encrypt(key, msg, aad, rng);
    EXPECT_EQ(ct.size(), msg.size() + kSymOverhead);
    auto pt = sym_decrypt(key, ct, aad);
    ASSERT_TRUE(pt);
    EXPECT_EQ(*pt, msg);
}

TEST(SymCipher, WrongKeyFails) {
    Drbg rng(7);
    SymKey key{}, other{};
    rng.fill(key);
    rng.fill(other);
    auto ct = sym_encrypt(key, to_bytes("m"), {}, rng);
    EXPECT_FALSE(sym_decrypt(other, ct, {}));
}

TEST(SymCipher, EverySingleBitFlipIsRejected) {
    Drbg rng(8);
    SymKey key{};
    rng.fill(key);
    auto aad = to_bytes("aad");
    auto ct = sym_encrypt(key, to_bytes("short"), aad, rng);
    for (std::size_t byte = 0; byte < ct.size(); ++byte) {
        for (int bit = 0; bit < 8; ++bit) {
            auto t = ct;
            t[byte] ^= static_cast<std::uint8_t>(1 << bit);
            EXPECT_FALSE(sym_decrypt(key, t, aad)) << "byte " << byte << " bit " << bit;
        }
    }
    for (std::size_t byte = 0; byte < aad.size(); ++byte) {
        auto a = aad;
        a[byte] ^= 0x01;
        EXPECT_FALSE(sym_decrypt(key, ct, a));
    }
}

TEST(HashH0, DeterministicNonzeroInRange) {
    Drbg rng(9);
    auto a = base_mult(Scalar::random_nonzero(rng));
    auto b = base_mult(Scalar::random_nonzero(rng));
    auto c = base_mult(Scalar::random_nonzero(rng));
    auto id = to_bytes("uav1");
    auto h = hash_h0(id, a, b, c);
    EXPECT_EQ(h, hash_h0(id, a, b, c));
    EXPECT_FALSE(h.is_zero());
    EXPECT_NO_THROW(Scalar::decode(h.encode()));
}

TEST(HashH0, PermutingArgumentsChangesOutput) {
    Drbg rng(10);
    auto id = to_bytes("uav1");
    std::set<ScalarBytes> seen;
    for (int i = 0; i < 100; ++i) {
        auto a = base_mult(Scalar::random_nonzero(rng));
        auto b = base_mult(Scalar::random_nonzero(rng));
        auto c = base_mult(Scalar::random_nonzero(rng));
        const GroupElement* perm[6][3] = {{&a, &b, &c}, {&a, &c, &b}, {&b, &a, &c},
                                          {&b, &c, &a}, {&c, &a, &b}, {&c, &b, &a}};
        for (auto& p : perm) EXPECT_TRUE(seen.insert(hash_h0(id, *p[0], *p[1], *p[2]).encode()).second);
    }
}

TEST(HashH0, DomainSeparatedFromH1) {
    Drbg rng(11);
    auto a = base_mult(Scalar::random_nonzero(rng));
    auto ea = a.encode();
    EXPECT_FALSE(hash_h0(ea, a, a, a) == hash_h1(a, ea, ea));
}

TEST(HashH3, MatchesPublishedSha256Vectors) {
    EXPECT_EQ(hash_h3(to_bytes("")),
              digest_from_hex("e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"));
    EXPECT_EQ(hash_h3(to_bytes("abc")),
              digest_from_hex("ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"));
    EXPECT_EQ(hash_h3(to_bytes("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")),
              digest_from_hex("248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1"));
}

TEST(Metering, EachOperationIncrementsExactlyOneCounter) {
    Drbg rng(12);
    CostLedger ledger;
    LedgerScope scope(&ledger);
    auto k = Scalar::random_nonzero(rng);

    auto before = ledger.counts();
    auto p = scalar_mult(k, GroupElement::generator());
    auto d = ledger.counts() - before;
    EXPECT_EQ(d, (CostCounts{.scalar_mults = 1}));

    before = ledger.counts();
    base_mult(k);
    EXPECT_EQ(ledger.counts() - before, (CostCounts{.scalar_mults = 1}));

    before = ledger.counts();
    dh_exp(DhElement::generator(), k);
    EXPECT_EQ(ledger.counts() - before, (CostCounts{.modexps = 1}));

    SymKey key{};
    before = ledger.counts();
    auto ct = sym_encrypt(key, to_bytes("x"), {}, rng);
    EXPECT_EQ(ledger.counts() - before, (CostCounts{.sym_cipher_calls = 1}));

    before = ledger.counts();
    sym_decrypt(key, ct, {});
    EXPECT_EQ(ledger.counts() - before, (CostCounts{.sym_cipher_calls = 1}));

    before = ledger.counts();
    auto sum = p + p;
    EXPECT_EQ(ledger.counts() - before, (CostCounts{.point_adds = 1}));
    (void)sum;
}

TEST(Metering, NoActiveLedgerMeansNoCounting) {
    CostLedger ledger;
    {
        LedgerScope scope(&ledger);
        LedgerScope disabled(nullptr);
        base_mult(Scalar::from_u64(3));
    }
    EXPECT_EQ(ledger.counts(), CostCounts{});
}

TEST(Drbg, SameSeedSameStream) {
    Drbg a(42), b(42), c(43);
    EXPECT_EQ(a.bytes(100), b.bytes(100));
    EXPECT_NE(a.bytes(32), c.bytes(32));
}
