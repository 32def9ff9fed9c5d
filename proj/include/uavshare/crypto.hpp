#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>

#include "uavshare/bytes.hpp"
#include "uavshare/rng.hpp"

struct bignum_st;
struct ec_point_st;

namespace uavshare {

namespace detail {
struct BnFree {
    void operator()(bignum_st* p) const;
};
struct PointFree {
    void operator()(ec_point_st* p) const;
};
using BnPtr = std::unique_ptr<bignum_st, BnFree>;
using PointPtr = std::unique_ptr<ec_point_st, PointFree>;
}  // namespace detail

inline constexpr std::size_t kScalarSize = 32;
inline constexpr std::size_t kPointSize = 33;
inline constexpr std::size_t kDhSize = 128;

using ScalarBytes = std::array<std::uint8_t, kScalarSize>;
using PointBytes = std::array<std::uint8_t, kPointSize>;

// Integer modulo the group order q of P-256.
class Scalar {
public:
    Scalar();
    Scalar(const Scalar& o);
    Scalar(Scalar&&) noexcept = default;
    Scalar& operator=(const Scalar& o);
    Scalar& operator=(Scalar&&) noexcept = default;
    ~Scalar() = default;

    static Scalar from_u64(std::uint64_t v);
    // Rejects encodings >= q.
    static Scalar decode(ByteView bytes);
    // Interprets arbitrary bytes as a big-endian integer and reduces mod q.
    static Scalar reduce(ByteView bytes);
    // Uniform in Z_q*.
    static Scalar random_nonzero(Drbg& rng);

    ScalarBytes encode() const;
    bool is_zero() const;

    Scalar operator+(const Scalar& o) const;
    Scalar operator-(const Scalar& o) const;
    Scalar operator*(const Scalar& o) const;
    bool operator==(const Scalar& o) const;

    const bignum_st* raw() const { return bn_.get(); }

private:
    explicit Scalar(detail::BnPtr bn) : bn_(std::move(bn)) {}
    detail::BnPtr bn_;
};

// Point on P-256; 33-byte compressed encoding, identity encoded as 33 zero bytes.
class GroupElement {
public:
    GroupElement();  // identity
    GroupElement(const GroupElement& o);
    GroupElement(GroupElement&&) noexcept = default;
    GroupElement& operator=(const GroupElement& o);
    GroupElement& operator=(GroupElement&&) noexcept = default;
    ~GroupElement() = default;

    static GroupElement identity() { return {}; }
    static const GroupElement& generator();
    // Throws ProtocolError(Malformed) for off-curve or badly sized input.
    static GroupElement decode(ByteView bytes);

    PointBytes encode() const;
    bool is_identity() const;

    // Counts one T_pa.
    GroupElement operator+(const GroupElement& o) const;
    bool operator==(const GroupElement& o) const;

    const ec_point_st* raw() const { return pt_.get(); }

private:
    explicit GroupElement(detail::PointPtr p) : pt_(std::move(p)) {}
    detail::PointPtr pt_;

    friend GroupElement scalar_mult(const Scalar& k, const GroupElement& a);
    friend GroupElement base_mult(const Scalar& k);
};

// k*A. Counts one T_m.
GroupElement scalar_mult(const Scalar& k, const GroupElement& a);
// k*P for the fixed generator. Counts one T_m.
GroupElement base_mult(const Scalar& k);

// Big-endian encoding of the group order q.
ScalarBytes group_order();

// Element of the 1024-bit MODP group (RFC 2409 group 2, a safe prime) with g = 2.
class DhElement {
public:
    DhElement(const DhElement& o);
    DhElement(DhElement&&) noexcept = default;
    DhElement& operator=(const DhElement& o);
    DhElement& operator=(DhElement&&) noexcept = default;
    ~DhElement() = default;

    static const DhElement& generator();
    // Requires 1 < value < p - 1.
    static DhElement decode(ByteView bytes);

    Bytes encode() const;  // kDhSize bytes
    bool operator==(const DhElement& o) const;

    const bignum_st* raw() const { return bn_.get(); }

private:
    explicit DhElement(detail::BnPtr bn) : bn_(std::move(bn)) {}
    detail::BnPtr bn_;

    friend DhElement dh_exp(const DhElement& base, const Scalar& exponent);
};

// base^exponent mod p. Counts one T_e.
DhElement dh_exp(const DhElement& base, const Scalar& exponent);

Bytes dh_modulus();

Digest sha256(ByteView data);

// H0: (id, G, G, G) -> Z_q*
Scalar hash_h0(ByteView id, const GroupElement& a, const GroupElement& b, const GroupElement& c);
// H1: (G, bytes, bytes) -> Z_q*
Scalar hash_h1(const GroupElement& r, ByteView a, ByteView b);
// H2: (G, G) -> 32-byte key material
Digest hash_h2(const GroupElement& a, const GroupElement& b);
// H3 is plain SHA-256.
inline Digest hash_h3(ByteView data) { return sha256(data); }

Digest xor_digest(const Digest& a, const Digest& b);

using SymKey = std::array<std::uint8_t, 32>;

inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kTagSize = 16;
inline constexpr std::size_t kSymOverhead = kNonceSize + kTagSize;

// AES-256-GCM: nonce || ciphertext || tag. Counts one T_AES.
Bytes sym_encrypt(const SymKey& key, ByteView plaintext, ByteView aad, Drbg& rng);
// Counts one T_AES whether or not authentication succeeds.
std::optional<Bytes> sym_decrypt(const SymKey& key, ByteView ciphertext, ByteView aad);

}  // namespace uavshare
