#include "uavshare/crypto.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/obj_mac.h>

#include <stdexcept>

#include "uavshare/errors.hpp"
#include "uavshare/metering.hpp"

namespace uavshare {

namespace detail {
void BnFree::operator()(bignum_st* p) const { BN_clear_free(p); }
void PointFree::operator()(ec_point_st* p) const { EC_POINT_clear_free(p); }
}  // namespace detail

namespace {

using detail::BnPtr;
using detail::PointPtr;

[[noreturn]] void openssl_failure(const char* what) { throw std::runtime_error(std::string("openssl: ") + what); }

BnPtr new_bn() {
    BnPtr bn(BN_new());
    if (!bn) openssl_failure("BN_new");
    return bn;
}

BnPtr dup_bn(const BIGNUM* b) {
    BnPtr bn(BN_dup(b));
    if (!bn) openssl_failure("BN_dup");
    return bn;
}

BN_CTX* bn_ctx() {
    struct Holder {
        BN_CTX* ctx = BN_CTX_new();
        ~Holder() { BN_CTX_free(ctx); }
    };
    thread_local Holder h;
    return h.ctx;
}

struct Curve {
    EC_GROUP* group;
    BnPtr order;
    Curve() : group(EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1)), order(new_bn()) {
        if (!group) openssl_failure("EC_GROUP_new_by_curve_name");
        if (EC_GROUP_get_order(group, order.get(), bn_ctx()) != 1) openssl_failure("EC_GROUP_get_order");
    }
    ~Curve() { EC_GROUP_free(group); }
};

const Curve& curve() {
    static const Curve c;
    return c;
}

struct DhGroup {
    BnPtr modulus;
    BnPtr modulus_minus_one;
    DhGroup() : modulus(BN_get_rfc2409_prime_1024(nullptr)), modulus_minus_one(new_bn()) {
        if (!modulus) openssl_failure("BN_get_rfc2409_prime_1024");
        BN_sub(modulus_minus_one.get(), modulus.get(), BN_value_one());
    }
};

const DhGroup& dh_group() {
    static const DhGroup g;
    return g;
}

PointPtr new_point() {
    PointPtr p(EC_POINT_new(curve().group));
    if (!p) openssl_failure("EC_POINT_new");
    return p;
}

void append_prefixed(Bytes& out, ByteView part) {
    put_u16(out, static_cast<std::uint16_t>(part.size()));
    append(out, part);
}

Scalar hash_to_nonzero_scalar(std::string_view tag, std::initializer_list<ByteView> parts) {
    Bytes input;
    append_prefixed(input, to_bytes(tag));
    for (auto p : parts) append_prefixed(input, p);
    for (std::uint8_t counter = 0;; ++counter) {
        Bytes attempt = input;
        if (counter > 0) attempt.push_back(counter);
        Scalar s = Scalar::reduce(sha256(attempt));
        if (!s.is_zero()) return s;
        if (counter == 255) throw std::runtime_error("hash_to_scalar: exhausted counter");
    }
}

}  // namespace

// Scalar

Scalar::Scalar() : bn_(new_bn()) { BN_zero(bn_.get()); }

Scalar::Scalar(const Scalar& o) : bn_(dup_bn(o.bn_.get())) {}

Scalar& Scalar::operator=(const Scalar& o) {
    if (this != &o) bn_ = dup_bn(o.bn_.get());
    return *this;
}

Scalar Scalar::from_u64(std::uint64_t v) {
    Bytes b;
    put_u64(b, v);
    return reduce(b);
}

Scalar Scalar::decode(ByteView bytes) {
    if (bytes.size() != kScalarSize) throw ProtocolError(Error::Malformed, "scalar must be 32 bytes");
    auto bn = new_bn();
    BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), bn.get());
    if (BN_cmp(bn.get(), curve().order.get()) >= 0) throw ProtocolError(Error::Malformed, "scalar out of range");
    return Scalar(std::move(bn));
}

Scalar Scalar::reduce(ByteView bytes) {
    auto bn = new_bn();
    BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), bn.get());
    if (BN_nnmod(bn.get(), bn.get(), curve().order.get(), bn_ctx()) != 1) openssl_failure("BN_nnmod");
    return Scalar(std::move(bn));
}

Scalar Scalar::random_nonzero(Drbg& rng) {
    ScalarBytes buf{};
    while (true) {
        rng.fill(buf);
        auto bn = new_bn();
        BN_bin2bn(buf.data(), static_cast<int>(buf.size()), bn.get());
        if (!BN_is_zero(bn.get()) && BN_cmp(bn.get(), curve().order.get()) < 0) return Scalar(std::move(bn));
    }
}

ScalarBytes Scalar::encode() const {
    ScalarBytes out{};
    if (BN_bn2binpad(bn_.get(), out.data(), static_cast<int>(out.size())) < 0) openssl_failure("BN_bn2binpad");
    return out;
}

bool Scalar::is_zero() const { return BN_is_zero(bn_.get()); }

Scalar Scalar::operator+(const Scalar& o) const {
    auto r = new_bn();
    BN_mod_add(r.get(), bn_.get(), o.bn_.get(), curve().order.get(), bn_ctx());
    return Scalar(std::move(r));
}

Scalar Scalar::operator-(const Scalar& o) const {
    auto r = new_bn();
    BN_mod_sub(r.get(), bn_.get(), o.bn_.get(), curve().order.get(), bn_ctx());
    return Scalar(std::move(r));
}

Scalar Scalar::operator*(const Scalar& o) const {
    auto r = new_bn();
    BN_mod_mul(r.get(), bn_.get(), o.bn_.get(), curve().order.get(), bn_ctx());
    return Scalar(std::move(r));
}

bool Scalar::operator==(const Scalar& o) const { return BN_cmp(bn_.get(), o.bn_.get()) == 0; }

ScalarBytes group_order() {
    ScalarBytes out{};
    BN_bn2binpad(curve().order.get(), out.data(), static_cast<int>(out.size()));
    return out;
}

// GroupElement

GroupElement::GroupElement() : pt_(new_point()) { EC_POINT_set_to_infinity(curve().group, pt_.get()); }

GroupElement::GroupElement(const GroupElement& o) : pt_(EC_POINT_dup(o.pt_.get(), curve().group)) {
    if (!pt_) openssl_failure("EC_POINT_dup");
}

GroupElement& GroupElement::operator=(const GroupElement& o) {
    if (this != &o) {
        PointPtr p(EC_POINT_dup(o.pt_.get(), curve().group));
        if (!p) openssl_failure("EC_POINT_dup");
        pt_ = std::move(p);
    }
    return *this;
}

const GroupElement& GroupElement::generator() {
    static const GroupElement g = [] {
        PointPtr p(EC_POINT_dup(EC_GROUP_get0_generator(curve().group), curve().group));
        if (!p) openssl_failure("EC_POINT_dup");
        return GroupElement(std::move(p));
    }();
    return g;
}

GroupElement GroupElement::decode(ByteView bytes) {
    if (bytes.size() != kPointSize) throw ProtocolError(Error::Malformed, "point must be 33 bytes");
    bool all_zero = true;
    for (auto b : bytes) all_zero = all_zero && b == 0;
    if (all_zero) return identity();
    auto p = new_point();
    if (EC_POINT_oct2point(curve().group, p.get(), bytes.data(), bytes.size(), bn_ctx()) != 1)
        throw ProtocolError(Error::Malformed, "invalid point encoding");
    return GroupElement(std::move(p));
}

PointBytes GroupElement::encode() const {
    PointBytes out{};
    if (is_identity()) return out;
    auto n = EC_POINT_point2oct(curve().group, pt_.get(), POINT_CONVERSION_COMPRESSED, out.data(), out.size(),
                                bn_ctx());
    if (n != kPointSize) openssl_failure("EC_POINT_point2oct");
    return out;
}

bool GroupElement::is_identity() const { return EC_POINT_is_at_infinity(curve().group, pt_.get()) == 1; }

GroupElement GroupElement::operator+(const GroupElement& o) const {
    metering::point_add();
    auto r = new_point();
    if (EC_POINT_add(curve().group, r.get(), pt_.get(), o.pt_.get(), bn_ctx()) != 1) openssl_failure("EC_POINT_add");
    return GroupElement(std::move(r));
}

bool GroupElement::operator==(const GroupElement& o) const {
    return EC_POINT_cmp(curve().group, pt_.get(), o.pt_.get(), bn_ctx()) == 0;
}

GroupElement scalar_mult(const Scalar& k, const GroupElement& a) {
    metering::scalar_mult();
    auto r = new_point();
    if (EC_POINT_mul(curve().group, r.get(), nullptr, a.pt_.get(), k.raw(), bn_ctx()) != 1)
        openssl_failure("EC_POINT_mul");
    return GroupElement(std::move(r));
}

GroupElement base_mult(const Scalar& k) {
    metering::scalar_mult();
    auto r = new_point();
    if (EC_POINT_mul(curve().group, r.get(), k.raw(), nullptr, nullptr, bn_ctx()) != 1)
        openssl_failure("EC_POINT_mul");
    return GroupElement(std::move(r));
}

// DhElement

DhElement::DhElement(const DhElement& o) : bn_(dup_bn(o.bn_.get())) {}

DhElement& DhElement::operator=(const DhElement& o) {
    if (this != &o) bn_ = dup_bn(o.bn_.get());
    return *this;
}

const DhElement& DhElement::generator() {
    static const DhElement g = [] {
        auto bn = new_bn();
        BN_set_word(bn.get(), 2);
        return DhElement(std::move(bn));
    }();
    return g;
}

DhElement DhElement::decode(ByteView bytes) {
    if (bytes.size() != kDhSize) throw ProtocolError(Error::Malformed, "DH element must be 128 bytes");
    auto bn = new_bn();
    BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), bn.get());
    if (BN_cmp(bn.get(), BN_value_one()) <= 0 || BN_cmp(bn.get(), dh_group().modulus_minus_one.get()) >= 0)
        throw ProtocolError(Error::Malformed, "DH element out of range");
    return DhElement(std::move(bn));
}

Bytes DhElement::encode() const {
    Bytes out(kDhSize);
    if (BN_bn2binpad(bn_.get(), out.data(), static_cast<int>(out.size())) < 0) openssl_failure("BN_bn2binpad");
    return out;
}

bool DhElement::operator==(const DhElement& o) const { return BN_cmp(bn_.get(), o.bn_.get()) == 0; }

DhElement dh_exp(const DhElement& base, const Scalar& exponent) {
    metering::modexp();
    auto r = new_bn();
    if (BN_mod_exp(r.get(), base.bn_.get(), exponent.raw(), dh_group().modulus.get(), bn_ctx()) != 1)
        openssl_failure("BN_mod_exp");
    return DhElement(std::move(r));
}

Bytes dh_modulus() {
    Bytes out(kDhSize);
    BN_bn2binpad(dh_group().modulus.get(), out.data(), static_cast<int>(out.size()));
    return out;
}

// Hashes

Digest sha256(ByteView data) {
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size())
        openssl_failure("EVP_Digest");
    return out;
}

Scalar hash_h0(ByteView id, const GroupElement& a, const GroupElement& b, const GroupElement& c) {
    auto ea = a.encode(), eb = b.encode(), ec = c.encode();
    return hash_to_nonzero_scalar("uavshare/H0", {id, ea, eb, ec});
}

Scalar hash_h1(const GroupElement& r, ByteView a, ByteView b) {
    auto er = r.encode();
    return hash_to_nonzero_scalar("uavshare/H1", {er, a, b});
}

Digest hash_h2(const GroupElement& a, const GroupElement& b) {
    Bytes input;
    append_prefixed(input, to_bytes("uavshare/H2"));
    auto ea = a.encode(), eb = b.encode();
    append_prefixed(input, ea);
    append_prefixed(input, eb);
    return sha256(input);
}

Digest xor_digest(const Digest& a, const Digest& b) {
    Digest out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

// Symmetric cipher

namespace {
struct CipherCtx {
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    ~CipherCtx() { EVP_CIPHER_CTX_free(ctx); }
};
}  // namespace

Bytes sym_encrypt(const SymKey& key, ByteView plaintext, ByteView aad, Drbg& rng) {
    metering::sym_cipher();
    Bytes out(kNonceSize + plaintext.size() + kTagSize);
    rng.fill(std::span(out.data(), kNonceSize));
    CipherCtx c;
    int len = 0;
    if (!c.ctx || EVP_EncryptInit_ex(c.ctx, EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
        EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_IVLEN, kNonceSize, nullptr) != 1 ||
        EVP_EncryptInit_ex(c.ctx, nullptr, nullptr, key.data(), out.data()) != 1)
        openssl_failure("AES-GCM init");
    if (!aad.empty() && EVP_EncryptUpdate(c.ctx, nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
        openssl_failure("AES-GCM aad");
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(c.ctx, out.data() + kNonceSize, &len, plaintext.data(), static_cast<int>(plaintext.size())) != 1)
        openssl_failure("AES-GCM update");
    if (EVP_EncryptFinal_ex(c.ctx, out.data() + kNonceSize + plaintext.size(), &len) != 1)
        openssl_failure("AES-GCM final");
    if (EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_GET_TAG, kTagSize, out.data() + kNonceSize + plaintext.size()) != 1)
        openssl_failure("AES-GCM tag");
    return out;
}

std::optional<Bytes> sym_decrypt(const SymKey& key, ByteView ciphertext, ByteView aad) {
    metering::sym_cipher();
    if (ciphertext.size() < kSymOverhead) return std::nullopt;
    const std::size_t body = ciphertext.size() - kSymOverhead;
    Bytes out(body);
    Bytes tag(ciphertext.end() - kTagSize, ciphertext.end());
    CipherCtx c;
    int len = 0;
    if (!c.ctx || EVP_DecryptInit_ex(c.ctx, EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
        EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_IVLEN, kNonceSize, nullptr) != 1 ||
        EVP_DecryptInit_ex(c.ctx, nullptr, nullptr, key.data(), ciphertext.data()) != 1)
        openssl_failure("AES-GCM init");
    if (!aad.empty() && EVP_DecryptUpdate(c.ctx, nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
        return std::nullopt;
    if (body > 0 &&
        EVP_DecryptUpdate(c.ctx, out.data(), &len, ciphertext.data() + kNonceSize, static_cast<int>(body)) != 1)
        return std::nullopt;
    if (EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_TAG, kTagSize, tag.data()) != 1) return std::nullopt;
    if (EVP_DecryptFinal_ex(c.ctx, out.data() + body, &len) != 1) return std::nullopt;
    return out;
}

}  // namespace uavshare
