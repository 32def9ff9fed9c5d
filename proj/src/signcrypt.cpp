#include "uavshare/signcrypt.hpp"

#include "uavshare/errors.hpp"

namespace uavshare {

namespace {

ByteView id_bytes(std::string_view id) { return {reinterpret_cast<const std::uint8_t*>(id.data()), id.size()}; }

Bytes signcrypt_message(std::string_view recipient_id, ByteView ciphertext) {
    Bytes m = to_bytes("uavshare/signcrypt");
    put_u16(m, static_cast<std::uint16_t>(recipient_id.size()));
    append(m, id_bytes(recipient_id));
    append(m, ciphertext);
    return m;
}

Bytes signcrypt_aad(std::string_view sender_id, std::string_view recipient_id) {
    Bytes aad;
    put_u16(aad, static_cast<std::uint16_t>(sender_id.size()));
    append(aad, id_bytes(sender_id));
    append(aad, id_bytes(recipient_id));
    return aad;
}

SymKey to_key(const Digest& d) { return d; }

// s = r + e * (x + z); nullopt in the negligible case s == 0, where the
// caller must draw a fresh commitment.
std::optional<Signature> respond(const FullKeyPair& key, ByteView msg, const Scalar& r,
                                 const GroupElement& commitment) {
    auto e = hash_h1(commitment, id_bytes(key.id), msg);
    auto s = r + e * key.combined_secret();
    if (s.is_zero()) return std::nullopt;
    return Signature{commitment, std::move(s)};
}

}  // namespace

Bytes Signature::encode() const {
    Bytes out;
    out.reserve(kSignatureSize);
    auto r = commitment.encode();
    auto s = response.encode();
    append(out, r);
    append(out, s);
    return out;
}

Signature Signature::decode(ByteView bytes) {
    if (bytes.size() != kSignatureSize) throw ProtocolError(Error::Malformed, "signature must be 65 bytes");
    auto r = GroupElement::decode(bytes.first(kPointSize));
    auto s = Scalar::decode(bytes.subspan(kPointSize));
    if (s.is_zero()) throw ProtocolError(Error::Malformed, "zero signature response");
    return Signature{std::move(r), std::move(s)};
}

Signature sign(const SystemParams&, const FullKeyPair& key, ByteView msg, Drbg& rng) {
    while (true) {
        auto r = Scalar::random_nonzero(rng);
        if (auto sig = respond(key, msg, r, base_mult(r))) return std::move(*sig);
    }
}

bool verify(const SystemParams& params, std::string_view signer_id, const PublicKey& pub, ByteView msg,
            const Signature& sig) {
    auto vk = derive_verify_key(params, signer_id, pub);
    auto e = hash_h1(sig.commitment, id_bytes(signer_id), msg);
    auto lhs = base_mult(sig.response);
    auto rhs = sig.commitment + scalar_mult(e, vk);
    return !sig.response.is_zero() && lhs == rhs;
}

Bytes SigncryptedPayload::encode() const {
    auto out = sig.encode();
    append(out, ciphertext);
    return out;
}

SigncryptedPayload SigncryptedPayload::decode(ByteView bytes) {
    if (bytes.size() < kSignatureSize + kSymOverhead) throw ProtocolError(Error::Malformed, "short signcryption");
    return SigncryptedPayload{Signature::decode(bytes.first(kSignatureSize)),
                              Bytes(bytes.begin() + kSignatureSize, bytes.end())};
}

SigncryptedPayload signcrypt(const SystemParams&, const FullKeyPair& sender, const Recipient& recipient,
                             ByteView msg, Drbg& rng) {
    while (true) {
        auto r = Scalar::random_nonzero(rng);
        auto commitment = base_mult(r);
        auto shared = scalar_mult(r, recipient.verify_key);
        auto key = to_key(hash_h2(shared, commitment));
        auto ct = sym_encrypt(key, msg, signcrypt_aad(sender.id, recipient.id), rng);
        if (auto sig = respond(sender, signcrypt_message(recipient.id, ct), r, commitment))
            return SigncryptedPayload{std::move(*sig), std::move(ct)};
    }
}

Bytes unsigncrypt(const SystemParams& params, const FullKeyPair& recipient, std::string_view sender_id,
                  const PublicKey& sender_pub, const SigncryptedPayload& payload) {
    auto shared = scalar_mult(recipient.combined_secret(), payload.sig.commitment);
    auto key = to_key(hash_h2(shared, payload.sig.commitment));
    auto plain = sym_decrypt(key, payload.ciphertext, signcrypt_aad(sender_id, recipient.id));
    bool authentic =
        verify(params, sender_id, sender_pub, signcrypt_message(recipient.id, payload.ciphertext), payload.sig);
    if (!plain) throw ProtocolError(Error::DecryptFailure, "signcryption does not open under recipient key");
    if (!authentic) throw ProtocolError(Error::AuthFailure, "sender signature invalid");
    return std::move(*plain);
}

}  // namespace uavshare
