#pragma once

#include "uavshare/pki.hpp"

namespace uavshare {

inline constexpr std::size_t kSignatureSize = kPointSize + kScalarSize;

// Schnorr-style signature over the combined certificateless secret x_i + z_i.
struct Signature {
    GroupElement commitment;  // R
    Scalar response;          // s, never zero

    Bytes encode() const;  // R || s, 65 bytes
    static Signature decode(ByteView bytes);
};

// One T_m.
Signature sign(const SystemParams& params, const FullKeyPair& key, ByteView msg, Drbg& rng);

// Three T_m: H0(..)*Q, s*P and e*VK.
bool verify(const SystemParams& params, std::string_view signer_id, const PublicKey& pub, ByteView msg,
            const Signature& sig);

struct SigncryptedPayload {
    Signature sig;
    Bytes ciphertext;

    Bytes encode() const;  // sig (65) || ciphertext
    static SigncryptedPayload decode(ByteView bytes);
};

// Two T_m and one T_AES. The signature covers the ciphertext, so a relay can
// check authenticity without the recipient's key.
SigncryptedPayload signcrypt(const SystemParams& params, const FullKeyPair& sender, const Recipient& recipient,
                             ByteView msg, Drbg& rng);

// Four T_m and one T_AES on every call. Throws DecryptFailure when the
// ciphertext does not open under the recipient's key, AuthFailure when it
// opens but the sender's signature does not verify.
Bytes unsigncrypt(const SystemParams& params, const FullKeyPair& recipient, std::string_view sender_id,
                  const PublicKey& sender_pub, const SigncryptedPayload& payload);

}  // namespace uavshare
