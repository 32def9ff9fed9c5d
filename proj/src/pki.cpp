#include "uavshare/pki.hpp"

#include <sstream>

#include "uavshare/errors.hpp"
#include "uavshare/signcrypt.hpp"

namespace uavshare {

namespace {
ByteView id_bytes(std::string_view id) { return {reinterpret_cast<const std::uint8_t*>(id.data()), id.size()}; }
}  // namespace

GroupElement derive_verify_key(const SystemParams& params, std::string_view id, const PublicKey& pub) {
    auto h = hash_h0(id_bytes(id), pub.y_pub, pub.x_pub, params.master_public);
    return pub.x_pub + pub.y_pub + scalar_mult(h, params.master_public);
}

Recipient make_recipient(const SystemParams& params, std::string_view id, const PublicKey& pub) {
    return Recipient{std::string(id), pub, derive_verify_key(params, id, pub)};
}

const RegistryEntry* Registry::find(std::string_view id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
}

bool Registry::is_blacklisted(std::string_view id) const { return blacklist_.contains(id); }

bool Registry::is_active(std::string_view id) const {
    auto e = find(id);
    return e && e->status == EntityStatus::Active;
}

std::optional<Recipient> Registry::recipient(std::string_view id) const {
    auto e = find(id);
    if (!e || e->status != EntityStatus::Active) return std::nullopt;
    return Recipient{std::string(id), e->pub, e->verify_key};
}

std::string Registry::snapshot() const {
    std::ostringstream out;
    for (const auto& [id, entry] : entries_)
        out << id << ',' << (entry.status == EntityStatus::Active ? "active" : "revoked") << '\n';
    return out.str();
}

KeyGenerationCenter KeyGenerationCenter::setup(int security_param, Drbg& rng) {
    if (security_param != 128) throw std::invalid_argument("only the 128-bit profile is supported");
    auto x0 = Scalar::random_nonzero(rng);
    SystemParams params{base_mult(x0), security_param};
    return KeyGenerationCenter(std::move(params), std::move(x0));
}

PartialKey KeyGenerationCenter::register_entity(std::string_view id, const GroupElement& x_pub, Drbg& rng) {
    if (registry_.blacklist_.contains(id)) throw ProtocolError(Error::BlacklistedId, std::string(id));
    if (registry_.entries_.contains(id)) throw ProtocolError(Error::DuplicateId, std::string(id));
    if (x_pub.is_identity()) throw ProtocolError(Error::Malformed, "X_i is the identity");

    auto y = Scalar::random_nonzero(rng);
    auto y_pub = base_mult(y);
    auto h = hash_h0(id_bytes(id), y_pub, x_pub, params_.master_public);
    auto z = y + master_secret_ * h;

    PublicKey pub{x_pub, y_pub};
    registry_.entries_.emplace(std::string(id), RegistryEntry{pub, derive_verify_key(params_, id, pub)});
    return PartialKey{std::move(z), std::move(y_pub)};
}

void KeyGenerationCenter::revoke(std::string_view id) {
    auto it = registry_.entries_.find(id);
    if (it == registry_.entries_.end()) throw ProtocolError(Error::UnknownId, std::string(id));
    it->second.status = EntityStatus::Revoked;
    registry_.blacklist_.emplace(id);
}

bool KeyGenerationCenter::report_offense(std::string_view id) {
    auto it = registry_.entries_.find(id);
    if (it == registry_.entries_.end()) throw ProtocolError(Error::UnknownId, std::string(id));
    ++it->second.offenses;
    if (it->second.status == EntityStatus::Active && it->second.offenses >= offense_threshold_) {
        revoke(id);
        return true;
    }
    return false;
}

bool KeyGenerationCenter::master_key_consistent() const { return base_mult(master_secret_) == params_.master_public; }

bool partial_key_valid(const SystemParams& params, std::string_view id, const GroupElement& x_pub,
                       const PartialKey& partial) {
    auto h = hash_h0(id_bytes(id), partial.y_pub, x_pub, params.master_public);
    return base_mult(partial.z) == partial.y_pub + scalar_mult(h, params.master_public);
}

FullKeyPair enroll(KeyGenerationCenter& kgc, std::string_view id, Drbg& rng) {
    auto x = Scalar::random_nonzero(rng);
    auto x_pub = base_mult(x);
    auto partial = kgc.register_entity(id, x_pub, rng);
    if (!partial_key_valid(kgc.params(), id, x_pub, partial))
        throw ProtocolError(Error::AuthFailure, "partial key fails registration identity");
    return FullKeyPair{std::string(id), std::move(x), std::move(partial.z), PublicKey{x_pub, partial.y_pub}};
}

Bytes key_probe_message(std::string_view id) {
    auto msg = to_bytes("uavshare/key-probe/");
    append(msg, id_bytes(id));
    return msg;
}

bool verify_public_key(const SystemParams& params, std::string_view id, const PublicKey& pub,
                       const Signature& probe_sig) {
    return verify(params, id, pub, key_probe_message(id), probe_sig);
}

}  // namespace uavshare
