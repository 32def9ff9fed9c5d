#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "uavshare/crypto.hpp"

namespace uavshare {

struct SystemParams {
    GroupElement master_public;  // Q = x0 * P
    int security_level = 128;
    std::string suite = "P-256/MODP1024-g2/SHA-256/AES-256-GCM";
};

// Public half of a certificateless key: X_i = x_i * P and the KGC-issued Y_i.
struct PublicKey {
    GroupElement x_pub;
    GroupElement y_pub;

    bool operator==(const PublicKey&) const = default;
};

struct FullKeyPair {
    std::string id;
    Scalar x;  // user-chosen secret
    Scalar z;  // KGC partial private key
    PublicKey pub;

    Scalar combined_secret() const { return x + z; }
};

// The group element every signature under (id, pub) is checked against:
// X_i + Y_i + H0(id, Y_i, X_i, Q) * Q. Costs one T_m.
GroupElement derive_verify_key(const SystemParams& params, std::string_view id, const PublicKey& pub);

// A peer's public key together with its derived verify key, resolved once so
// encryption to the peer does not repeat the H0(..)*Q multiplication.
struct Recipient {
    std::string id;
    PublicKey pub;
    GroupElement verify_key;
};

Recipient make_recipient(const SystemParams& params, std::string_view id, const PublicKey& pub);

struct PartialKey {
    Scalar z;
    GroupElement y_pub;
};

enum class EntityStatus { Active, Revoked };

struct RegistryEntry {
    PublicKey pub;
    GroupElement verify_key;
    EntityStatus status = EntityStatus::Active;
    std::uint32_t offenses = 0;
};

// Public directory view of the key generation center.
class Registry {
public:
    const RegistryEntry* find(std::string_view id) const;
    bool is_blacklisted(std::string_view id) const;
    bool is_active(std::string_view id) const;
    // Recipient record for an active entity; nullopt when unknown or revoked.
    std::optional<Recipient> recipient(std::string_view id) const;
    const std::set<std::string, std::less<>>& blacklist() const { return blacklist_; }
    // One "id,status" line per registered entity, sorted by id.
    std::string snapshot() const;

private:
    friend class KeyGenerationCenter;
    std::map<std::string, RegistryEntry, std::less<>> entries_;
    std::set<std::string, std::less<>> blacklist_;
};

// The AUSF in its key-generation role. Holds x0; never sees any x_i.
class KeyGenerationCenter {
public:
    static KeyGenerationCenter setup(int security_param, Drbg& rng);

    const SystemParams& params() const { return params_; }
    const Registry& registry() const { return registry_; }

    // Issues (z_i, Y_i) for a user-submitted X_i. Throws DuplicateId or BlacklistedId.
    PartialKey register_entity(std::string_view id, const GroupElement& x_pub, Drbg& rng);

    // Throws UnknownId.
    void revoke(std::string_view id);

    // Counts a protocol offense; revokes once the threshold is reached.
    // Returns true when this call revoked the entity.
    bool report_offense(std::string_view id);
    void set_offense_threshold(std::uint32_t n) { offense_threshold_ = n; }
    std::uint32_t offense_threshold() const { return offense_threshold_; }

    // Recomputes x0 * P and compares it with the published Q.
    bool master_key_consistent() const;

private:
    KeyGenerationCenter(SystemParams params, Scalar master_secret)
        : params_(std::move(params)), master_secret_(std::move(master_secret)) {}

    SystemParams params_;
    Scalar master_secret_;
    Registry registry_;
    std::uint32_t offense_threshold_ = 1;
};

// Client side of registration: samples x_i, submits X_i, checks the returned
// partial key against the registration identity. Throws AuthFailure if the
// partial key does not satisfy it.
FullKeyPair enroll(KeyGenerationCenter& kgc, std::string_view id, Drbg& rng);

// z_i * P == Y_i + H0(id, Y_i, X_i, Q) * Q
bool partial_key_valid(const SystemParams& params, std::string_view id, const GroupElement& x_pub,
                       const PartialKey& partial);

struct Signature;

// Message a key owner signs to demonstrate possession of (x_i, z_i).
Bytes key_probe_message(std::string_view id);

bool verify_public_key(const SystemParams& params, std::string_view id, const PublicKey& pub,
                       const Signature& probe_sig);

}  // namespace uavshare
