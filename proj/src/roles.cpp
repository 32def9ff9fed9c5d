#include "uavshare/roles.hpp"

#include "uavshare/errors.hpp"
#include "uavshare/wire.hpp"

namespace uavshare {

bool fresh(TimeMs stamp, TimeMs now, TimeMs window) {
    if (stamp > now) return stamp - now <= window;
    return now - stamp <= window;
}

void require_fresh(TimeMs stamp, TimeMs now, TimeMs window) {
    if (!fresh(stamp, now, window)) throw ProtocolError(Error::StaleTimestamp);
}

const RegistryEntry& signer_entry(const Env& env, const PartyId& id) {
    const auto* e = env.registry->find(id);
    if (!e) throw ProtocolError(Error::UnknownId, id);
    if (e->status != EntityStatus::Active) throw ProtocolError(Error::BlacklistedId, id);
    return *e;
}

bool signature_ok(const Env& env, const PartyId& signer, ByteView msg, const Signature& sig) {
    const auto& e = signer_entry(env, signer);
    return verify(*env.params, signer, e.pub, msg, sig);
}

void require_signature(const Env& env, const PartyId& signer, ByteView msg, const Signature& sig, Error code) {
    if (!signature_ok(env, signer, msg, sig)) throw ProtocolError(code, signer);
}

bool ReplayGuard::first_time(ByteView frame, TimeMs now, TimeMs window) {
    std::erase_if(seen_, [&](const auto& kv) { return now > kv.second && now - kv.second > 2 * window; });
    return seen_.emplace(sha256(frame), now).second;
}

std::string reject_detail(ByteView frame, const ProtocolError& e) {
    return std::string(msg_type_name(frame_tag(frame))) + " " + std::string(error_name(e.code()));
}

}  // namespace uavshare
