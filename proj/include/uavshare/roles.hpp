#pragma once

// Plumbing shared by the protocol role state machines.

#include <map>
#include <string>

#include "uavshare/errors.hpp"
#include "uavshare/netsim.hpp"
#include "uavshare/signcrypt.hpp"

namespace uavshare {

using sim::PartyId;
using sim::TimeMs;

struct Env {
    const SystemParams* params;
    const Registry* registry;
};

// |stamp - now| <= window.
bool fresh(TimeMs stamp, TimeMs now, TimeMs window);
// Throws StaleTimestamp.
void require_fresh(TimeMs stamp, TimeMs now, TimeMs window);

// Registry entry of an active signer. Throws UnknownId or BlacklistedId.
const RegistryEntry& signer_entry(const Env& env, const PartyId& id);
bool signature_ok(const Env& env, const PartyId& signer, ByteView msg, const Signature& sig);
// Throws `code` when the signature does not verify.
void require_signature(const Env& env, const PartyId& signer, ByteView msg, const Signature& sig,
                       Error code = Error::AuthFailure);

// Remembers frames already processed so duplicates can be ignored.
class ReplayGuard {
public:
    // True the first time a frame is seen; false for duplicates.
    bool first_time(ByteView frame, TimeMs now, TimeMs window);

private:
    std::map<Digest, TimeMs> seen_;
};

// "<type> <error>" for reject notes.
std::string reject_detail(ByteView frame, const ProtocolError& e);

}  // namespace uavshare
