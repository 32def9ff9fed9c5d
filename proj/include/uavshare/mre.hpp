#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "uavshare/pki.hpp"

namespace uavshare {

struct MreBox {
    std::string recipient_id;
    Bytes wrapped;  // sym_encrypt(H2(r * VK_j, U), payload, aad = U || id_j)
};

// One ephemeral U = r*P shared by every box.
struct MreCiphertext {
    GroupElement ephemeral;
    std::vector<MreBox> boxes;

    // U (33) || count (2) || repeated [id-len (2) || id || box-len (2) || box]
    Bytes encode() const;
    static MreCiphertext decode(ByteView bytes);

    const MreBox* box_for(std::string_view id) const;
};

// Wraps the 32-byte payload for every recipient not in the blacklist.
// Costs 1 + N_admitted T_m and N_admitted T_AES. Throws EmptyRecipientSet.
MreCiphertext mre_encrypt(const SystemParams& params, std::span<const Recipient> recipients,
                          const std::set<std::string, std::less<>>& blacklist, const SymKey& payload, Drbg& rng);

// One T_m and one T_AES. Throws NoBoxForId or DecryptFailure.
SymKey mre_decrypt(const SystemParams& params, const FullKeyPair& my_key, const MreCiphertext& ct);

}  // namespace uavshare
