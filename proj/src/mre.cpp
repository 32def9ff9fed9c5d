#include "uavshare/mre.hpp"

#include <algorithm>

#include "uavshare/errors.hpp"

namespace uavshare {

namespace {

Bytes box_aad(const GroupElement& ephemeral, std::string_view id) {
    auto u = ephemeral.encode();
    Bytes aad(u.begin(), u.end());
    append(aad, to_bytes(id));
    return aad;
}

}  // namespace

Bytes MreCiphertext::encode() const {
    Bytes out;
    auto u = ephemeral.encode();
    append(out, u);
    put_u16(out, static_cast<std::uint16_t>(boxes.size()));
    for (const auto& box : boxes) {
        put_u16(out, static_cast<std::uint16_t>(box.recipient_id.size()));
        append(out, to_bytes(box.recipient_id));
        put_u16(out, static_cast<std::uint16_t>(box.wrapped.size()));
        append(out, box.wrapped);
    }
    return out;
}

MreCiphertext MreCiphertext::decode(ByteView bytes) {
    if (bytes.size() < kPointSize + 2) throw ProtocolError(Error::Malformed, "short MRE ciphertext");
    MreCiphertext ct;
    ct.ephemeral = GroupElement::decode(bytes.first(kPointSize));
    std::size_t pos = kPointSize;
    auto count = get_u16(bytes, pos);
    pos += 2;
    auto take = [&](std::size_t n) {
        if (n > bytes.size() - pos) throw ProtocolError(Error::Malformed, "MRE box overruns buffer");
        auto v = bytes.subspan(pos, n);
        pos += n;
        return v;
    };
    for (std::uint16_t i = 0; i < count; ++i) {
        auto id_len = get_u16(bytes, pos);
        pos += 2;
        auto id = to_string(take(id_len));
        auto box_len = get_u16(bytes, pos);
        pos += 2;
        auto box = take(box_len);
        ct.boxes.push_back(MreBox{std::move(id), Bytes(box.begin(), box.end())});
    }
    if (pos != bytes.size()) throw ProtocolError(Error::Malformed, "trailing bytes after MRE boxes");
    return ct;
}

const MreBox* MreCiphertext::box_for(std::string_view id) const {
    auto it = std::find_if(boxes.begin(), boxes.end(), [&](const MreBox& b) { return b.recipient_id == id; });
    return it == boxes.end() ? nullptr : &*it;
}

MreCiphertext mre_encrypt(const SystemParams&, std::span<const Recipient> recipients,
                          const std::set<std::string, std::less<>>& blacklist, const SymKey& payload, Drbg& rng) {
    std::vector<const Recipient*> admitted;
    for (const auto& r : recipients)
        if (!blacklist.contains(r.id)) admitted.push_back(&r);
    if (admitted.empty()) throw ProtocolError(Error::EmptyRecipientSet);

    auto r = Scalar::random_nonzero(rng);
    MreCiphertext ct;
    ct.ephemeral = base_mult(r);
    for (const auto* rec : admitted) {
        SymKey kek = hash_h2(scalar_mult(r, rec->verify_key), ct.ephemeral);
        ct.boxes.push_back(MreBox{rec->id, sym_encrypt(kek, payload, box_aad(ct.ephemeral, rec->id), rng)});
    }
    return ct;
}

SymKey mre_decrypt(const SystemParams&, const FullKeyPair& my_key, const MreCiphertext& ct) {
    const auto* box = ct.box_for(my_key.id);
    if (!box) throw ProtocolError(Error::NoBoxForId, my_key.id);
    SymKey kek = hash_h2(scalar_mult(my_key.combined_secret(), ct.ephemeral), ct.ephemeral);
    auto plain = sym_decrypt(kek, box->wrapped, box_aad(ct.ephemeral, my_key.id));
    if (!plain || plain->size() != SymKey{}.size()) throw ProtocolError(Error::DecryptFailure, "MRE box");
    SymKey out{};
    std::copy(plain->begin(), plain->end(), out.begin());
    return out;
}

}  // namespace uavshare
