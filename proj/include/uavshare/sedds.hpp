#pragma once

// Direct data sharing between a user equipment (UE) and a UAV that caches
// SP-signed content. The UAV sends the content encrypted under a DH key but
// withholds its half of the key until the UE returns a signed hint and
// prepays; the UE acknowledges with a signed digest of what it received, and
// the AUSF settles payment from whichever signature the UAV can show.

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "uavshare/roles.hpp"
#include "uavshare/wire.hpp"

namespace uavshare::sedds {

// ---- content -----------------------------------------------------------------

// Message σ_sp covers: the file name and H3(M).
Bytes content_statement(const std::string& file_name, ByteView content);

struct SignedContent {
    Bytes content;
    Signature sigma_sp;
};

SignedContent sp_sign_content(const SystemParams& params, const FullKeyPair& sp, const std::string& file_name,
                              Bytes content, Drbg& rng);

// H3(FN) xor H3(blob)
Digest file_binding(const std::string& file_name, ByteView blob);

// ---- messages ----------------------------------------------------------------

struct Req {
    PartyId ue, uav;
    std::string file_name;
    TimeMs ts = 0;
    Bytes ga;
    Signature sig;

    Bytes body() const;
    Bytes encode() const;
    static Req decode(ByteView frame);
};

struct Data {
    PartyId uav, ue;
    Bytes m_prime;
    TimeMs ts = 0;
    Signature sigma_sp;
    Signature sig;

    Bytes body() const;
    Bytes encode() const;
    static Data decode(ByteView frame);
};

struct Hint {
    PartyId ue, uav;
    std::string file_name;
    TimeMs ts = 0;
    TimeMs ti = 0;
    Digest x1{};
    Signature sig;

    Bytes body() const;
    Bytes encode() const;
    static Hint decode(ByteView frame);
};

struct KeyRel {
    PartyId uav, ue;
    Bytes gb;
    std::string file_name;
    Signature sig;

    Bytes body() const;
    Bytes encode() const;
    static KeyRel decode(ByteView frame);
};

struct Ack {
    PartyId ue, uav;
    std::string file_name;
    Digest x2{};
    TimeMs ti = 0;
    Signature sig;

    Bytes body() const;
    Bytes encode() const;
    static Ack decode(ByteView frame);
};

// Evidence a UE files when the released key opens content that fails σ_sp:
// its own hint, the UAV-signed Data and KeyRel, and the DH exponent a so the
// AUSF can reopen M′ itself.
struct Dispute {
    PartyId ue;
    Bytes hint_frame;
    Bytes data_frame;
    Bytes keyrel_frame;
    ScalarBytes a{};

    Bytes encode() const;
    static Dispute decode(ByteView frame);
};

// Frame size minus the plaintext content it carries.
std::uint64_t overhead_bytes(ByteView frame);

// ---- payment -----------------------------------------------------------------

enum class PaymentState { None, Prepaid, Settled, Refunded };
std::string_view payment_state_name(PaymentState s);

class PaymentLedger {
public:
    struct Entry {
        PaymentState state = PaymentState::None;
        int percent = 0;
    };

    // none -> prepaid(p). Idempotent; returns false if the entry had already moved on.
    bool prepay(const PartyId& ue, const std::string& file_name, int percent);
    // prepaid -> settled(100)
    bool settle(const PartyId& ue, const std::string& file_name);
    // prepaid -> refunded(0)
    bool refund(const PartyId& ue, const std::string& file_name);

    Entry entry(const PartyId& ue, const std::string& file_name) const;
    // One "ue,fn,state,percent" line per entry, sorted.
    std::string export_text() const;

private:
    std::map<std::pair<PartyId, std::string>, Entry> entries_;
};

// ---- adjudication ------------------------------------------------------------

enum class Outcome { SuccessfulTransfer, FailedConnection, InvalidClaim };
std::string_view outcome_name(Outcome o);

struct Verdict {
    Outcome outcome;
    PartyId ue;
    std::string file_name;
    PartyId submitter;
    Bytes evidence;  // the signed frame the verdict rests on
};

class Ausf : public sim::Node {
public:
    Ausf(KeyGenerationCenter& kgc, PaymentLedger& ledger, PartyId sp_id);

    // Original content per file name, as published by the SP.
    void register_original(const std::string& file_name, Bytes content);

    // Claim is an Ack frame, a Hint frame, or a Dispute frame. Throws UnknownUE,
    // UnknownFile, Malformed.
    Verdict adjudicate(const PartyId& submitter, ByteView claim);

    const std::vector<Verdict>& verdicts() const { return verdicts_; }

    void receive(sim::Context& ctx, const PartyId& from, ByteView payload) override;

private:
    Verdict on_ack(const PartyId& submitter, ByteView frame);
    Verdict on_hint(const PartyId& submitter, ByteView frame);
    Verdict on_dispute(const PartyId& submitter, ByteView frame);
    const Bytes& original(const std::string& file_name) const;
    void require_known_ue(const PartyId& ue) const;
    Env env() const { return {&kgc_.params(), &kgc_.registry()}; }

    KeyGenerationCenter& kgc_;
    PaymentLedger& ledger_;
    PartyId sp_id_;
    std::map<std::string, Bytes> originals_;
    std::vector<Verdict> verdicts_;
};

// ---- roles -------------------------------------------------------------------

struct SessionConfig {
    PartyId sp = "sp";
    PartyId ausf = "ausf";
    TimeMs window_ms = 30'000;
    int prepay_percent = 20;
};

enum class UeBehavior { Honest, FreeRide, ForgeClaim };

class UserEquipment : public sim::Node {
public:
    UserEquipment(FullKeyPair key, Env env, SessionConfig config, PaymentLedger& ledger,
                  UeBehavior behavior = UeBehavior::Honest);

    // Requests sent when the simulation starts.
    void want(PartyId uav, std::string file_name);

    Req request(const PartyId& uav, const std::string& file_name, TimeMs now, Drbg& rng);
    // Checks σ_j, prepays and signs the key hint. Throws AuthFailure.
    Hint hint(const Data& data, TimeMs now, Drbg& rng);
    // Derives k_c, opens M′ and checks σ_sp. Throws DecryptFailure or SpSignatureInvalid.
    Ack finalize(const KeyRel& keyrel, TimeMs now, Drbg& rng);
    // Evidence for the AUSF after SpSignatureInvalid. Throws NoSession.
    Dispute dispute(const PartyId& uav, const std::string& file_name) const;

    // Plaintext recovered and verified under σ_sp, per file name.
    const std::map<std::string, Bytes>& received() const { return received_; }
    // Content decrypted but rejected by σ_sp, per file name.
    const std::map<std::string, Bytes>& rejected() const { return rejected_; }
    // Ciphertexts held, per file name.
    std::size_t held_ciphertexts() const;
    const PartyId& id() const { return key_.id; }

    void start(sim::Context& ctx) override;
    void receive(sim::Context& ctx, const PartyId& from, ByteView payload) override;
    void timer(sim::Context& ctx, std::uint64_t id) override;

private:
    enum class Stage { AwaitData, AwaitKey, Done, Disputed };
    struct Session {
        PartyId uav;
        std::string file_name;
        TimeMs ts = 0;
        Scalar a;
        Stage stage = Stage::AwaitData;
        Bytes data_frame;
        Bytes hint_frame;
        Bytes keyrel_frame;
        Bytes m_prime;
        Signature sigma_sp;
        TimeMs ti = 0;
    };

    Session* find(const PartyId& uav, const std::string& file_name, std::optional<TimeMs> ts = std::nullopt);
    const Session* find(const PartyId& uav, const std::string& file_name) const;
    Session* find_by_ts(const PartyId& uav, TimeMs ts);

    FullKeyPair key_;
    Env env_;
    SessionConfig config_;
    PaymentLedger& ledger_;
    UeBehavior behavior_;
    std::vector<std::pair<PartyId, std::string>> wants_;
    std::map<std::uint64_t, Session> sessions_;  // keyed by expiry timer id
    std::uint64_t next_session_ = 1;
    std::map<std::string, Bytes> received_;
    std::map<std::string, Bytes> rejected_;
};

enum class UavBehavior { Honest, Substitute };

class UavNode : public sim::Node {
public:
    UavNode(FullKeyPair key, Env env, SessionConfig config, UavBehavior behavior = UavBehavior::Honest);

    void cache(const std::string& file_name, SignedContent content);

    // Checks the request, derives k_c and sends M′ with the key withheld.
    // Throws AuthFailure, StaleTimestamp, UnknownFile, BlacklistedId.
    Data respond(const Req& req, TimeMs now, Drbg& rng);
    // Throws AuthFailure, StaleTimestamp, HintMismatch, NoSession.
    KeyRel release_key(const Hint& hint, TimeMs now, Drbg& rng);

    std::size_t keys_released() const { return keys_released_; }
    const PartyId& id() const { return key_.id; }

    void receive(sim::Context& ctx, const PartyId& from, ByteView payload) override;
    void timer(sim::Context& ctx, std::uint64_t id) override;

private:
    enum class Stage { AwaitHint, AwaitAck, Acked, Claimed };
    struct Session {
        PartyId ue;
        std::string file_name;
        TimeMs ts = 0;
        Scalar b;
        Digest m_prime_digest{};
        Stage stage = Stage::AwaitHint;
        Bytes hint_frame;
    };
    using Key = std::tuple<PartyId, std::string, TimeMs>;

    FullKeyPair key_;
    Env env_;
    SessionConfig config_;
    UavBehavior behavior_;
    std::map<std::string, SignedContent> cache_;
    std::map<Key, Session> sessions_;
    std::vector<Key> timer_keys_;
    std::size_t keys_released_ = 0;
    ReplayGuard replay_;
};

}  // namespace uavshare::sedds
