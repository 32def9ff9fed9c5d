#include "uavshare/sedds.hpp"

#include <algorithm>
#include <sstream>

#include "uavshare/errors.hpp"

namespace uavshare::sedds {

namespace {

constexpr auto tag(MsgType t) { return static_cast<std::uint8_t>(t); }

void expect_tag(const FrameReader& rd, MsgType t) {
    if (rd.tag() != tag(t)) throw ProtocolError(Error::Malformed, "unexpected tag");
}

Bytes copy(ByteView v) { return Bytes(v.begin(), v.end()); }

Bytes with_sig(FrameWriter w, const Signature& sig) {
    w.field(sig.encode());
    return std::move(w).bytes();
}

SymKey content_key(const DhElement& kc) {
    auto d = hash_h3(kc.encode());
    SymKey k{};
    std::copy(d.begin(), d.end(), k.begin());
    return k;
}

Bytes content_aad(const PartyId& uav, const PartyId& ue, TimeMs ts) {
    return FrameWriter(tag(MsgType::Data)).field(uav).field(ue).u64(ts).bytes();
}

}  // namespace

// ---- content -----------------------------------------------------------------

Bytes content_statement(const std::string& file_name, ByteView content) {
    return FrameWriter(0).field(std::string_view("uavshare/content")).field(file_name).field(hash_h3(content)).bytes();
}

SignedContent sp_sign_content(const SystemParams& params, const FullKeyPair& sp, const std::string& file_name,
                              Bytes content, Drbg& rng) {
    auto sig = sign(params, sp, content_statement(file_name, content), rng);
    return {std::move(content), std::move(sig)};
}

Digest file_binding(const std::string& file_name, ByteView blob) {
    return xor_digest(hash_h3(to_bytes(file_name)), hash_h3(blob));
}

// ---- messages ----------------------------------------------------------------

Bytes Req::body() const {
    return FrameWriter(tag(MsgType::Req)).field(ue).field(uav).field(file_name).u64(ts).field(ga).bytes();
}

Bytes Req::encode() const {
    FrameWriter w(tag(MsgType::Req));
    w.field(ue).field(uav).field(file_name).u64(ts).field(ga);
    return with_sig(std::move(w), sig);
}

Req Req::decode(ByteView frame) {
    FrameReader rd(frame);
    expect_tag(rd, MsgType::Req);
    Req m;
    m.ue = rd.text();
    m.uav = rd.text();
    m.file_name = rd.text();
    m.ts = rd.u64();
    m.ga = copy(rd.field());
    m.sig = Signature::decode(rd.field());
    rd.finish();
    if (m.ga.size() != kDhSize) throw ProtocolError(Error::Malformed, "dh share");
    return m;
}

Bytes Data::body() const {
    return FrameWriter(tag(MsgType::Data))
        .field(uav).field(ue).field(m_prime).u64(ts).field(sigma_sp.encode()).bytes();
}

Bytes Data::encode() const {
    FrameWriter w(tag(MsgType::Data));
    w.field(uav).field(ue).field(m_prime).u64(ts).field(sigma_sp.encode());
    return with_sig(std::move(w), sig);
}

Data Data::decode(ByteView frame) {
    FrameReader rd(frame);
    expect_tag(rd, MsgType::Data);
    Data m;
    m.uav = rd.text();
    m.ue = rd.text();
    m.m_prime = copy(rd.field());
    m.ts = rd.u64();
    m.sigma_sp = Signature::decode(rd.field());
    m.sig = Signature::decode(rd.field());
    rd.finish();
    return m;
}

Bytes Hint::body() const {
    return FrameWriter(tag(MsgType::Hint)).field(ue).field(uav).field(file_name).u64(ts).u64(ti).field(x1).bytes();
}

Bytes Hint::encode() const {
    FrameWriter w(tag(MsgType::Hint));
    w.field(ue).field(uav).field(file_name).u64(ts).u64(ti).field(x1);
    return with_sig(std::move(w), sig);
}

Hint Hint::decode(ByteView frame) {
    FrameReader rd(frame);
    expect_tag(rd, MsgType::Hint);
    Hint m;
    m.ue = rd.text();
    m.uav = rd.text();
    m.file_name = rd.text();
    m.ts = rd.u64();
    m.ti = rd.u64();
    m.x1 = rd.fixed<32>();
    m.sig = Signature::decode(rd.field());
    rd.finish();
    return m;
}

Bytes KeyRel::body() const {
    return FrameWriter(tag(MsgType::KeyRel)).field(uav).field(ue).field(gb).field(file_name).bytes();
}

Bytes KeyRel::encode() const {
    FrameWriter w(tag(MsgType::KeyRel));
    w.field(uav).field(ue).field(gb).field(file_name);
    return with_sig(std::move(w), sig);
}

KeyRel KeyRel::decode(ByteView frame) {
    FrameReader rd(frame);
    expect_tag(rd, MsgType::KeyRel);
    KeyRel m;
    m.uav = rd.text();
    m.ue = rd.text();
    m.gb = copy(rd.field());
    m.file_name = rd.text();
    m.sig = Signature::decode(rd.field());
    rd.finish();
    if (m.gb.size() != kDhSize) throw ProtocolError(Error::Malformed, "dh share");
    return m;
}

Bytes Ack::body() const {
    return FrameWriter(tag(MsgType::Ack)).field(ue).field(uav).field(file_name).field(x2).u64(ti).bytes();
}

Bytes Ack::encode() const {
    FrameWriter w(tag(MsgType::Ack));
    w.field(ue).field(uav).field(file_name).field(x2).u64(ti);
    return with_sig(std::move(w), sig);
}

Ack Ack::decode(ByteView frame) {
    FrameReader rd(frame);
    expect_tag(rd, MsgType::Ack);
    Ack m;
    m.ue = rd.text();
    m.uav = rd.text();
    m.file_name = rd.text();
    m.x2 = rd.fixed<32>();
    m.ti = rd.u64();
    m.sig = Signature::decode(rd.field());
    rd.finish();
    return m;
}

Bytes Dispute::encode() const {
    return FrameWriter(tag(MsgType::Dispute))
        .field(ue).field(hint_frame).field(data_frame).field(keyrel_frame).field(a).bytes();
}

Dispute Dispute::decode(ByteView frame) {
    FrameReader rd(frame);
    expect_tag(rd, MsgType::Dispute);
    Dispute d;
    d.ue = rd.text();
    d.hint_frame = copy(rd.field());
    d.data_frame = copy(rd.field());
    d.keyrel_frame = copy(rd.field());
    d.a = rd.fixed<kScalarSize>();
    rd.finish();
    return d;
}

std::uint64_t overhead_bytes(ByteView frame) {
    auto content = [](const Data& d) -> std::uint64_t {
        return d.m_prime.size() >= kSymOverhead ? d.m_prime.size() - kSymOverhead : 0;
    };
    switch (static_cast<MsgType>(frame_tag(frame))) {
    case MsgType::Data:
        return frame.size() - content(Data::decode(frame));
    case MsgType::Dispute:
        return frame.size() - content(Data::decode(Dispute::decode(frame).data_frame));
    default:
        return frame.size();
    }
}

// ---- payment -----------------------------------------------------------------

std::string_view payment_state_name(PaymentState s) {
    switch (s) {
    case PaymentState::None: return "none";
    case PaymentState::Prepaid: return "prepaid";
    case PaymentState::Settled: return "settled";
    case PaymentState::Refunded: return "refunded";
    }
    return "?";
}

bool PaymentLedger::prepay(const PartyId& ue, const std::string& file_name, int percent) {
    if (percent <= 0 || percent >= 100) throw std::invalid_argument("prepay percent must be in (0, 100)");
    auto& e = entries_[{ue, file_name}];
    if (e.state != PaymentState::None) return e.state == PaymentState::Prepaid;
    e = {PaymentState::Prepaid, percent};
    return true;
}

bool PaymentLedger::settle(const PartyId& ue, const std::string& file_name) {
    auto it = entries_.find({ue, file_name});
    if (it == entries_.end() || it->second.state != PaymentState::Prepaid) return false;
    it->second = {PaymentState::Settled, 100};
    return true;
}

bool PaymentLedger::refund(const PartyId& ue, const std::string& file_name) {
    auto it = entries_.find({ue, file_name});
    if (it == entries_.end() || it->second.state != PaymentState::Prepaid) return false;
    it->second = {PaymentState::Refunded, 0};
    return true;
}

PaymentLedger::Entry PaymentLedger::entry(const PartyId& ue, const std::string& file_name) const {
    auto it = entries_.find({ue, file_name});
    return it == entries_.end() ? Entry{} : it->second;
}

std::string PaymentLedger::export_text() const {
    std::ostringstream out;
    for (const auto& [k, e] : entries_)
        out << k.first << ',' << k.second << ',' << payment_state_name(e.state) << ',' << e.percent << '\n';
    return out.str();
}

// ---- adjudication ------------------------------------------------------------

std::string_view outcome_name(Outcome o) {
    switch (o) {
    case Outcome::SuccessfulTransfer: return "SuccessfulTransfer";
    case Outcome::FailedConnection: return "FailedConnection";
    case Outcome::InvalidClaim: return "InvalidClaim";
    }
    return "?";
}

Ausf::Ausf(KeyGenerationCenter& kgc, PaymentLedger& ledger, PartyId sp_id)
    : kgc_(kgc), ledger_(ledger), sp_id_(std::move(sp_id)) {}

void Ausf::register_original(const std::string& file_name, Bytes content) {
    originals_[file_name] = std::move(content);
}

const Bytes& Ausf::original(const std::string& file_name) const {
    auto it = originals_.find(file_name);
    if (it == originals_.end()) throw ProtocolError(Error::UnknownFile, file_name);
    return it->second;
}

void Ausf::require_known_ue(const PartyId& ue) const {
    if (!kgc_.registry().find(ue)) throw ProtocolError(Error::UnknownUE, ue);
}

namespace {
// Signature check against the registered key even if the signer has since been revoked.
bool signed_by(const KeyGenerationCenter& kgc, const PartyId& id, ByteView msg, const Signature& sig) {
    const auto* e = kgc.registry().find(id);
    return e && verify(kgc.params(), id, e->pub, msg, sig);
}

void offense(KeyGenerationCenter& kgc, const PartyId& id) {
    if (kgc.registry().find(id)) kgc.report_offense(id);
}
}  // namespace

Verdict Ausf::adjudicate(const PartyId& submitter, ByteView claim) {
    Verdict v;
    switch (static_cast<MsgType>(frame_tag(claim))) {
    case MsgType::Ack: v = on_ack(submitter, claim); break;
    case MsgType::Hint: v = on_hint(submitter, claim); break;
    case MsgType::Dispute: v = on_dispute(submitter, claim); break;
    default: throw ProtocolError(Error::Malformed, "not a claim");
    }
    verdicts_.push_back(v);
    return v;
}

Verdict Ausf::on_ack(const PartyId& submitter, ByteView frame) {
    auto ack = Ack::decode(frame);
    require_known_ue(ack.ue);
    const auto& m = original(ack.file_name);
    Verdict v{Outcome::InvalidClaim, ack.ue, ack.file_name, submitter, copy(frame)};
    if (!signed_by(kgc_, ack.ue, ack.body(), ack.sig)) {
        offense(kgc_, submitter);
        return v;
    }
    if (ack.x2 != file_binding(ack.file_name, m)) return v;
    ledger_.settle(ack.ue, ack.file_name);
    v.outcome = Outcome::SuccessfulTransfer;
    return v;
}

Verdict Ausf::on_hint(const PartyId& submitter, ByteView frame) {
    auto hint = Hint::decode(frame);
    require_known_ue(hint.ue);
    original(hint.file_name);
    Verdict v{Outcome::InvalidClaim, hint.ue, hint.file_name, submitter, copy(frame)};
    if (!signed_by(kgc_, hint.ue, hint.body(), hint.sig)) {
        offense(kgc_, submitter);
        return v;
    }
    switch (ledger_.entry(hint.ue, hint.file_name).state) {
    case PaymentState::Prepaid:
        // A revoked UE forfeits its prepayment.
        if (kgc_.registry().is_active(hint.ue)) ledger_.refund(hint.ue, hint.file_name);
        v.outcome = Outcome::FailedConnection;
        break;
    case PaymentState::Refunded:
        v.outcome = Outcome::FailedConnection;
        break;
    default:
        break;
    }
    return v;
}

Verdict Ausf::on_dispute(const PartyId& submitter, ByteView frame) {
    auto d = Dispute::decode(frame);
    require_known_ue(d.ue);
    auto hint = Hint::decode(d.hint_frame);
    auto data = Data::decode(d.data_frame);
    auto keyrel = KeyRel::decode(d.keyrel_frame);
    const auto& m = original(hint.file_name);
    Verdict v{Outcome::InvalidClaim, d.ue, hint.file_name, submitter, copy(frame)};

    const bool consistent = hint.ue == d.ue && data.ue == d.ue && keyrel.ue == d.ue && data.uav == hint.uav &&
                            keyrel.uav == hint.uav && data.ts == hint.ts && keyrel.file_name == hint.file_name;
    if (!consistent || !signed_by(kgc_, data.uav, data.body(), data.sig) ||
        !signed_by(kgc_, keyrel.uav, keyrel.body(), keyrel.sig) || !signed_by(kgc_, d.ue, hint.body(), hint.sig)) {
        offense(kgc_, d.ue);
        return v;
    }
    auto kc = dh_exp(DhElement::decode(keyrel.gb), Scalar::decode(d.a));
    auto opened = sym_decrypt(content_key(kc), data.m_prime, content_aad(data.uav, data.ue, data.ts));
    if (!opened || *opened == m) {
        offense(kgc_, d.ue);
        return v;
    }
    if (kgc_.registry().is_active(d.ue)) ledger_.refund(d.ue, hint.file_name);
    offense(kgc_, data.uav);
    v.outcome = Outcome::FailedConnection;
    return v;
}

void Ausf::receive(sim::Context& ctx, const PartyId& from, ByteView payload) {
    try {
        auto v = adjudicate(from, payload);
        ctx.note("verdict", std::string(outcome_name(v.outcome)) + " ue=" + v.ue + " fn=" + v.file_name);
    } catch (const ProtocolError& e) {
        ctx.note("reject", reject_detail(payload, e));
    }
}

// ---- user equipment ----------------------------------------------------------

UserEquipment::UserEquipment(FullKeyPair key, Env env, SessionConfig config, PaymentLedger& ledger,
                             UeBehavior behavior)
    : key_(std::move(key)), env_(env), config_(std::move(config)), ledger_(ledger), behavior_(behavior) {}

void UserEquipment::want(PartyId uav, std::string file_name) {
    wants_.emplace_back(std::move(uav), std::move(file_name));
}

UserEquipment::Session* UserEquipment::find(const PartyId& uav, const std::string& file_name,
                                            std::optional<TimeMs> ts) {
    for (auto& [id, s] : sessions_)
        if (s.uav == uav && s.file_name == file_name && (!ts || s.ts == *ts)) return &s;
    return nullptr;
}

const UserEquipment::Session* UserEquipment::find(const PartyId& uav, const std::string& file_name) const {
    for (const auto& [id, s] : sessions_)
        if (s.uav == uav && s.file_name == file_name) return &s;
    return nullptr;
}

UserEquipment::Session* UserEquipment::find_by_ts(const PartyId& uav, TimeMs ts) {
    for (auto& [id, s] : sessions_)
        if (s.uav == uav && s.ts == ts) return &s;
    return nullptr;
}

Req UserEquipment::request(const PartyId& uav, const std::string& file_name, TimeMs now, Drbg& rng) {
    Session s;
    s.uav = uav;
    s.file_name = file_name;
    s.ts = now;
    s.a = Scalar::random_nonzero(rng);
    Req req;
    req.ue = key_.id;
    req.uav = uav;
    req.file_name = file_name;
    req.ts = now;
    req.ga = dh_exp(DhElement::generator(), s.a).encode();
    req.sig = sign(*env_.params, key_, req.body(), rng);
    sessions_.emplace(next_session_++, std::move(s));
    return req;
}

Hint UserEquipment::hint(const Data& data, TimeMs now, Drbg& rng) {
    auto* s = find_by_ts(data.uav, data.ts);
    if (!s || data.ue != key_.id) throw ProtocolError(Error::NoSession, data.uav);
    if (s->stage != Stage::AwaitData) throw ProtocolError(Error::Malformed, "data already received");
    require_signature(env_, data.uav, data.body(), data.sig);

    s->data_frame = data.encode();
    s->m_prime = data.m_prime;
    s->sigma_sp = data.sigma_sp;
    s->ti = now;
    Hint h;
    h.ue = key_.id;
    h.uav = data.uav;
    h.file_name = s->file_name;
    h.ts = s->ts;
    h.ti = now;
    h.x1 = file_binding(s->file_name, data.m_prime);
    h.sig = sign(*env_.params, key_, h.body(), rng);
    s->hint_frame = h.encode();
    s->stage = Stage::AwaitKey;
    ledger_.prepay(key_.id, s->file_name, config_.prepay_percent);
    return h;
}

Ack UserEquipment::finalize(const KeyRel& keyrel, TimeMs, Drbg& rng) {
    auto* s = find(keyrel.uav, keyrel.file_name);
    if (!s || keyrel.ue != key_.id) throw ProtocolError(Error::NoSession, keyrel.uav);
    if (s->stage != Stage::AwaitKey) throw ProtocolError(Error::Malformed, "key not expected");
    require_signature(env_, keyrel.uav, keyrel.body(), keyrel.sig);
    s->keyrel_frame = keyrel.encode();

    auto kc = dh_exp(DhElement::decode(keyrel.gb), s->a);
    auto m = sym_decrypt(content_key(kc), s->m_prime, content_aad(s->uav, key_.id, s->ts));
    if (!m) throw ProtocolError(Error::DecryptFailure, s->file_name);
    if (!signature_ok(env_, config_.sp, content_statement(s->file_name, *m), s->sigma_sp)) {
        s->stage = Stage::Disputed;
        rejected_[s->file_name] = std::move(*m);
        throw ProtocolError(Error::SpSignatureInvalid, s->file_name);
    }

    Ack ack;
    ack.ue = key_.id;
    ack.uav = s->uav;
    ack.file_name = s->file_name;
    ack.x2 = file_binding(s->file_name, *m);
    ack.ti = s->ti;
    ack.sig = sign(*env_.params, key_, ack.body(), rng);
    received_[s->file_name] = std::move(*m);
    s->stage = Stage::Done;
    return ack;
}

Dispute UserEquipment::dispute(const PartyId& uav, const std::string& file_name) const {
    const auto* s = find(uav, file_name);
    if (!s || s->keyrel_frame.empty()) throw ProtocolError(Error::NoSession, uav);
    return {key_.id, s->hint_frame, s->data_frame, s->keyrel_frame, s->a.encode()};
}

std::size_t UserEquipment::held_ciphertexts() const {
    return std::count_if(sessions_.begin(), sessions_.end(), [](const auto& kv) { return !kv.second.m_prime.empty(); });
}

void UserEquipment::start(sim::Context& ctx) {
    for (const auto& [uav, fn] : wants_) {
        auto req = request(uav, fn, ctx.now(), ctx.rng());
        ctx.send(uav, req.encode());
        ctx.set_timer(config_.window_ms, next_session_ - 1);
    }
}

void UserEquipment::receive(sim::Context& ctx, const PartyId&, ByteView payload) {
    try {
        switch (static_cast<MsgType>(frame_tag(payload))) {
        case MsgType::Data: {
            auto data = Data::decode(payload);
            auto* s = find_by_ts(data.uav, data.ts);
            if (s && s->stage != Stage::AwaitData && s->data_frame == copy(payload))
                return ctx.note("duplicate", "Data");
            if (behavior_ == UeBehavior::FreeRide) {
                if (!s) throw ProtocolError(Error::NoSession, data.uav);
                require_signature(env_, data.uav, data.body(), data.sig);
                ctx.accepted(data.uav, payload);
                s->m_prime = data.m_prime;
                s->stage = Stage::Done;
                return ctx.note("abort", "no hint for " + s->file_name);
            }
            auto h = hint(data, ctx.now(), ctx.rng());
            ctx.accepted(data.uav, payload);
            ctx.note("prepay", h.file_name + " " + std::to_string(config_.prepay_percent));
            ctx.send(data.uav, h.encode());
            break;
        }
        case MsgType::KeyRel: {
            auto kr = KeyRel::decode(payload);
            auto* s = find(kr.uav, kr.file_name);
            if (s && s->keyrel_frame == copy(payload)) return ctx.note("duplicate", "KeyRel");
            try {
                auto ack = finalize(kr, ctx.now(), ctx.rng());
                ctx.accepted(kr.uav, payload);
                ctx.note("finalize", kr.file_name + " bytes=" + std::to_string(received_[kr.file_name].size()));
                if (behavior_ == UeBehavior::ForgeClaim) {
                    // Claims the UAV failed, backing it with a doctored UAV signature.
                    auto d = dispute(kr.uav, kr.file_name);
                    d.data_frame.back() ^= 0x01;
                    return ctx.send(config_.ausf, d.encode());
                }
                ctx.send(kr.uav, ack.encode());
            } catch (const ProtocolError& e) {
                if (e.code() != Error::SpSignatureInvalid) throw;
                ctx.accepted(kr.uav, payload);
                ctx.note("dispute", kr.file_name);
                ctx.send(config_.ausf, dispute(kr.uav, kr.file_name).encode());
            }
            break;
        }
        default:
            throw ProtocolError(Error::Malformed, "unexpected message");
        }
    } catch (const ProtocolError& e) {
        ctx.note("reject", reject_detail(payload, e));
    }
}

void UserEquipment::timer(sim::Context& ctx, std::uint64_t id) {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return;
    ctx.note("expire", it->second.uav + " " + it->second.file_name);
    sessions_.erase(it);
}

// ---- UAV ---------------------------------------------------------------------

UavNode::UavNode(FullKeyPair key, Env env, SessionConfig config, UavBehavior behavior)
    : key_(std::move(key)), env_(env), config_(std::move(config)), behavior_(behavior) {}

void UavNode::cache(const std::string& file_name, SignedContent content) { cache_[file_name] = std::move(content); }

Data UavNode::respond(const Req& req, TimeMs now, Drbg& rng) {
    if (req.uav != key_.id) throw ProtocolError(Error::Malformed, "request for another UAV");
    require_fresh(req.ts, now, config_.window_ms);
    require_signature(env_, req.ue, req.body(), req.sig);
    auto it = cache_.find(req.file_name);
    if (it == cache_.end()) throw ProtocolError(Error::UnknownFile, req.file_name);
    Key k{req.ue, req.file_name, req.ts};
    if (sessions_.contains(k)) throw ProtocolError(Error::Malformed, "session exists");

    auto b = Scalar::random_nonzero(rng);
    auto kc = dh_exp(DhElement::decode(req.ga), b);
    Bytes served = behavior_ == UavBehavior::Substitute ? rng.bytes(it->second.content.size()) : it->second.content;

    Data d;
    d.uav = key_.id;
    d.ue = req.ue;
    d.m_prime = sym_encrypt(content_key(kc), served, content_aad(key_.id, req.ue, req.ts), rng);
    d.ts = req.ts;
    d.sigma_sp = it->second.sigma_sp;
    d.sig = sign(*env_.params, key_, d.body(), rng);
    Session s;
    s.ue = req.ue;
    s.file_name = req.file_name;
    s.ts = req.ts;
    s.b = std::move(b);
    s.m_prime_digest = hash_h3(d.m_prime);
    sessions_.emplace(k, std::move(s));
    return d;
}

KeyRel UavNode::release_key(const Hint& hint, TimeMs now, Drbg& rng) {
    auto it = sessions_.find({hint.ue, hint.file_name, hint.ts});
    if (it == sessions_.end() || hint.uav != key_.id) throw ProtocolError(Error::NoSession, hint.ue);
    auto& s = it->second;
    require_fresh(hint.ti, now, config_.window_ms);
    if (s.stage != Stage::AwaitHint) throw ProtocolError(Error::Malformed, "key already released");
    require_signature(env_, hint.ue, hint.body(), hint.sig);
    if (hint.x1 != xor_digest(hash_h3(to_bytes(hint.file_name)), s.m_prime_digest))
        throw ProtocolError(Error::HintMismatch, hint.ue);

    KeyRel kr;
    kr.uav = key_.id;
    kr.ue = hint.ue;
    kr.gb = dh_exp(DhElement::generator(), s.b).encode();
    kr.file_name = hint.file_name;
    kr.sig = sign(*env_.params, key_, kr.body(), rng);
    s.hint_frame = hint.encode();
    s.stage = Stage::AwaitAck;
    ++keys_released_;
    return kr;
}

void UavNode::receive(sim::Context& ctx, const PartyId&, ByteView payload) {
    try {
        auto type = static_cast<MsgType>(frame_tag(payload));
        if (type == MsgType::Req) require_fresh(Req::decode(payload).ts, ctx.now(), config_.window_ms);
        if (type == MsgType::Hint) require_fresh(Hint::decode(payload).ti, ctx.now(), config_.window_ms);
        if (type == MsgType::Ack) require_fresh(Ack::decode(payload).ti, ctx.now(), config_.window_ms);
        if (!replay_.first_time(payload, ctx.now(), config_.window_ms))
            return ctx.note("duplicate", msg_type_name(frame_tag(payload)));
        switch (static_cast<MsgType>(frame_tag(payload))) {
        case MsgType::Req: {
            auto req = Req::decode(payload);
            auto d = respond(req, ctx.now(), ctx.rng());
            ctx.accepted(req.ue, payload);
            ctx.send(req.ue, d.encode());
            break;
        }
        case MsgType::Hint: {
            auto h = Hint::decode(payload);
            auto kr = release_key(h, ctx.now(), ctx.rng());
            ctx.accepted(h.ue, payload);
            ctx.send(h.ue, kr.encode());
            timer_keys_.emplace_back(h.ue, h.file_name, h.ts);
            ctx.set_timer(config_.window_ms, timer_keys_.size());
            break;
        }
        case MsgType::Ack: {
            // Forwarded for settlement; the AUSF checks it.
            auto ack = Ack::decode(payload);
            for (auto& [k, s] : sessions_) {
                if (s.ue == ack.ue && s.file_name == ack.file_name && s.stage == Stage::AwaitAck) {
                    s.stage = Stage::Acked;
                    return ctx.send(config_.ausf, copy(payload));
                }
            }
            throw ProtocolError(Error::NoSession, ack.ue);
        }
        default:
            throw ProtocolError(Error::Malformed, "unexpected message");
        }
    } catch (const ProtocolError& e) {
        ctx.note("reject", reject_detail(payload, e));
    }
}

void UavNode::timer(sim::Context& ctx, std::uint64_t id) {
    if (id == 0 || id > timer_keys_.size()) return;
    auto it = sessions_.find(timer_keys_[id - 1]);
    if (it == sessions_.end() || it->second.stage != Stage::AwaitAck) return;
    it->second.stage = Stage::Claimed;
    ctx.note("claim", "hint " + it->second.ue + " " + it->second.file_name);
    ctx.send(config_.ausf, it->second.hint_frame);
}

}  // namespace uavshare::sedds
