#include "uavshare/segds.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "uavshare/errors.hpp"

namespace uavshare::segds {

namespace {

__extension__ typedef unsigned __int128 u128;

Bytes range_bytes(const ByteRange& r) {
    Bytes out;
    put_u64(out, r.offset);
    put_u64(out, r.length);
    return out;
}

ByteRange read_range(FrameReader& rd) {
    auto v = rd.field();
    if (v.size() != 16) throw ProtocolError(Error::Malformed, "range");
    return {get_u64(v, 0), get_u64(v, 8)};
}

Bytes with_sig(FrameWriter w, const Signature& sig) {
    w.field(sig.encode());
    return std::move(w).bytes();
}

void expect_tag(const FrameReader& rd, MsgType t) {
    if (rd.tag() != static_cast<std::uint8_t>(t)) throw ProtocolError(Error::Malformed, "unexpected tag");
}

SymKey key_from_shared(const DhElement& shared) {
    auto d = hash_h3(shared.encode());
    SymKey k{};
    std::copy(d.begin(), d.end(), k.begin());
    return k;
}

std::string range_text(const ByteRange& r) {
    return "[" + std::to_string(r.offset) + "," + std::to_string(r.end()) + ")";
}

void broadcast_to(sim::Context& ctx, const std::vector<PartyId>& roster, const PartyId& ch, const Bytes& frame) {
    if (ctx.self() != ch) ctx.send(ch, frame);
    for (const auto& m : roster)
        if (m != ctx.self()) ctx.send(m, frame);
}

// Timestamp a frame is judged fresh by.
TimeMs frame_stamp(ByteView frame) {
    switch (static_cast<MsgType>(frame_tag(frame))) {
    case MsgType::SetupInit:
    case MsgType::SetupResp: return SetupMsg::decode(frame).ts;
    case MsgType::M1: return M1::decode(frame).ts;
    case MsgType::M2: return M2::decode(frame).ts;
    case MsgType::M3: return M3::decode(frame).td;
    case MsgType::M4: return M4::decode(frame).tf;
    default: throw ProtocolError(Error::Malformed, "unexpected message");
    }
}

// Decode, freshness, then duplicate suppression. False for a duplicate.
bool admit(sim::Context& ctx, ReplayGuard& guard, ByteView frame, TimeMs window) {
    require_fresh(frame_stamp(frame), ctx.now(), window);
    if (guard.first_time(frame, ctx.now(), window)) return true;
    ctx.note("duplicate", msg_type_name(frame_tag(frame)));
    return false;
}

}  // namespace

// ---- plans -------------------------------------------------------------------

Bytes SegmentPlan::encode() const {
    Bytes out;
    put_u16(out, static_cast<std::uint16_t>(file_name.size()));
    append(out, to_bytes(file_name));
    put_u16(out, static_cast<std::uint16_t>(segments.size()));
    for (const auto& s : segments) {
        put_u16(out, static_cast<std::uint16_t>(s.assignee.size()));
        append(out, to_bytes(s.assignee));
        put_u64(out, s.range.offset);
        put_u64(out, s.range.length);
    }
    return out;
}

SegmentPlan SegmentPlan::decode(ByteView in) {
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
        if (in.size() - pos < n) throw ProtocolError(Error::Malformed, "plan");
    };
    auto text = [&] {
        need(2);
        std::size_t n = get_u16(in, pos);
        pos += 2;
        need(n);
        std::string s = to_string(in.subspan(pos, n));
        pos += n;
        return s;
    };
    SegmentPlan p;
    p.file_name = text();
    need(2);
    std::size_t count = get_u16(in, pos);
    pos += 2;
    for (std::size_t i = 0; i < count; ++i) {
        Segment s;
        s.assignee = text();
        need(16);
        s.range = {get_u64(in, pos), get_u64(in, pos + 8)};
        pos += 16;
        p.segments.push_back(std::move(s));
    }
    if (pos != in.size()) throw ProtocolError(Error::Malformed, "plan trailing bytes");
    return p;
}

Digest SegmentPlan::digest() const { return hash_h3(encode()); }

bool SegmentPlan::tiles(std::uint64_t file_size) const {
    std::uint64_t at = 0;
    for (const auto& s : segments) {
        if (s.range.offset != at || s.range.length == 0) return false;
        at = s.range.end();
    }
    return at == file_size && file_size > 0;
}

std::vector<std::uint64_t> split_equal(std::uint64_t total, std::size_t parts) {
    if (parts == 0) throw ProtocolError(Error::NoEligibleMembers);
    std::vector<std::uint64_t> out(parts, total / parts);
    out.back() += total % parts;
    return out;
}

std::vector<std::uint64_t> split_weighted(std::uint64_t total, std::span<const std::uint64_t> weights) {
    if (weights.empty()) throw ProtocolError(Error::NoEligibleMembers);
    u128 sum = 0;
    for (auto w : weights) sum += w;
    if (sum == 0) throw std::invalid_argument("weights sum to zero");

    std::vector<std::uint64_t> out(weights.size());
    std::vector<u128> rem(weights.size());
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        u128 num = static_cast<u128>(total) * weights[i];
        out[i] = static_cast<std::uint64_t>(num / sum);
        rem[i] = num % sum;
        assigned += out[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++out[order[k]];
    return out;
}

std::vector<Segment> plan_segments(ByteRange span, std::span<const PartyId> assignees,
                                   std::span<const std::uint64_t> weights) {
    if (assignees.empty()) throw ProtocolError(Error::NoEligibleMembers);
    if (!weights.empty() && weights.size() != assignees.size())
        throw std::invalid_argument("weight count does not match assignees");
    auto lengths = weights.empty() ? split_equal(span.length, assignees.size()) : split_weighted(span.length, weights);
    std::vector<Segment> out;
    std::uint64_t at = span.offset;
    for (std::size_t i = 0; i < assignees.size(); ++i) {
        if (lengths[i] == 0) continue;
        out.push_back({assignees[i], {at, lengths[i]}});
        at += lengths[i];
    }
    return out;
}

Bytes segment_aad(const std::string& file_name, const ByteRange& range) {
    Bytes out = to_bytes(file_name);
    append(out, range_bytes(range));
    return out;
}

// ---- messages ----------------------------------------------------------------

Bytes SetupMsg::body() const {
    return FrameWriter(static_cast<std::uint8_t>(type))
        .field(sender).field(peer).field(file_name).u64(ts).field(share).field(echo).bytes();
}

Bytes SetupMsg::encode() const {
    FrameWriter w(static_cast<std::uint8_t>(type));
    w.field(sender).field(peer).field(file_name).u64(ts).field(share).field(echo);
    return with_sig(std::move(w), sig);
}

SetupMsg SetupMsg::decode(ByteView frame) {
    FrameReader rd(frame);
    if (rd.tag() != static_cast<std::uint8_t>(MsgType::SetupInit) &&
        rd.tag() != static_cast<std::uint8_t>(MsgType::SetupResp))
        throw ProtocolError(Error::Malformed, "unexpected tag");
    SetupMsg m;
    m.type = static_cast<MsgType>(rd.tag());
    m.sender = rd.text();
    m.peer = rd.text();
    m.file_name = rd.text();
    m.ts = rd.u64();
    auto share = rd.field();
    m.share.assign(share.begin(), share.end());
    auto echo = rd.field();
    m.echo.assign(echo.begin(), echo.end());
    m.sig = Signature::decode(rd.field());
    rd.finish();
    if (m.share.size() != kDhSize) throw ProtocolError(Error::Malformed, "dh share");
    return m;
}

Bytes M1::body() const {
    return FrameWriter(static_cast<std::uint8_t>(MsgType::M1))
        .field(ch).field(member).field(file_name).field(range_bytes(range)).u64(ts).field(plan_digest).bytes();
}

Bytes M1::encode() const {
    FrameWriter w(static_cast<std::uint8_t>(MsgType::M1));
    w.field(ch).field(member).field(file_name).field(range_bytes(range)).u64(ts).field(plan_digest);
    return with_sig(std::move(w), sig);
}

M1 M1::decode(ByteView frame) {
    FrameReader rd(frame);
    expect_tag(rd, MsgType::M1);
    M1 m;
    m.ch = rd.text();
    m.member = rd.text();
    m.file_name = rd.text();
    m.range = read_range(rd);
    m.ts = rd.u64();
    m.plan_digest = rd.fixed<32>();
    m.sig = Signature::decode(rd.field());
    rd.finish();
    return m;
}

Bytes M2::signed_bytes() const {
    return FrameWriter(static_cast<std::uint8_t>(MsgType::M2))
        .field(sp).field(member).field(file_name).field(range_bytes(range)).field(hash_h3(ciphertext)).u64(ts)
        .bytes();
}

Bytes M2::encode() const {
    FrameWriter w(static_cast<std::uint8_t>(MsgType::M2));
    w.field(sp).field(member).field(file_name).field(range_bytes(range)).field(ciphertext).u64(ts);
    return with_sig(std::move(w), sig);
}

M2 M2::decode(ByteView frame) {
    FrameReader rd(frame);
    expect_tag(rd, MsgType::M2);
    M2 m;
    m.sp = rd.text();
    m.member = rd.text();
    m.file_name = rd.text();
    m.range = read_range(rd);
    auto ct = rd.field();
    m.ciphertext.assign(ct.begin(), ct.end());
    m.ts = rd.u64();
    m.sig = Signature::decode(rd.field());
    rd.finish();
    return m;
}

Bytes M3::body() const {
    return FrameWriter(static_cast<std::uint8_t>(MsgType::M3)).field(m2_frame).u64(td).bytes();
}

Bytes M3::encode() const {
    FrameWriter w(static_cast<std::uint8_t>(MsgType::M3));
    w.field(m2_frame).u64(td);
    return with_sig(std::move(w), sig);
}

M3 M3::decode(ByteView frame) {
    FrameReader rd(frame);
    expect_tag(rd, MsgType::M3);
    M3 m;
    auto inner = rd.field();
    m.m2_frame.assign(inner.begin(), inner.end());
    m.td = rd.u64();
    m.sig = Signature::decode(rd.field());
    rd.finish();
    return m;
}

Bytes M4::body() const {
    return FrameWriter(static_cast<std::uint8_t>(MsgType::M4))
        .field(ch).field(key_box.encode()).u64(tf).field(plan.encode()).bytes();
}

Bytes M4::encode() const {
    FrameWriter w(static_cast<std::uint8_t>(MsgType::M4));
    w.field(ch).field(key_box.encode()).u64(tf).field(plan.encode());
    return with_sig(std::move(w), sig);
}

M4 M4::decode(ByteView frame) {
    FrameReader rd(frame);
    expect_tag(rd, MsgType::M4);
    M4 m;
    m.ch = rd.text();
    m.key_box = MreCiphertext::decode(rd.field());
    m.tf = rd.u64();
    m.plan = SegmentPlan::decode(rd.field());
    m.sig = Signature::decode(rd.field());
    rd.finish();
    return m;
}

std::uint64_t overhead_bytes(ByteView frame) {
    auto content = [](const M2& m2) -> std::uint64_t {
        return m2.ciphertext.size() >= kSymOverhead ? m2.ciphertext.size() - kSymOverhead : 0;
    };
    switch (static_cast<MsgType>(frame_tag(frame))) {
    case MsgType::M2:
        return frame.size() - content(M2::decode(frame));
    case MsgType::M3:
        return frame.size() - content(M2::decode(M3::decode(frame).m2_frame));
    default:
        return frame.size();
    }
}

// ---- service provider --------------------------------------------------------

ServiceProvider::ServiceProvider(FullKeyPair key, Env env, Timing timing)
    : key_(std::move(key)), env_(env), timing_(timing) {}

void ServiceProvider::publish(std::string file_name, Bytes content) { files_[std::move(file_name)] = std::move(content); }

SetupMsg ServiceProvider::respond_setup(const SetupMsg& init, TimeMs now, Drbg& rng) {
    if (init.type != MsgType::SetupInit || init.peer != key_.id) throw ProtocolError(Error::Malformed, "setup init");
    require_fresh(init.ts, now, timing_.window_ms);
    require_signature(env_, init.sender, init.body(), init.sig);
    if (!files_.contains(init.file_name)) throw ProtocolError(Error::UnknownFile, init.file_name);

    auto peer_share = DhElement::decode(init.share);
    auto b = Scalar::random_nonzero(rng);
    SetupMsg resp;
    resp.type = MsgType::SetupResp;
    resp.sender = key_.id;
    resp.peer = init.sender;
    resp.file_name = init.file_name;
    resp.ts = now;
    resp.share = dh_exp(DhElement::generator(), b).encode();
    auto echo = hash_h3(init.share);
    resp.echo.assign(echo.begin(), echo.end());
    sessions_[{init.sender, init.file_name}] = key_from_shared(dh_exp(peer_share, b));
    resp.sig = sign(*env_.params, key_, resp.body(), rng);
    return resp;
}

M2 ServiceProvider::serve(const M1& m1, TimeMs now, Drbg& rng) {
    require_fresh(m1.ts, now, timing_.window_ms);
    require_signature(env_, m1.ch, m1.body(), m1.sig);
    signer_entry(env_, m1.member);
    auto session = sessions_.find({m1.ch, m1.file_name});
    if (session == sessions_.end()) throw ProtocolError(Error::NoSession, m1.ch + "/" + m1.file_name);
    const auto& content = files_.at(m1.file_name);
    if (m1.range.length == 0 || m1.range.end() > content.size() || m1.range.end() < m1.range.offset)
        throw ProtocolError(Error::Malformed, "range outside file");

    M2 m2;
    m2.sp = key_.id;
    m2.member = m1.member;
    m2.file_name = m1.file_name;
    m2.range = m1.range;
    ByteView slice(content.data() + m1.range.offset, m1.range.length);
    m2.ciphertext = sym_encrypt(session->second, slice, segment_aad(m1.file_name, m1.range), rng);
    m2.ts = now;
    m2.sig = sign(*env_.params, key_, m2.signed_bytes(), rng);
    return m2;
}

const SymKey* ServiceProvider::session_key(const PartyId& ch, const std::string& file_name) const {
    auto it = sessions_.find({ch, file_name});
    return it == sessions_.end() ? nullptr : &it->second;
}

void ServiceProvider::receive(sim::Context& ctx, const PartyId&, ByteView payload) {
    try {
        auto tag = static_cast<MsgType>(frame_tag(payload));
        if (tag == MsgType::SetupInit) {
            auto init = SetupMsg::decode(payload);
            if (!admit(ctx, replay_, payload, timing_.window_ms)) return;
            auto resp = respond_setup(init, ctx.now(), ctx.rng());
            ctx.accepted(init.sender, payload);
            ctx.send(init.sender, resp.encode());
        } else if (tag == MsgType::M1) {
            auto m1 = M1::decode(payload);
            if (!admit(ctx, replay_, payload, timing_.window_ms)) return;
            auto m2 = serve(m1, ctx.now(), ctx.rng());
            ctx.accepted(m1.ch, payload);
            ctx.send(m1.member, m2.encode());
        } else {
            throw ProtocolError(Error::Malformed, "unexpected message");
        }
    } catch (const ProtocolError& e) {
        ctx.note("reject", reject_detail(payload, e));
    }
}

// ---- coordinator head --------------------------------------------------------

CoordinatorHead::CoordinatorHead(FullKeyPair key, Env env, GroupConfig config)
    : key_(std::move(key)), env_(env), config_(std::move(config)) {
    if (config_.max_rounds == 0) config_.max_rounds = config_.members.size() + 1;
}

SetupMsg CoordinatorHead::begin_setup(TimeMs now, Drbg& rng) {
    dh_secret_ = Scalar::random_nonzero(rng);
    dh_share_ = dh_exp(DhElement::generator(), *dh_secret_).encode();
    SetupMsg init;
    init.type = MsgType::SetupInit;
    init.sender = key_.id;
    init.peer = config_.sp;
    init.file_name = config_.file_name;
    init.ts = now;
    init.share = dh_share_;
    init.sig = sign(*env_.params, key_, init.body(), rng);
    return init;
}

void CoordinatorHead::complete_setup(const SetupMsg& resp, TimeMs now) {
    if (!dh_secret_) throw ProtocolError(Error::NoSession, "setup not started");
    if (resp.type != MsgType::SetupResp || resp.sender != config_.sp || resp.peer != key_.id ||
        resp.file_name != config_.file_name)
        throw ProtocolError(Error::Malformed, "setup response");
    require_fresh(resp.ts, now, config_.timing.window_ms);
    auto echo = hash_h3(dh_share_);
    if (!std::equal(echo.begin(), echo.end(), resp.echo.begin(), resp.echo.end()))
        throw ProtocolError(Error::AuthFailure, "setup echo");
    require_signature(env_, resp.sender, resp.body(), resp.sig);
    kd_ = key_from_shared(dh_exp(DhElement::decode(resp.share), *dh_secret_));
    dh_secret_.reset();
}

std::vector<PartyId> CoordinatorHead::eligible() const {
    std::vector<PartyId> out{key_.id};
    for (const auto& m : config_.members)
        if (!blacklist_.contains(m) && env_.registry->is_active(m)) out.push_back(m);
    return out;
}

std::vector<M1> CoordinatorHead::assign_tasks(TimeMs now, Drbg& rng) {
    if (!kd_) throw ProtocolError(Error::NoSession, "no data key");
    if (round_ == 0 && assignments_.empty() && outstanding_.empty()) outstanding_.push_back({0, config_.file_size});
    if (outstanding_.empty()) return {};
    if (round_ >= config_.max_rounds) throw ProtocolError(Error::NoEligibleMembers, "round limit");

    auto who = eligible();
    std::span<const std::uint64_t> weights;
    if (round_ == 0 && config_.weights.size() == config_.members.size() + 1 && who.size() == config_.weights.size())
        weights = config_.weights;
    ++round_;

    SegmentPlan plan{config_.file_name, {}};
    for (const auto& range : outstanding_)
        for (auto& s : plan_segments(range, who, weights)) plan.segments.push_back(std::move(s));
    outstanding_.clear();
    auto digest = plan.digest();

    std::vector<M1> out;
    for (const auto& s : plan.segments) {
        assignments_.push_back({s, round_});
        M1 m1;
        m1.ch = key_.id;
        m1.member = s.assignee;
        m1.file_name = config_.file_name;
        m1.range = s.range;
        m1.ts = now;
        m1.plan_digest = digest;
        m1.sig = sign(*env_.params, key_, m1.body(), rng);
        out.push_back(std::move(m1));
    }
    return out;
}

CoordinatorHead::Assignment* CoordinatorHead::find_pending(const PartyId& member, const ByteRange& range) {
    for (auto& a : assignments_)
        if (!a.done && !a.abandoned && a.segment.assignee == member && a.segment.range == range) return &a;
    return nullptr;
}

M3 CoordinatorHead::share_own_segment(const M2& m2, TimeMs now, Drbg& rng) {
    if (m2.member != key_.id || m2.sp != config_.sp || m2.file_name != config_.file_name)
        throw ProtocolError(Error::Malformed, "segment header");
    auto* a = find_pending(key_.id, m2.range);
    if (!a) throw ProtocolError(Error::Malformed, "segment not assigned");
    require_fresh(m2.ts, now, config_.timing.window_ms);
    require_signature(env_, m2.sp, m2.signed_bytes(), m2.sig, Error::SpSignatureInvalid);
    a->done = true;
    M3 m3;
    m3.m2_frame = m2.encode();
    m3.td = now;
    m3.sig = sign(*env_.params, key_, m3.body(), rng);
    return m3;
}

bool CoordinatorHead::accept_m3(const M3& m3, TimeMs now) {
    auto m2 = M2::decode(m3.m2_frame);
    if (m2.sp != config_.sp || m2.file_name != config_.file_name) throw ProtocolError(Error::Malformed, "M3 header");
    auto* a = find_pending(m2.member, m2.range);
    if (!a) return false;
    require_fresh(m3.td, now, config_.timing.window_ms);
    require_fresh(m2.ts, now, config_.timing.window_ms);
    require_signature(env_, m2.member, m3.body(), m3.sig);
    if (!signature_ok(env_, m2.sp, m2.signed_bytes(), m2.sig)) {
        // The member vouched for a segment the SP never signed.
        blacklist_.insert(m2.member);
        a->abandoned = true;
        outstanding_.push_back(a->segment.range);
        throw ProtocolError(Error::SpSignatureInvalid, m2.member);
    }
    a->done = true;
    return true;
}

std::vector<PartyId> CoordinatorHead::expire_round(std::uint32_t round) {
    std::vector<PartyId> out;
    if (round != round_ || consolidated_) return out;
    for (auto& a : assignments_) {
        if (a.round != round || a.done || a.abandoned) continue;
        a.abandoned = true;
        outstanding_.push_back(a.segment.range);
        if (a.segment.assignee != key_.id && blacklist_.insert(a.segment.assignee).second)
            out.push_back(a.segment.assignee);
    }
    std::sort(outstanding_.begin(), outstanding_.end());
    return out;
}

bool CoordinatorHead::all_segments_done() const {
    if (assignments_.empty() || !outstanding_.empty()) return false;
    return std::all_of(assignments_.begin(), assignments_.end(), [](const auto& a) { return a.done || a.abandoned; });
}

SegmentPlan CoordinatorHead::completed_plan() const {
    SegmentPlan p{config_.file_name, {}};
    for (const auto& a : assignments_)
        if (a.done) p.segments.push_back(a.segment);
    std::sort(p.segments.begin(), p.segments.end(),
              [](const Segment& x, const Segment& y) { return x.range < y.range; });
    return p;
}

M4 CoordinatorHead::consolidate(TimeMs now, Drbg& rng) {
    if (!kd_) throw ProtocolError(Error::NoSession, "no data key");
    std::vector<Recipient> recipients;
    for (const auto& m : config_.members)
        if (auto r = env_.registry->recipient(m)) recipients.push_back(std::move(*r));
    M4 m4;
    m4.ch = key_.id;
    m4.key_box = mre_encrypt(*env_.params, recipients, blacklist_, *kd_, rng);
    m4.tf = now;
    m4.plan = completed_plan();
    m4.sig = sign(*env_.params, key_, m4.body(), rng);
    consolidated_ = true;
    return m4;
}

void CoordinatorHead::dispatch(sim::Context& ctx, const std::vector<M1>& m1s) {
    for (const auto& m1 : m1s) ctx.send(m1.member == key_.id ? config_.sp : m1.member, m1.encode());
    if (!m1s.empty()) ctx.set_timer(config_.timing.deadline_ms, round_);
}

void CoordinatorHead::broadcast(sim::Context& ctx, const Bytes& frame) {
    broadcast_to(ctx, config_.members, key_.id, frame);
}

void CoordinatorHead::maybe_consolidate(sim::Context& ctx) {
    if (consolidated_ || !all_segments_done()) return;
    auto m4 = consolidate(ctx.now(), ctx.rng());
    ctx.note("consolidate", "boxes=" + std::to_string(m4.key_box.boxes.size()) +
                                " segments=" + std::to_string(m4.plan.segments.size()));
    broadcast(ctx, m4.encode());
}

void CoordinatorHead::start(sim::Context& ctx) { ctx.send(config_.sp, begin_setup(ctx.now(), ctx.rng()).encode()); }

void CoordinatorHead::receive(sim::Context& ctx, const PartyId&, ByteView payload) {
    try {
        if (aborted_) return;
        if (!admit(ctx, replay_, payload, config_.timing.window_ms)) return;
        switch (static_cast<MsgType>(frame_tag(payload))) {
        case MsgType::SetupResp: {
            auto resp = SetupMsg::decode(payload);
            if (kd_) return ctx.note("duplicate", "SetupResp");
            complete_setup(resp, ctx.now());
            ctx.accepted(resp.sender, payload);
            dispatch(ctx, assign_tasks(ctx.now(), ctx.rng()));
            break;
        }
        case MsgType::M2: {
            auto m2 = M2::decode(payload);
            auto m3 = share_own_segment(m2, ctx.now(), ctx.rng());
            ctx.accepted(m2.sp, payload);
            broadcast(ctx, m3.encode());
            maybe_consolidate(ctx);
            break;
        }
        case MsgType::M3: {
            auto m3 = M3::decode(payload);
            try {
                if (accept_m3(m3, ctx.now())) {
                    auto m2 = M2::decode(m3.m2_frame);
                    ctx.accepted(m2.member, payload);
                    ctx.accepted(m2.sp, m3.m2_frame);
                }
            } catch (const ProtocolError& e) {
                if (e.code() == Error::SpSignatureInvalid)
                    ctx.note("blacklist", M2::decode(m3.m2_frame).member + " reason=sp-signature");
                throw;
            }
            maybe_consolidate(ctx);
            break;
        }
        default:
            throw ProtocolError(Error::Malformed, "unexpected message");
        }
    } catch (const ProtocolError& e) {
        ctx.note("reject", reject_detail(payload, e));
    }
}

void CoordinatorHead::timer(sim::Context& ctx, std::uint64_t round) {
    if (consolidated_ || aborted_) return;
    auto gone = expire_round(static_cast<std::uint32_t>(round));
    for (const auto& m : gone) ctx.note("blacklist", m + " reason=deadline");
    if (outstanding_.empty()) return maybe_consolidate(ctx);
    try {
        auto m1s = assign_tasks(ctx.now(), ctx.rng());
        ctx.note("reassign", "round=" + std::to_string(round_) + " segments=" + std::to_string(m1s.size()));
        dispatch(ctx, m1s);
    } catch (const ProtocolError& e) {
        aborted_ = true;
        ctx.note("abort", error_name(e.code()));
    }
}

// ---- group member ------------------------------------------------------------

GroupMember::GroupMember(FullKeyPair key, Env env, GroupConfig config, MemberBehavior behavior)
    : key_(std::move(key)), env_(env), config_(std::move(config)), behavior_(behavior) {}

void GroupMember::check_assignment(const M1& m1, TimeMs now) const {
    if (m1.member != key_.id || m1.ch != config_.ch || m1.file_name != config_.file_name)
        throw ProtocolError(Error::Malformed, "assignment header");
    require_fresh(m1.ts, now, config_.timing.window_ms);
    require_signature(env_, m1.ch, m1.body(), m1.sig);
}

void GroupMember::store(const M2& m2) { segments_[{m2.member, m2.range}] = m2.ciphertext; }

M3 GroupMember::share_segment(const M2& m2, TimeMs now, Drbg& rng) {
    if (m2.member != key_.id || m2.sp != config_.sp || m2.file_name != config_.file_name)
        throw ProtocolError(Error::Malformed, "segment header");
    require_fresh(m2.ts, now, config_.timing.window_ms);
    require_signature(env_, m2.sp, m2.signed_bytes(), m2.sig, Error::SpSignatureInvalid);
    store(m2);
    M3 m3;
    m3.m2_frame = m2.encode();
    m3.td = now;
    m3.sig = sign(*env_.params, key_, m3.body(), rng);
    return m3;
}

void GroupMember::accept_m3(const M3& m3, TimeMs now) {
    auto m2 = M2::decode(m3.m2_frame);
    if (m2.sp != config_.sp || m2.file_name != config_.file_name || m2.member == key_.id)
        throw ProtocolError(Error::Malformed, "M3 header");
    require_fresh(m3.td, now, config_.timing.window_ms);
    require_fresh(m2.ts, now, config_.timing.window_ms);
    require_signature(env_, m2.member, m3.body(), m3.sig);
    require_signature(env_, m2.sp, m2.signed_bytes(), m2.sig, Error::SpSignatureInvalid);
    store(m2);
}

Bytes GroupMember::finalize(const M4& m4, TimeMs now) {
    if (m4.ch != config_.ch || m4.plan.file_name != config_.file_name)
        throw ProtocolError(Error::Malformed, "final message header");
    require_fresh(m4.tf, now, config_.timing.window_ms);
    require_signature(env_, m4.ch, m4.body(), m4.sig);
    if (!m4.plan.tiles(config_.file_size)) throw ProtocolError(Error::MissingSegment, "plan does not cover file");
    auto kd = mre_decrypt(*env_.params, key_, m4.key_box);
    kd_ = kd;

    Bytes out;
    out.reserve(config_.file_size);
    for (const auto& s : m4.plan.segments) {
        auto it = segments_.find({s.assignee, s.range});
        if (it == segments_.end()) throw ProtocolError(Error::MissingSegment, s.assignee + " " + range_text(s.range));
        auto pt = sym_decrypt(kd, it->second, segment_aad(config_.file_name, s.range));
        if (!pt || pt->size() != s.range.length) throw ProtocolError(Error::DecryptFailure, range_text(s.range));
        append(out, *pt);
    }
    output_ = std::move(out);
    return *output_;
}

void GroupMember::receive(sim::Context& ctx, const PartyId&, ByteView payload) {
    try {
        if (!admit(ctx, replay_, payload, config_.timing.window_ms)) return;
        switch (static_cast<MsgType>(frame_tag(payload))) {
        case MsgType::M1: {
            auto m1 = M1::decode(payload);
            check_assignment(m1, ctx.now());
            ctx.accepted(m1.ch, payload);
            requested_.insert({key_.id, m1.range});
            ctx.send(config_.sp, Bytes(payload.begin(), payload.end()));
            break;
        }
        case MsgType::M2: {
            auto m2 = M2::decode(payload);
            if (!requested_.contains({m2.member, m2.range})) throw ProtocolError(Error::Malformed, "unrequested segment");
            auto m3 = share_segment(m2, ctx.now(), ctx.rng());
            ctx.accepted(m2.sp, payload);
            if (behavior_ == MemberBehavior::FreeRide) return ctx.note("withhold", range_text(m2.range));
            if (behavior_ == MemberBehavior::TamperResign) {
                m2.ciphertext[m2.ciphertext.size() / 2] ^= 0x01;
                m3.m2_frame = m2.encode();
                m3.sig = sign(*env_.params, key_, m3.body(), ctx.rng());
            }
            broadcast_to(ctx, config_.members, config_.ch, m3.encode());
            break;
        }
        case MsgType::M3: {
            auto m3 = M3::decode(payload);
            accept_m3(m3, ctx.now());
            auto m2 = M2::decode(m3.m2_frame);
            ctx.accepted(m2.member, payload);
            ctx.accepted(m2.sp, m3.m2_frame);
            break;
        }
        case MsgType::M4: {
            auto m4 = M4::decode(payload);
            auto out = finalize(m4, ctx.now());
            ctx.accepted(m4.ch, payload);
            ctx.note("finalize", "bytes=" + std::to_string(out.size()));
            break;
        }
        default:
            throw ProtocolError(Error::Malformed, "unexpected message");
        }
    } catch (const ProtocolError& e) {
        ctx.note("reject", reject_detail(payload, e));
    }
}

// ---- direct drivers ----------------------------------------------------------

SymKey session_setup(CoordinatorHead& ch, ServiceProvider& sp, TimeMs now, Drbg& rng) {
    auto init = ch.begin_setup(now, rng);
    auto resp = sp.respond_setup(SetupMsg::decode(init.encode()), now, rng);
    ch.complete_setup(SetupMsg::decode(resp.encode()), now);
    return *ch.data_key();
}

M2 member_fetch(const GroupMember& member, const M1& m1, ServiceProvider& sp, TimeMs now, Drbg& rng) {
    member.check_assignment(m1, now);
    return sp.serve(m1, now, rng);
}

}  // namespace uavshare::segds
