#include "uavshare/netsim.hpp"

#include <sstream>

#include "uavshare/crypto.hpp"
#include "uavshare/errors.hpp"
#include "uavshare/wire.hpp"

namespace uavshare {

namespace {
constexpr std::pair<MsgType, std::string_view> kTypeNames[] = {
    {MsgType::SetupInit, "SetupInit"}, {MsgType::SetupResp, "SetupResp"}, {MsgType::M1, "M1"},
    {MsgType::M2, "M2"},               {MsgType::M3, "M3"},               {MsgType::M4, "M4"},
    {MsgType::Req, "Req"},             {MsgType::Data, "Data"},           {MsgType::Hint, "Hint"},
    {MsgType::KeyRel, "KeyRel"},       {MsgType::Ack, "Ack"},
    {MsgType::Dispute, "Dispute"},
};
}  // namespace

std::string_view msg_type_name(std::uint8_t tag) {
    for (auto [t, name] : kTypeNames)
        if (static_cast<std::uint8_t>(t) == tag) return name;
    return "Unknown";
}

std::optional<MsgType> msg_type_from_name(std::string_view name) {
    for (auto [t, n] : kTypeNames)
        if (n == name) return t;
    return std::nullopt;
}

}  // namespace uavshare

namespace uavshare::sim {

namespace {
std::string short_digest(ByteView payload) {
    auto d = sha256(payload);
    return to_hex(ByteView(d.data(), 8));
}
}  // namespace

TimeMs Context::now() const { return sim_.now_; }

Drbg& Context::rng() { return sim_.rng_; }

void Context::send(const PartyId& to, Bytes payload) { sim_.dispatch_send(self_, to, std::move(payload)); }

void Context::set_timer(TimeMs delay, std::uint64_t timer_id) {
    Simulator::Event ev{sim_.now_ + delay, 0, Simulator::EventKind::Timer, self_, self_, {}, timer_id};
    sim_.schedule(std::move(ev));
}

void Context::note(std::string_view kind, std::string_view detail) {
    sim_.record(sim_.now_, std::string(kind), self_ + " " + std::string(detail));
}

void Context::accepted(const PartyId& signer, ByteView signed_frame) {
    auto d = sha256(signed_frame);
    auto it = sim_.emitted_.find(signer);
    std::string line = self_ + " <- " + signer + " " + std::string(msg_type_name(frame_tag(signed_frame))) + " " +
                       to_hex(ByteView(d.data(), 8));
    if (it == sim_.emitted_.end() || !it->second.contains(d)) {
        sim_.forgeries_.push_back(Forgery{self_, signer, to_hex(d)});
        sim_.record(sim_.now_, "forgery-accepted", line);
    } else {
        sim_.record(sim_.now_, "accept", line);
    }
}

Simulator::Simulator(std::uint64_t seed, AdversaryScript script, SimConfig config)
    : script_(std::move(script)),
      rule_hits_(script_.rules.size(), 0),
      config_(config),
      rng_(seed, "uavshare/sim"),
      adversary_rng_(seed, "uavshare/adversary") {}

void Simulator::add_party(const PartyId& id, Node& node) {
    if (!nodes_.emplace(id, &node).second) throw std::invalid_argument("duplicate party id " + id);
}

Node* Simulator::node(const PartyId& id) {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : it->second;
}

void Simulator::schedule(Event ev) {
    ev.seq = seq_++;
    if (ev.kind == EventKind::Deliver && ev.message_id != 0) ++counts_.pending;
    queue_.push(std::move(ev));
}

void Simulator::record(TimeMs at, std::string kind, std::string line) {
    events_.push_back(TranscriptEvent{at, events_.size(), std::move(kind), std::move(line)});
}

std::string Simulator::describe(const PartyId& from, const PartyId& to, ByteView payload) const {
    std::ostringstream s;
    s << from << " -> " << to << ' ' << msg_type_name(frame_tag(payload)) << ' ' << payload.size() << "B "
      << short_digest(payload);
    return s.str();
}

void Simulator::dispatch_send(const PartyId& from, const PartyId& to, Bytes payload) {
    ++counts_.sent;
    const auto id = next_message_id_++;
    emitted_[from].insert(sha256(payload));
    first_frames_.try_emplace(frame_tag(payload), payload);
    first_by_sender_.try_emplace({from, frame_tag(payload)}, payload);
    if (config_.metering) costs_.party(from).add_sent(payload.size());
    record(now_, "send", describe(from, to, payload));

    TimeMs extra = 0;
    PartyId claimed_from = from;
    bool tampered = false;
    const auto tag = frame_tag(payload);
    for (std::size_t i = 0; i < script_.rules.size(); ++i) {
        const auto& rule = script_.rules[i];
        const auto& m = rule.match;
        if (m.from && *m.from != from) continue;
        if (m.to && *m.to != to) continue;
        if (m.type && *m.type != tag) continue;
        ++rule_hits_[i];
        if (m.nth && *m.nth != rule_hits_[i]) continue;

        const auto& a = rule.action;
        switch (a.kind) {
        case ActionKind::Pass:
            break;
        case ActionKind::Drop:
            ++counts_.dropped;
            record(now_, "drop", describe(from, to, payload));
            return;
        case ActionKind::Delay:
            extra += a.ms;
            record(now_, "delay", describe(from, to, payload) + " +" + std::to_string(a.ms) + "ms");
            break;
        case ActionKind::Tamper: {
            if (payload.empty()) break;
            std::size_t off = a.offset ? *a.offset % payload.size() : adversary_rng_.uniform(payload.size());
            payload[off] ^= a.xor_mask ? a.xor_mask : 0x01;
            tampered = true;
            record(now_, "tamper", describe(from, to, payload) + " @" + std::to_string(off));
            break;
        }
        case ActionKind::Replay: {
            ++counts_.replayed;
            Event copy{now_ + config_.link_latency_ms + extra + a.ms, 0, EventKind::Deliver, to, claimed_from,
                       payload};
            record(now_, "replay", describe(claimed_from, to, payload) + " at t=" + std::to_string(copy.at));
            schedule(std::move(copy));
            break;
        }
        case ActionKind::Inject: {
            ++counts_.injected;
            const auto& target = a.target ? *a.target : to;
            Event inj{now_ + config_.link_latency_ms, 0, EventKind::Deliver, target, claimed_from, a.raw};
            record(now_, "inject", describe(claimed_from, target, a.raw));
            schedule(std::move(inj));
            break;
        }
        case ActionKind::Impersonate:
            claimed_from = a.as;
            record(now_, "impersonate", describe(from, to, payload) + " as " + a.as);
            break;
        }
    }
    if (tampered) ++counts_.tampered;
    Event ev{now_ + config_.link_latency_ms + extra, 0, EventKind::Deliver, to, claimed_from, std::move(payload)};
    ev.message_id = id;
    schedule(std::move(ev));
}

void Simulator::started() {
    if (started_) return;
    started_ = true;
    for (const auto& [id, n] : nodes_) schedule(Event{now_, 0, EventKind::Start, id, id, {}});
}

void Simulator::step(Event ev) {
    if (++steps_ > config_.step_limit) throw ProtocolError(Error::StepLimitExceeded);
    now_ = ev.at;
    if (ev.kind == EventKind::Deliver && ev.message_id != 0) {
        --counts_.pending;
        ++counts_.delivered;
    }
    Node* target = node(ev.to);
    if (!target) {
        record(now_, "undeliverable", describe(ev.from, ev.to, ev.payload));
        return;
    }
    Context ctx(*this, ev.to);
    LedgerScope scope(config_.metering ? &costs_.party(ev.to) : nullptr);
    try {
        switch (ev.kind) {
        case EventKind::Start:
            target->start(ctx);
            break;
        case EventKind::Deliver:
            record(now_, ev.message_id ? "deliver" : "deliver-copy", describe(ev.from, ev.to, ev.payload));
            target->receive(ctx, ev.from, ev.payload);
            break;
        case EventKind::Timer:
            record(now_, "timer", ev.to + " #" + std::to_string(ev.timer_id));
            target->timer(ctx, ev.timer_id);
            break;
        }
    } catch (const ProtocolError& e) {
        ctx.note("error", e.what());
    }
}

void Simulator::run() {
    started();
    while (!queue_.empty()) {
        Event ev = queue_.top();
        queue_.pop();
        step(std::move(ev));
    }
}

void Simulator::advance_clock(TimeMs ms) {
    if (ms == 0) return;
    started();
    const TimeMs target = now_ + ms;
    while (!queue_.empty() && queue_.top().at <= target) {
        Event ev = queue_.top();
        queue_.pop();
        step(std::move(ev));
    }
    now_ = target;
}

std::string Simulator::transcript() const {
    std::ostringstream out;
    for (const auto& e : events_) out << "t=" << e.at << " #" << e.seq << ' ' << e.kind << ' ' << e.line << '\n';
    return out.str();
}

Conservation Simulator::conservation() const { return counts_; }

std::vector<std::string> Simulator::notes(std::string_view kind) const {
    std::vector<std::string> out;
    for (const auto& e : events_)
        if (e.kind == kind) out.push_back(e.line);
    return out;
}

std::size_t Simulator::count_notes(std::string_view kind, std::string_view detail_substr) const {
    std::size_t n = 0;
    for (const auto& e : events_)
        if (e.kind == kind && e.line.find(detail_substr) != std::string::npos) ++n;
    return n;
}

}  // namespace uavshare::sim
