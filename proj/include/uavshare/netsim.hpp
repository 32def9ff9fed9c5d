#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "uavshare/bytes.hpp"
#include "uavshare/metering.hpp"
#include "uavshare/rng.hpp"

namespace uavshare::sim {

using PartyId = std::string;
using TimeMs = std::uint64_t;

class Simulator;

// What a node can do while handling one event.
class Context {
public:
    TimeMs now() const;
    const PartyId& self() const { return self_; }
    Drbg& rng();

    void send(const PartyId& to, Bytes payload);
    void set_timer(TimeMs delay, std::uint64_t timer_id);
    // Free-form transcript annotation, e.g. ("reject", "M1 StaleTimestamp").
    void note(std::string_view kind, std::string_view detail);
    // Records that this node accepted `signed_frame` as authentic from `signer`.
    void accepted(const PartyId& signer, ByteView signed_frame);

private:
    friend class Simulator;
    Context(Simulator& sim, PartyId self) : sim_(sim), self_(std::move(self)) {}
    Simulator& sim_;
    PartyId self_;
};

class Node {
public:
    virtual ~Node() = default;
    virtual void start(Context&) {}
    virtual void receive(Context& ctx, const PartyId& from, ByteView payload) = 0;
    virtual void timer(Context&, std::uint64_t) {}
};

struct Match {
    std::optional<PartyId> from;
    std::optional<PartyId> to;
    std::optional<std::uint8_t> type;
    std::optional<std::uint32_t> nth;  // 1-based among messages matching the other fields
};

enum class ActionKind { Pass, Drop, Delay, Tamper, Replay, Inject, Impersonate };

struct Action {
    ActionKind kind = ActionKind::Pass;
    TimeMs ms = 0;                      // Delay, Replay
    std::optional<std::size_t> offset;  // Tamper; nullopt = random byte
    std::uint8_t xor_mask = 0x01;       // Tamper
    Bytes raw;                          // Inject
    std::optional<PartyId> target;      // Inject; defaults to the matched recipient
    PartyId as;                         // Impersonate
};

struct Rule {
    Match match;
    Action action;
};

struct AdversaryScript {
    std::vector<Rule> rules;
};

struct SimConfig {
    TimeMs link_latency_ms = 5;
    std::uint64_t step_limit = 1'000'000;
    bool metering = true;
};

struct TranscriptEvent {
    TimeMs at;
    std::uint64_t seq;
    std::string kind;
    std::string line;  // preformatted
};

struct Conservation {
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t tampered = 0;  // subset of delivered
    std::uint64_t pending = 0;
    std::uint64_t replayed = 0;
    std::uint64_t injected = 0;

    bool balanced() const { return sent == delivered + dropped + pending; }
};

struct Forgery {
    PartyId acceptor;
    PartyId claimed_signer;
    std::string digest_hex;
};

class Simulator {
public:
    explicit Simulator(std::uint64_t seed, AdversaryScript script = {}, SimConfig config = {});

    // Nodes are borrowed; the caller keeps them alive for the simulator's lifetime.
    void add_party(const PartyId& id, Node& node);

    // Runs start() on every party (in id order) then processes events until the
    // queue is empty. Throws ProtocolError(StepLimitExceeded).
    void run();
    // Processes every event due within the next `ms` and moves the clock there.
    void advance_clock(TimeMs ms);

    TimeMs now() const { return now_; }
    Drbg& rng() { return rng_; }
    const CostSheet& costs() const { return costs_; }
    CostSheet& costs() { return costs_; }

    const std::vector<TranscriptEvent>& events() const { return events_; }
    std::string transcript() const;  // one event per line
    Conservation conservation() const;
    const std::vector<Forgery>& forgeries() const { return forgeries_; }
    // Notes of the given kind, formatted "party detail".
    std::vector<std::string> notes(std::string_view kind) const;
    std::size_t count_notes(std::string_view kind, std::string_view detail_substr = {}) const;
    // First frame sent of each message type, for per-message size accounting.
    const std::map<std::uint8_t, Bytes>& first_frames() const { return first_frames_; }
    // First frame of each type sent by each party.
    const std::map<std::pair<PartyId, std::uint8_t>, Bytes>& first_frames_by_sender() const {
        return first_by_sender_;
    }

private:
    friend class Context;

    enum class EventKind { Start, Deliver, Timer };
    struct Event {
        TimeMs at;
        std::uint64_t seq;
        EventKind kind;
        PartyId to;
        PartyId from;
        Bytes payload;
        std::uint64_t timer_id = 0;
        std::uint64_t message_id = 0;  // 0 for adversary-originated copies
        bool operator>(const Event& o) const { return at != o.at ? at > o.at : seq > o.seq; }
    };

    void started();
    void step(Event ev);
    void dispatch_send(const PartyId& from, const PartyId& to, Bytes payload);
    void schedule(Event ev);
    void record(TimeMs at, std::string kind, std::string line);
    std::string describe(const PartyId& from, const PartyId& to, ByteView payload) const;
    Node* node(const PartyId& id);

    std::map<PartyId, Node*> nodes_;
    AdversaryScript script_;
    std::vector<std::uint32_t> rule_hits_;
    SimConfig config_;
    Drbg rng_;
    Drbg adversary_rng_;
    CostSheet costs_;
    TimeMs now_ = 0;
    std::uint64_t seq_ = 0;
    std::uint64_t next_message_id_ = 1;
    std::uint64_t steps_ = 0;
    bool started_ = false;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::vector<TranscriptEvent> events_;
    std::map<PartyId, std::set<Digest>> emitted_;
    std::vector<Forgery> forgeries_;
    std::map<std::uint8_t, Bytes> first_frames_;
    std::map<std::pair<PartyId, std::uint8_t>, Bytes> first_by_sender_;
    Conservation counts_;
};

}  // namespace uavshare::sim
