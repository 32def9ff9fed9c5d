#pragma once

// Cooperative group download among swarm UAVs: a coordinator head (CH) agrees
// a data key K_d with the service provider (SP) over signed Diffie-Hellman,
// splits the file among the group, members fetch their segments encrypted
// under K_d, broadcast them, and the CH finally releases K_d to every member
// that cooperated through a multireceiver ciphertext.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "uavshare/mre.hpp"
#include "uavshare/roles.hpp"
#include "uavshare/wire.hpp"

namespace uavshare::segds {

struct ByteRange {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;

    std::uint64_t end() const { return offset + length; }
    auto operator<=>(const ByteRange&) const = default;
};

struct Segment {
    PartyId assignee;
    ByteRange range;

    bool operator==(const Segment&) const = default;
};

struct SegmentPlan {
    std::string file_name;
    std::vector<Segment> segments;  // sorted by offset

    Bytes encode() const;
    static SegmentPlan decode(ByteView bytes);
    Digest digest() const;
    // Ranges are disjoint, sorted and tile [0, file_size).
    bool tiles(std::uint64_t file_size) const;
};

// Equal split; the remainder goes to the last part.
std::vector<std::uint64_t> split_equal(std::uint64_t total, std::size_t parts);
// Proportional split with largest-remainder rounding; ties go to the lower index.
std::vector<std::uint64_t> split_weighted(std::uint64_t total, std::span<const std::uint64_t> weights);

// Splits `span` among `assignees` in order. Empty weights means equal split.
// Throws NoEligibleMembers when `assignees` is empty.
std::vector<Segment> plan_segments(ByteRange span, std::span<const PartyId> assignees,
                                   std::span<const std::uint64_t> weights = {});

struct Timing {
    TimeMs window_ms = 30'000;
    TimeMs deadline_ms = 10'000;
};

// ---- messages ---------------------------------------------------------------

struct SetupMsg {
    MsgType type = MsgType::SetupInit;
    PartyId sender;
    PartyId peer;
    std::string file_name;
    TimeMs ts = 0;
    Bytes share;  // 128-byte DH element
    Bytes echo;   // SetupResp: H3 of the initiator's share; empty for SetupInit
    Signature sig;

    Bytes body() const;
    Bytes encode() const;
    static SetupMsg decode(ByteView frame);
};

struct M1 {
    PartyId ch;
    PartyId member;
    std::string file_name;
    ByteRange range;
    TimeMs ts = 0;
    Digest plan_digest{};
    Signature sig;

    Bytes body() const;
    Bytes encode() const;
    static M1 decode(ByteView frame);
};

struct M2 {
    PartyId sp;
    PartyId member;
    std::string file_name;
    ByteRange range;
    Bytes ciphertext;  // C_i = Enc(K_d, M_i)
    TimeMs ts = 0;
    Signature sig;     // over H3(C_i) and the header fields

    Bytes signed_bytes() const;
    Bytes encode() const;
    static M2 decode(ByteView frame);
};

struct M3 {
    Bytes m2_frame;
    TimeMs td = 0;
    Signature sig;

    Bytes body() const;
    Bytes encode() const;
    static M3 decode(ByteView frame);
};

struct M4 {
    PartyId ch;
    MreCiphertext key_box;
    TimeMs tf = 0;
    SegmentPlan plan;
    Signature sig;

    Bytes body() const;
    Bytes encode() const;
    static M4 decode(ByteView frame);
};

// Frame size minus the plaintext file bytes it carries.
std::uint64_t overhead_bytes(ByteView frame);

// ---- roles -------------------------------------------------------------------

struct GroupConfig {
    PartyId ch;
    PartyId sp;
    std::vector<PartyId> members;  // excluding the CH
    std::string file_name;
    std::uint64_t file_size = 0;
    std::vector<std::uint64_t> weights;  // per assignee, CH first; empty = equal
    Timing timing;
    std::size_t max_rounds = 0;          // 0 = number of members
};

class ServiceProvider : public sim::Node {
public:
    ServiceProvider(FullKeyPair key, Env env, Timing timing = {});

    void publish(std::string file_name, Bytes content);

    SetupMsg respond_setup(const SetupMsg& init, TimeMs now, Drbg& rng);
    M2 serve(const M1& m1, TimeMs now, Drbg& rng);
    const SymKey* session_key(const PartyId& ch, const std::string& file_name) const;
    const PartyId& id() const { return key_.id; }

    void receive(sim::Context& ctx, const PartyId& from, ByteView payload) override;

private:
    FullKeyPair key_;
    Env env_;
    Timing timing_;
    std::map<std::string, Bytes> files_;
    std::map<std::pair<PartyId, std::string>, SymKey> sessions_;
    ReplayGuard replay_;
};

class CoordinatorHead : public sim::Node {
public:
    CoordinatorHead(FullKeyPair key, Env env, GroupConfig config);

    // Session setup.
    SetupMsg begin_setup(TimeMs now, Drbg& rng);
    void complete_setup(const SetupMsg& resp, TimeMs now);

    // Plans every outstanding byte range over the currently eligible assignees
    // (the CH and every non-blacklisted member) and signs one M1 per segment.
    std::vector<M1> assign_tasks(TimeMs now, Drbg& rng);

    // The CH's own download; returns the M3 to broadcast.
    M3 share_own_segment(const M2& m2, TimeMs now, Drbg& rng);
    // Verifies a member's broadcast. Returns true when it completed an assignment.
    bool accept_m3(const M3& m3, TimeMs now);
    // Blacklists every assignee of the given round still missing its segment.
    std::vector<PartyId> expire_round(std::uint32_t round);
    bool all_segments_done() const;
    // Releases K_d to every non-blacklisted member.
    M4 consolidate(TimeMs now, Drbg& rng);

    const std::optional<SymKey>& data_key() const { return kd_; }
    const std::set<std::string, std::less<>>& blacklist() const { return blacklist_; }
    std::uint32_t round() const { return round_; }
    bool consolidated() const { return consolidated_; }
    SegmentPlan completed_plan() const;
    const PartyId& id() const { return key_.id; }

    void start(sim::Context& ctx) override;
    void receive(sim::Context& ctx, const PartyId& from, ByteView payload) override;
    void timer(sim::Context& ctx, std::uint64_t round) override;

private:
    struct Assignment {
        Segment segment;
        std::uint32_t round;
        bool done = false;
        bool abandoned = false;
    };

    std::vector<PartyId> eligible() const;
    Assignment* find_pending(const PartyId& member, const ByteRange& range);
    void dispatch(sim::Context& ctx, const std::vector<M1>& m1s);
    void broadcast(sim::Context& ctx, const Bytes& frame);
    void maybe_consolidate(sim::Context& ctx);

    FullKeyPair key_;
    Env env_;
    GroupConfig config_;
    std::optional<Scalar> dh_secret_;
    Bytes dh_share_;
    std::optional<SymKey> kd_;
    std::vector<Assignment> assignments_;
    std::vector<ByteRange> outstanding_;
    std::set<std::string, std::less<>> blacklist_;
    std::uint32_t round_ = 0;
    bool consolidated_ = false;
    bool aborted_ = false;
    ReplayGuard replay_;
};

enum class MemberBehavior { Honest, FreeRide, TamperResign };

class GroupMember : public sim::Node {
public:
    GroupMember(FullKeyPair key, Env env, GroupConfig config, MemberBehavior behavior = MemberBehavior::Honest);

    // Checks the CH's signature and freshness; throws on failure.
    void check_assignment(const M1& m1, TimeMs now) const;
    // Verifies σ_sp on the downloaded segment, stores it and signs the broadcast.
    M3 share_segment(const M2& m2, TimeMs now, Drbg& rng);
    // Verifies both σ_sp and σ_i of a peer's broadcast and stores C_i.
    void accept_m3(const M3& m3, TimeMs now);
    // Recovers K_d and reassembles the file. Throws NoBoxForId, DecryptFailure, MissingSegment.
    Bytes finalize(const M4& m4, TimeMs now);

    const std::optional<Bytes>& output() const { return output_; }
    std::uint64_t plaintext_bytes() const { return output_ ? output_->size() : 0; }
    bool holds_data_key() const { return kd_.has_value(); }
    std::size_t stored_segments() const { return segments_.size(); }
    const PartyId& id() const { return key_.id; }

    void receive(sim::Context& ctx, const PartyId& from, ByteView payload) override;

private:
    void store(const M2& m2);

    FullKeyPair key_;
    Env env_;
    GroupConfig config_;
    MemberBehavior behavior_;
    std::map<std::pair<PartyId, ByteRange>, Bytes> segments_;
    std::set<std::pair<PartyId, ByteRange>> requested_;
    std::optional<SymKey> kd_;
    std::optional<Bytes> output_;
    ReplayGuard replay_;
};

// Runs the signed DH exchange directly between the two roles; returns K_d.
SymKey session_setup(CoordinatorHead& ch, ServiceProvider& sp, TimeMs now, Drbg& rng);
// The member checks the CH's M1, forwards it, and the SP answers with M2.
M2 member_fetch(const GroupMember& member, const M1& m1, ServiceProvider& sp, TimeMs now, Drbg& rng);

// Additional authenticated data binding C_i to its file and byte range.
Bytes segment_aad(const std::string& file_name, const ByteRange& range);

}  // namespace uavshare::segds
