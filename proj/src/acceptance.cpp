#include "uavshare/acceptance.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "uavshare/errors.hpp"
#include "uavshare/mre.hpp"
#include "uavshare/scenario.hpp"
#include "uavshare/signcrypt.hpp"

namespace uavshare::acceptance {

namespace {

using Clock = std::chrono::steady_clock;
using report::Protocol;
using scenario::RunResult;
using scenario::Scenario;

// Pinned measured costs of the honest runs.
constexpr std::uint64_t kSegdsCoordinatorScalarMults = 51;  // N = 5
constexpr std::uint64_t kSeddsScalarMults = 20;
constexpr std::uint64_t kSeddsModexps = 4;
constexpr std::uint64_t kSeddsSymCalls = 2;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string secs(double s) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(2) << s << " s";
    return o.str();
}

struct Detail {
    std::ostringstream text;
    bool pass = true;

    void check(bool ok, const std::string& what) {
        pass &= ok;
        if (text.tellp() > 0) text << "; ";
        text << what << (ok ? "" : " [FAIL]");
    }
};

bool all_members_exact(const RunResult& r, const std::set<std::string>& skip = {}) {
    for (const auto& [id, p] : r.parties)
        if (!skip.contains(id) && !p.exact) return false;
    return true;
}

// ---- 1 -----------------------------------------------------------------------

Detail registration_identity() {
    Detail d;
    auto t0 = Clock::now();
    Drbg rng(1001, "accept/registration");
    auto kgc = KeyGenerationCenter::setup(128, rng);
    const auto& q = kgc.params().master_public;
    int ok = 0;
    constexpr int kTrials = 1000;
    for (int i = 0; i < kTrials; ++i) {
        auto id = "entity-" + std::to_string(i);
        auto x = Scalar::random_nonzero(rng);
        auto x_pub = base_mult(x);
        auto partial = kgc.register_entity(id, x_pub, rng);
        auto lhs = base_mult(x + partial.z);
        auto rhs = x_pub + partial.y_pub + scalar_mult(hash_h0(to_bytes(id), partial.y_pub, x_pub, q), q);
        ok += lhs == rhs;
    }
    double t = since(t0);
    d.check(ok == kTrials, std::to_string(ok) + "/" + std::to_string(kTrials) + " satisfy the identity");
    d.check(t < 5.0, secs(t) + " < 5 s");
    return d;
}

// ---- 2 -----------------------------------------------------------------------

void flip_bit(Bytes& b, Drbg& rng) {
    auto bit = rng.uniform(b.size() * 8);
    b[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
}

template <class F>
bool rejects(F&& f) {
    try {
        return !f();
    } catch (const ProtocolError&) {
        return true;
    }
}

Detail crypto_roundtrips() {
    Detail d;
    Drbg rng(1002, "accept/roundtrips");
    auto kgc = KeyGenerationCenter::setup(128, rng);
    const auto& params = kgc.params();
    std::vector<FullKeyPair> keys;
    for (int i = 0; i < 6; ++i) keys.push_back(enroll(kgc, "party" + std::to_string(i), rng));
    constexpr int kTrials = 100;

    int sig_ok = 0, sig_rej = 0;
    for (int i = 0; i < kTrials; ++i) {
        const auto& k = keys[i % keys.size()];
        auto msg = rng.bytes(1 + rng.uniform(200));
        auto sig = sign(params, k, msg, rng);
        sig_ok += verify(params, k.id, k.pub, msg, sig);
        // Tamper the message or the signature bytes.
        auto blob = msg;
        auto enc = sig.encode();
        append(blob, enc);
        flip_bit(blob, rng);
        Bytes m2(blob.begin(), blob.begin() + static_cast<std::ptrdiff_t>(msg.size()));
        Bytes s2(blob.begin() + static_cast<std::ptrdiff_t>(msg.size()), blob.end());
        sig_rej += rejects([&] { return verify(params, k.id, k.pub, m2, Signature::decode(s2)); });
    }

    int sc_ok = 0, sc_rej = 0;
    for (int i = 0; i < kTrials; ++i) {
        const auto& a = keys[i % keys.size()];
        const auto& b = keys[(i + 1) % keys.size()];
        auto to = make_recipient(params, b.id, b.pub);
        auto msg = rng.bytes(1 + rng.uniform(500));
        auto payload = signcrypt(params, a, to, msg, rng).encode();
        sc_ok += unsigncrypt(params, b, a.id, a.pub, SigncryptedPayload::decode(payload)) == msg;
        flip_bit(payload, rng);
        sc_rej += rejects([&] {
            unsigncrypt(params, b, a.id, a.pub, SigncryptedPayload::decode(payload));
            return true;
        });
    }

    int mre_ok = 0, mre_rej = 0;
    for (int i = 0; i < kTrials; ++i) {
        std::vector<Recipient> to;
        for (std::size_t j = 0; j < 3; ++j) {
            const auto& k = keys[(i + j) % keys.size()];
            to.push_back(make_recipient(params, k.id, k.pub));
        }
        SymKey payload{};
        rng.fill(payload);
        auto ct = mre_encrypt(params, to, {}, payload, rng);
        const auto& me = keys[(i + 1) % keys.size()];
        mre_ok += mre_decrypt(params, me, MreCiphertext::decode(ct.encode())) == payload;
        // Flip a bit in the bytes this recipient consumes: U or its own box.
        auto tampered = ct;
        auto* box = const_cast<MreBox*>(tampered.box_for(me.id));
        if (rng.uniform(2) == 0) {
            auto u = tampered.ephemeral.encode();
            Bytes ub(u.begin(), u.end());
            flip_bit(ub, rng);
            mre_rej += rejects([&] {
                tampered.ephemeral = GroupElement::decode(ub);
                return mre_decrypt(params, me, tampered) == payload;
            });
        } else {
            flip_bit(box->wrapped, rng);
            mre_rej += rejects([&] { return mre_decrypt(params, me, tampered) == payload; });
        }
    }

    auto line = [](const char* name, int ok, int rej) {
        return std::string(name) + " " + std::to_string(ok) + "/100 roundtrips, " + std::to_string(rej) +
               "/100 tampered rejected";
    };
    d.check(sig_ok == kTrials && sig_rej == kTrials, line("sign", sig_ok, sig_rej));
    d.check(sc_ok == kTrials && sc_rej == kTrials, line("signcrypt", sc_ok, sc_rej));
    d.check(mre_ok == kTrials && mre_rej == kTrials, line("mre", mre_ok, mre_rej));
    return d;
}

// ---- 3, 4 --------------------------------------------------------------------

Detail segds_end_to_end() {
    Detail d;
    auto t0 = Clock::now();
    auto r = scenario::run(scenario::honest(Protocol::Segds, 5, 64 * 1024, 3));
    double t = since(t0);
    const auto& m = r.costs.measured;
    d.check(all_members_exact(r) && r.parties.size() == 5, "5/5 members reconstruct 64 KiB exactly");
    d.check(m.modexps == 2, "modexps " + std::to_string(m.modexps) + " == 2");
    d.check(report::within_factor(static_cast<double>(m.scalar_mults), 39),
            "CH scalar_mults " + std::to_string(m.scalar_mults) + " within 2x of 39");
    d.check(m.scalar_mults == kSegdsCoordinatorScalarMults,
            "golden " + std::to_string(kSegdsCoordinatorScalarMults));
    d.check(report::within_tolerance(static_cast<double>(r.costs.footprint), report::kSegdsReferenceBytes),
            "bytes " + std::to_string(r.costs.footprint) + " within 25% of 1500");
    d.check(t < 2.0, secs(t) + " < 2 s");
    return d;
}

Detail segds_linearity() {
    Detail d;
    std::vector<std::uint64_t> counts;
    for (std::size_t n = 2; n <= 10; ++n)
        counts.push_back(scenario::run(scenario::honest(Protocol::Segds, n, 4096, 4)).costs.measured.scalar_mults);
    auto c1 = static_cast<std::int64_t>(counts[1]) - static_cast<std::int64_t>(counts[0]);
    auto c0 = static_cast<std::int64_t>(counts[0]) - 2 * c1;
    std::int64_t worst = 0;
    std::ostringstream series;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        auto n = static_cast<std::int64_t>(i + 2);
        worst = std::max(worst, std::abs(static_cast<std::int64_t>(counts[i]) - (c1 * n + c0)));
        series << (i ? "," : "") << counts[i];
    }
    d.check(worst == 0, "count(N) = " + std::to_string(c1) + "N + " + std::to_string(c0) +
                            " for N=2..10 [" + series.str() + "], max residual " + std::to_string(worst));
    return d;
}

// ---- 5, 6 --------------------------------------------------------------------

Detail free_riding() {
    Detail d;
    auto s = scenario::honest(Protocol::Segds, 5, 64 * 1024, 5);
    s.member_behavior["uav3"] = segds::MemberBehavior::FreeRide;
    auto r = scenario::run(s);
    const auto& fr = r.parties.at("uav3");
    d.check(r.ch_blacklist.contains("uav3"), "uav3 blacklisted");
    d.check(r.count("reject", "uav3 M4 NoBoxForId") == 1, "uav3 has no box in M4");
    d.check(fr.plaintext_bytes == 0 && !fr.holds_key, "uav3 plaintext 0 bytes");
    d.check(r.count("reassign") >= 1, "segment reassigned");
    d.check(all_members_exact(r, {"uav3"}), "4/4 honest members reconstruct");
    return d;
}

// Offset and length of C_i inside an M3 frame.
std::pair<std::size_t, std::size_t> ciphertext_span(ByteView m3) {
    FrameReader outer(m3);
    auto m2 = outer.field();
    auto m2_start = outer.offset() - m2.size();
    FrameReader inner(m2);
    for (int i = 0; i < 4; ++i) inner.field();
    auto ct = inner.field();
    return {m2_start + inner.offset() - ct.size(), ct.size()};
}

std::size_t count_before(const RunResult& r, std::string_view kind, std::string_view substr, TimeMs limit) {
    std::size_t n = 0;
    for (const auto& e : r.events)
        if (e.at < limit && e.kind == kind && e.line.find(substr) != std::string::npos) ++n;
    return n;
}

Detail tamper_detection() {
    Detail d;
    constexpr std::size_t kMembers = 5;
    auto base = scenario::honest(Protocol::Segds, kMembers, 8192, 6);
    auto reference = scenario::run(base);
    std::vector<std::string> senders{"ch"};
    for (std::size_t i = 1; i <= kMembers; ++i) senders.push_back("uav" + std::to_string(i));

    Drbg rng(1006, "accept/tamper");
    const std::size_t receivers = kMembers;  // everyone but the sender
    const std::size_t honest_accepts = (kMembers + 1) * receivers - receivers;
    int scenarios = 0, caught = 0, false_accepts = 0, false_rejects = 0;
    for (int i = 0; i < 100; ++i) {
        const auto& who = senders[rng.uniform(senders.size())];
        auto frame = reference.sender_frames.at({who, static_cast<std::uint8_t>(MsgType::M3)});
        auto [off, len] = ciphertext_span(frame);
        auto s = base;
        sim::Rule rule;
        rule.match.from = who;
        rule.match.type = static_cast<std::uint8_t>(MsgType::M3);
        rule.action.kind = sim::ActionKind::Tamper;
        rule.action.offset = off + rng.uniform(len);
        rule.action.xor_mask = static_cast<std::uint8_t>(1 + rng.uniform(255));
        s.script.rules = {rule};
        auto r = scenario::run(s);
        ++scenarios;
        auto rejected = count_before(r, "reject", " M3 ", s.deadline_ms);
        auto accepted = count_before(r, "accept", " M3 ", s.deadline_ms);
        caught += rejected == receivers;
        false_accepts += static_cast<int>(r.forgeries);
        false_rejects += rejected > receivers || accepted < honest_accepts;
    }
    d.check(caught == scenarios, std::to_string(caught) + "/" + std::to_string(scenarios) +
                                     " scenarios rejected by every receiver");
    d.check(false_accepts == 0, std::to_string(false_accepts) + " false accepts");
    d.check(false_rejects == 0, std::to_string(false_rejects) + " false rejects");
    return d;
}

// ---- 7, 8 --------------------------------------------------------------------

Detail sedds_end_to_end() {
    Detail d;
    auto t0 = Clock::now();
    auto first = scenario::run(scenario::honest(Protocol::Sedds, 1, 16 * 1024, 100));
    double t = since(t0);
    bool same = true;
    for (std::uint64_t seed = 101; seed < 110; ++seed)
        same &= scenario::run(scenario::honest(Protocol::Sedds, 1, 16 * 1024, seed)).costs.measured ==
                first.costs.measured;
    const auto& m = first.costs.measured;
    auto f = report::sedds_formula();
    d.check(first.parties.at("ue1").exact, "UE recovers 16 KiB exactly");
    d.check(same, "counts identical across 10 trials");
    d.check(report::within_factor(static_cast<double>(m.scalar_mults), static_cast<double>(f.tm)) &&
                report::within_factor(static_cast<double>(m.modexps), static_cast<double>(f.te)) &&
                report::within_factor(static_cast<double>(m.sym_cipher_calls), static_cast<double>(f.taes)),
            "UE+UAV " + std::to_string(m.scalar_mults) + " T_m, " + std::to_string(m.modexps) + " T_e, " +
                std::to_string(m.sym_cipher_calls) + " T_AES within 2x of " + f.text());
    d.check(m.scalar_mults == kSeddsScalarMults && m.modexps == kSeddsModexps && m.sym_cipher_calls == kSeddsSymCalls,
            "golden 20/4/2");
    d.check(report::within_tolerance(static_cast<double>(first.costs.footprint), report::kSeddsReferenceBytes),
            "bytes " + std::to_string(first.costs.footprint) + " within 25% of 526");
    d.check(t < 1.0, secs(t) + " < 1 s");
    return d;
}

std::string ledger_state(const RunResult& r) {
    auto pos = r.ledger_text.find("ue1,");
    if (pos == std::string::npos) return "none";
    auto start = r.ledger_text.find(',', pos + 4) + 1;
    return r.ledger_text.substr(start, r.ledger_text.find(',', start) - start);
}

bool has_verdict(const RunResult& r, sedds::Outcome o) {
    for (const auto& v : r.verdicts)
        if (v.outcome == o) return true;
    return false;
}

Detail fairness_matrix() {
    Detail d;
    auto corner = [](sedds::UavBehavior uav, sedds::UeBehavior ue, std::uint64_t seed) {
        auto s = scenario::honest(Protocol::Sedds, 1, 4096, seed);
        s.uav_behavior = uav;
        s.ue_behavior = ue;
        return scenario::run(s);
    };
    using sedds::Outcome;
    auto hh = corner(sedds::UavBehavior::Honest, sedds::UeBehavior::Honest, 80);
    d.check(hh.parties.at("ue1").exact && has_verdict(hh, Outcome::SuccessfulTransfer) &&
                ledger_state(hh) == "settled",
            "honest/honest: SuccessfulTransfer, " + ledger_state(hh));
    auto mh = corner(sedds::UavBehavior::Substitute, sedds::UeBehavior::Honest, 81);
    d.check(mh.parties.at("ue1").plaintext_bytes == 0 && has_verdict(mh, Outcome::FailedConnection) &&
                !has_verdict(mh, Outcome::SuccessfulTransfer) && ledger_state(mh) == "refunded",
            "malicious UAV: FailedConnection, " + ledger_state(mh));
    auto hf = corner(sedds::UavBehavior::Honest, sedds::UeBehavior::FreeRide, 82);
    auto hf_state = ledger_state(hf);
    d.check(hf.parties.at("ue1").plaintext_bytes == 0 && (hf_state == "none" || hf_state == "prepaid"),
            "free-riding UE: no plaintext, " + hf_state);
    auto mf = corner(sedds::UavBehavior::Substitute, sedds::UeBehavior::FreeRide, 83);
    auto mf_state = ledger_state(mf);
    d.check(mf.parties.at("ue1").plaintext_bytes == 0 && (mf_state == "none" || mf_state == "prepaid"),
            "malicious UAV + free-riding UE: no plaintext, " + mf_state);
    auto fc = corner(sedds::UavBehavior::Honest, sedds::UeBehavior::ForgeClaim, 84);
    d.check(has_verdict(fc, Outcome::InvalidClaim), "forged-claim UE: InvalidClaim");
    return d;
}

// ---- 9 -----------------------------------------------------------------------

Detail replay_resistance() {
    Detail d;
    struct Case {
        Protocol protocol;
        MsgType type;
    };
    const Case cases[] = {
        {Protocol::Segds, MsgType::SetupInit}, {Protocol::Segds, MsgType::SetupResp}, {Protocol::Segds, MsgType::M1},
        {Protocol::Segds, MsgType::M2},        {Protocol::Segds, MsgType::M3},        {Protocol::Segds, MsgType::M4},
        {Protocol::Sedds, MsgType::Req},       {Protocol::Sedds, MsgType::Data},      {Protocol::Sedds, MsgType::Hint},
        {Protocol::Sedds, MsgType::KeyRel},    {Protocol::Sedds, MsgType::Ack},
    };
    int stale_ok = 0, dup_ok = 0, n = 0;
    std::string failures;
    for (const auto& c : cases) {
        ++n;
        auto name = std::string(msg_type_name(static_cast<std::uint8_t>(c.type)));
        auto base = scenario::honest(c.protocol, 3, 4096, 90);
        auto with_replay = [&](TimeMs ms) {
            auto s = base;
            sim::Rule rule;
            rule.match.type = static_cast<std::uint8_t>(c.type);
            rule.match.nth = 1;
            rule.action.kind = sim::ActionKind::Replay;
            rule.action.ms = ms;
            s.script.rules = {rule};
            return scenario::run(s);
        };
        auto outcome_intact = [&](const RunResult& r) {
            if (!all_members_exact(r)) return false;
            if (c.protocol == Protocol::Segds) return r.count("consolidate") == 1;
            return r.verdicts.size() == 1 && ledger_state(r) == "settled";
        };

        auto stale = with_replay(base.window_ms + 1000);
        bool s_ok = (stale.count("reject", name + " StaleTimestamp") + stale.count("reject", name + " NoSession")) == 1 &&
                    outcome_intact(stale);
        auto dup = with_replay(5);
        bool d_ok = dup.count("duplicate", name) == 1 && dup.count("reject") == 0 && outcome_intact(dup);
        stale_ok += s_ok;
        dup_ok += d_ok;
        if (!s_ok) failures += " stale:" + name;
        if (!d_ok) failures += " dup:" + name;
    }
    d.check(stale_ok == n, std::to_string(stale_ok) + "/" + std::to_string(n) + " stale replays rejected");
    d.check(dup_ok == n, std::to_string(dup_ok) + "/" + std::to_string(n) + " in-window duplicates ignored once" +
                             (failures.empty() ? "" : " (" + failures.substr(1) + ")"));
    return d;
}

// ---- 10 ----------------------------------------------------------------------

struct DirectSession {
    std::unique_ptr<segds::CoordinatorHead> ch;
    std::vector<std::unique_ptr<segds::GroupMember>> members;
    segds::M4 m4;
};

DirectSession direct_session(const KeyGenerationCenter& kgc, const FullKeyPair& ch_key, segds::ServiceProvider& sp,
                             const std::vector<FullKeyPair>& member_keys, const Bytes& content, Drbg& rng) {
    Env env{&kgc.params(), &kgc.registry()};
    segds::GroupConfig cfg;
    cfg.ch = ch_key.id;
    cfg.sp = sp.id();
    cfg.file_name = "file.bin";
    cfg.file_size = content.size();
    for (const auto& k : member_keys) cfg.members.push_back(k.id);
    DirectSession s;
    s.ch = std::make_unique<segds::CoordinatorHead>(ch_key, env, cfg);
    for (const auto& k : member_keys) s.members.push_back(std::make_unique<segds::GroupMember>(k, env, cfg));
    segds::session_setup(*s.ch, sp, 0, rng);
    std::vector<segds::M3> shares;
    for (const auto& m1 : s.ch->assign_tasks(0, rng)) {
        if (m1.member == ch_key.id) {
            shares.push_back(s.ch->share_own_segment(sp.serve(m1, 0, rng), 0, rng));
            continue;
        }
        for (auto& m : s.members)
            if (m->id() == m1.member) shares.push_back(m->share_segment(segds::member_fetch(*m, m1, sp, 0, rng), 0, rng));
    }
    for (const auto& sh : shares) {
        auto owner = segds::M2::decode(sh.m2_frame).member;
        if (owner != ch_key.id) s.ch->accept_m3(sh, 0);
        for (auto& m : s.members)
            if (m->id() != owner) m->accept_m3(sh, 0);
    }
    s.m4 = s.ch->consolidate(0, rng);
    return s;
}

Detail collusion_isolation() {
    Detail d;
    Drbg rng(1010, "accept/collusion");
    auto kgc = KeyGenerationCenter::setup(128, rng);
    Env env{&kgc.params(), &kgc.registry()};
    auto sp_key = enroll(kgc, "sp", rng);
    segds::ServiceProvider sp(sp_key, env);
    Bytes content = rng.bytes(3000);
    sp.publish("file.bin", content);

    auto group = [&](const std::string& prefix) {
        std::vector<FullKeyPair> keys;
        for (int i = 1; i <= 5; ++i) keys.push_back(enroll(kgc, prefix + std::to_string(i), rng));
        return keys;
    };
    int attempts = 0, isolated = 0, own_ok = 0;
    // Members of another group go straight for the key box; members of the same
    // roster replay the old final message into their new session.
    auto disjoint = [&](const DirectSession& a, const std::vector<FullKeyPair>& outsiders) {
        for (const auto& k : outsiders) {
            ++attempts;
            try {
                mre_decrypt(kgc.params(), k, MreCiphertext::decode(a.m4.key_box.encode()));
            } catch (const ProtocolError& e) {
                isolated += e.code() == Error::NoBoxForId;
            }
        }
    };
    auto same_roster = [&](const DirectSession& a, DirectSession& b) {
        for (auto& m : b.members) {
            ++attempts;
            try {
                m->finalize(segds::M4::decode(a.m4.encode()), 0);
            } catch (const ProtocolError& e) {
                isolated += e.code() == Error::DecryptFailure;
            }
        }
    };
    for (int pair = 0; pair < 2; ++pair) {
        // Disjoint groups, same SP and file.
        auto ka = enroll(kgc, "cha" + std::to_string(pair), rng);
        auto kb = enroll(kgc, "chb" + std::to_string(pair), rng);
        auto ga = group("a" + std::to_string(pair) + "-");
        auto gb = group("b" + std::to_string(pair) + "-");
        auto sa = direct_session(kgc, ka, sp, ga, content, rng);
        auto sb = direct_session(kgc, kb, sp, gb, content, rng);
        disjoint(sa, gb);
        for (auto& m : sb.members) own_ok += m->finalize(sb.m4, 0) == content;
        // Same CH and roster, a second session.
        auto sa2 = direct_session(kgc, ka, sp, ga, content, rng);
        same_roster(sa, sa2);
        for (auto& m : sa2.members) own_ok += m->finalize(sa2.m4, 0) == content;
    }
    d.check(attempts == 20 && isolated == attempts,
            std::to_string(isolated) + "/" + std::to_string(attempts) + " cross-session attempts fail");
    d.check(own_ok == 20, std::to_string(own_ok) + "/20 own-session finalizations succeed");
    return d;
}

// ---- 11 ----------------------------------------------------------------------

Detail determinism() {
    Detail d;
    int files = 0, same = 0;
    std::vector<std::filesystem::path> paths;
    for (const auto& e : std::filesystem::directory_iterator(UAVSHARE_SCENARIO_DIR))
        if (e.path().extension() == ".scn" && e.path().stem() != "malformed") paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        auto s = scenario::load(p);
        ++files;
        same += scenario::run(s).render() == scenario::run(s).render();
    }
    d.check(files > 0 && same == files,
            std::to_string(same) + "/" + std::to_string(files) + " scenarios byte-identical on rerun");
    return d;
}

}  // namespace

std::vector<CriterionResult> run_all(std::ostream& out) {
    struct Entry {
        const char* id;
        const char* title;
        std::function<Detail()> fn;
    };
    const Entry entries[] = {
        {"1", "registration identity", registration_identity},
        {"2", "crypto roundtrips and tamper rejection", crypto_roundtrips},
        {"3", "SeGDS end-to-end N=5", segds_end_to_end},
        {"4", "SeGDS linearity", segds_linearity},
        {"5", "free-riding resistance", free_riding},
        {"6", "tamper detection", tamper_detection},
        {"7", "SeDDS end-to-end", sedds_end_to_end},
        {"8", "SeDDS fairness matrix", fairness_matrix},
        {"9", "replay resistance", replay_resistance},
        {"10", "collusion isolation", collusion_isolation},
        {"11", "simulator determinism", determinism},
    };
    std::vector<CriterionResult> results;
    auto suite0 = Clock::now();
    for (const auto& e : entries) {
        auto t0 = Clock::now();
        CriterionResult r{e.id, e.title, false, {}, 0};
        try {
            auto d = e.fn();
            r.pass = d.pass;
            r.detail = d.text.str();
        } catch (const std::exception& ex) {
            r.detail = std::string("exception: ") + ex.what();
        }
        r.seconds = since(t0);
        out << "criterion " << std::setw(2) << r.id << ' ' << (r.pass ? "PASS" : "FAIL") << "  " << r.title << ": "
            << r.detail << " (" << secs(r.seconds) << ")" << std::endl;
        results.push_back(std::move(r));
    }
    CriterionResult total{"total", "suite under 60 s", false, {}, 0};
    total.seconds = since(suite0);
    total.pass = total.seconds < 60.0;
    total.detail = secs(total.seconds);
    out << "criterion total " << (total.pass ? "PASS" : "FAIL") << "  " << total.title << ": " << total.detail
        << std::endl;
    results.push_back(std::move(total));
    return results;
}

bool all_pass(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

}  // namespace uavshare::acceptance
