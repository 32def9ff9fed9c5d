#include "uavshare/scenario.hpp"

#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>

#include "uavshare/errors.hpp"
#include "uavshare/wire.hpp"

namespace uavshare::scenario {

namespace {

const std::string kFileName = "file.bin";

struct Cursor {
    const std::string& source;
    std::size_t line;

    [[noreturn]] void fail(const std::string& why) const {
        throw ProtocolError(Error::ParseError, source + ":" + std::to_string(line) + ": " + why);
    }

    std::uint64_t number(std::string_view s) const {
        std::uint64_t v = 0;
        int base = 10;
        if (s.starts_with("0x")) {
            s.remove_prefix(2);
            base = 16;
        }
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
        if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) fail("bad number '" + std::string(s) + "'");
        return v;
    }
};

std::vector<std::string> words(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream in{std::string(line)};
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

sim::ActionKind action_kind(const Cursor& c, std::string_view w) {
    static const std::pair<std::string_view, sim::ActionKind> kinds[] = {
        {"pass", sim::ActionKind::Pass},         {"drop", sim::ActionKind::Drop},
        {"delay", sim::ActionKind::Delay},       {"tamper", sim::ActionKind::Tamper},
        {"replay", sim::ActionKind::Replay},     {"inject", sim::ActionKind::Inject},
        {"impersonate", sim::ActionKind::Impersonate},
    };
    for (auto [name, k] : kinds)
        if (name == w) return k;
    c.fail("unknown rule action '" + std::string(w) + "'");
}

sim::Rule parse_rule(const Cursor& c, const std::vector<std::string>& w) {
    if (w.size() < 2) c.fail("rule needs an action");
    sim::Rule r;
    r.action.kind = action_kind(c, w[1]);
    for (std::size_t i = 2; i < w.size(); ++i) {
        auto eq = w[i].find('=');
        if (eq == std::string::npos || eq == 0) c.fail("expected key=value, got '" + w[i] + "'");
        auto key = w[i].substr(0, eq);
        auto val = w[i].substr(eq + 1);
        if (key == "from") r.match.from = val;
        else if (key == "to") r.match.to = val;
        else if (key == "type") {
            auto t = msg_type_from_name(val);
            if (!t) c.fail("unknown message type '" + val + "'");
            r.match.type = static_cast<std::uint8_t>(*t);
        } else if (key == "nth") {
            auto n = c.number(val);
            if (n == 0) c.fail("nth is 1-based");
            r.match.nth = static_cast<std::uint32_t>(n);
        } else if (key == "ms") r.action.ms = c.number(val);
        else if (key == "offset") r.action.offset = c.number(val);
        else if (key == "mask") {
            auto m = c.number(val);
            if (m == 0 || m > 0xff) c.fail("mask must be a nonzero byte");
            r.action.xor_mask = static_cast<std::uint8_t>(m);
        } else if (key == "as") r.action.as = val;
        else if (key == "target") r.action.target = val;
        else if (key == "raw") {
            try {
                r.action.raw = from_hex(val);
            } catch (const std::exception&) {
                c.fail("bad hex in raw=");
            }
        } else c.fail("unknown rule key '" + key + "'");
    }
    if (r.action.kind == sim::ActionKind::Impersonate && r.action.as.empty()) c.fail("impersonate needs as=");
    if (r.action.kind == sim::ActionKind::Inject && r.action.raw.empty()) c.fail("inject needs raw=");
    return r;
}

// kind -> (min args, max args)
const std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>> kExpectArity = {
    {"finalized", {1, 1}},   {"excluded", {1, 1}},      {"blacklisted", {1, 1}}, {"not_blacklisted", {1, 1}},
    {"plaintext_bytes", {2, 2}}, {"verdict", {1, 1}},   {"ledger", {2, 3}},      {"rejected", {1, 2}},
    {"duplicate", {1, 1}},   {"note", {1, 8}},          {"no_note", {1, 8}},     {"no_forgeries", {0, 0}},
    {"balanced", {0, 0}},    {"consolidated", {0, 0}},  {"check", {1, 1}},
};

segds::MemberBehavior member_behavior(const Cursor& c, std::string_view w) {
    if (w == "honest") return segds::MemberBehavior::Honest;
    if (w == "freeride") return segds::MemberBehavior::FreeRide;
    if (w == "tamper") return segds::MemberBehavior::TamperResign;
    c.fail("unknown member behavior '" + std::string(w) + "'");
}

std::string join(const std::vector<std::string>& v, std::size_t from = 0) {
    std::string out;
    for (std::size_t i = from; i < v.size(); ++i) out += (i > from ? " " : "") + v[i];
    return out;
}

}  // namespace

std::string Expectation::text() const { return "expect " + kind + (args.empty() ? "" : " " + join(args)); }

Scenario parse(std::string_view text, const std::string& source) {
    Scenario s;
    s.name = source;
    bool have_protocol = false;
    bool have_size = false;
    std::istringstream in{std::string(text)};
    std::size_t lineno = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++lineno;
        Cursor c{source, lineno};
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
        auto w = words(raw);
        if (w.empty()) continue;
        const auto& key = w[0];
        auto need = [&](std::size_t n) {
            if (w.size() != n + 1) c.fail("'" + key + "' takes " + std::to_string(n) + " argument(s)");
        };
        if (key == "protocol") {
            need(1);
            if (w[1] == "segds") s.protocol = Protocol::Segds;
            else if (w[1] == "sedds") s.protocol = Protocol::Sedds;
            else c.fail("unknown protocol '" + w[1] + "'");
            have_protocol = true;
        } else if (key == "name") {
            if (w.size() < 2) c.fail("name needs a value");
            s.name = join(w, 1);
        } else if (key == "members") {
            need(1);
            s.members = c.number(w[1]);
            if (s.members == 0 || s.members > 64) c.fail("members must be in 1..64");
        } else if (key == "file_size" || key == "content_size") {
            need(1);
            s.file_size = c.number(w[1]);
            if (s.file_size == 0) c.fail("size must be positive");
            have_size = true;
        } else if (key == "seed") {
            need(1);
            s.seed = c.number(w[1]);
        } else if (key == "window_ms") {
            need(1);
            s.window_ms = c.number(w[1]);
        } else if (key == "deadline_ms") {
            need(1);
            s.deadline_ms = c.number(w[1]);
        } else if (key == "weights") {
            if (w.size() < 2) c.fail("weights needs values");
            s.weights.clear();
            for (std::size_t i = 1; i < w.size(); ++i) s.weights.push_back(c.number(w[i]));
        } else if (key == "prepay") {
            need(1);
            auto p = c.number(w[1]);
            if (p == 0 || p >= 100) c.fail("prepay must be in 1..99");
            s.prepay = static_cast<int>(p);
        } else if (key == "offense_threshold") {
            need(1);
            s.offense_threshold = static_cast<std::uint32_t>(c.number(w[1]));
        } else if (key == "metering") {
            need(1);
            if (w[1] != "on" && w[1] != "off") c.fail("metering is on or off");
            s.metering = w[1] == "on";
        } else if (key == "behavior") {
            need(2);
            s.member_behavior[w[1]] = member_behavior(c, w[2]);
        } else if (key == "ue_behavior") {
            need(1);
            if (w[1] == "honest") s.ue_behavior = sedds::UeBehavior::Honest;
            else if (w[1] == "freeride") s.ue_behavior = sedds::UeBehavior::FreeRide;
            else if (w[1] == "forgeclaim") s.ue_behavior = sedds::UeBehavior::ForgeClaim;
            else c.fail("unknown UE behavior '" + w[1] + "'");
        } else if (key == "uav_behavior") {
            need(1);
            if (w[1] == "honest") s.uav_behavior = sedds::UavBehavior::Honest;
            else if (w[1] == "substitute") s.uav_behavior = sedds::UavBehavior::Substitute;
            else c.fail("unknown UAV behavior '" + w[1] + "'");
        } else if (key == "rule") {
            s.script.rules.push_back(parse_rule(c, w));
        } else if (key == "expect") {
            if (w.size() < 2) c.fail("expect needs a kind");
            auto it = kExpectArity.find(w[1]);
            if (it == kExpectArity.end()) c.fail("unknown expectation '" + w[1] + "'");
            std::vector<std::string> args(w.begin() + 2, w.end());
            if (args.size() < it->second.first || args.size() > it->second.second)
                c.fail("wrong number of arguments for '" + w[1] + "'");
            s.expectations.push_back({w[1], std::move(args), lineno});
        } else {
            c.fail("unknown directive '" + key + "'");
        }
    }
    Cursor end{source, lineno};
    if (!have_protocol) end.fail("missing 'protocol'");
    if (!have_size && s.protocol == Protocol::Sedds) s.file_size = 16'384;
    if (!s.weights.empty() && s.weights.size() != s.members + 1)
        end.fail("weights needs one value per assignee (members + 1)");
    for (const auto& [id, b] : s.member_behavior) {
        bool known = false;
        for (std::size_t i = 1; i <= s.members; ++i) known |= id == "uav" + std::to_string(i);
        if (!known) end.fail("behavior for unknown member '" + id + "'");
    }
    return s;
}

Scenario load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ProtocolError(Error::ParseError, path.string() + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.filename().string());
}

Scenario honest(Protocol p, std::size_t members, std::uint64_t file_size, std::uint64_t seed) {
    Scenario s;
    s.name = std::string("honest-") + std::string(report::protocol_name(p));
    s.protocol = p;
    s.members = members;
    s.file_size = file_size;
    s.seed = seed;
    return s;
}

// ---- execution ---------------------------------------------------------------

bool RunResult::pass() const {
    for (const auto& a : assertions)
        if (!a.pass) return false;
    return true;
}

std::size_t RunResult::count(std::string_view kind, std::string_view substr) const {
    std::size_t n = 0;
    for (const auto& e : events)
        if (e.kind == kind && e.line.find(substr) != std::string::npos) ++n;
    return n;
}

std::string RunResult::render() const {
    std::ostringstream out;
    out << "# scenario " << report::protocol_name(protocol) << " members=" << members << " seed=" << seed << "\n\n";
    for (const auto& a : assertions)
        out << (a.pass ? "[pass] " : "[FAIL] ") << a.text << (a.detail.empty() ? "" : "  -- " + a.detail) << '\n';
    out << "result=" << (pass() ? "pass" : "fail") << "\n\n";
    out << costs.render() << '\n';
    if (!ledger_text.empty()) out << "# payment ledger\n" << ledger_text << '\n';
    out << "# transcript\n" << transcript;
    return out.str();
}

namespace {

std::set<std::string> registry_blacklist(const Registry& r) { return {r.blacklist().begin(), r.blacklist().end()}; }

void evaluate(const Scenario& s, RunResult& r) {
    for (const auto& e : s.expectations) {
        AssertionResult a{e.text(), false, {}};
        const auto& args = e.args;
        auto party = [&](const std::string& id) -> const PartyOutcome* {
            auto it = r.parties.find(id);
            if (it == r.parties.end()) {
                a.detail = "no party " + id;
                return nullptr;
            }
            return &it->second;
        };
        auto blacklisted = [&](const std::string& id) {
            return r.ch_blacklist.contains(id) || r.registry_blacklist.contains(id);
        };
        if (e.kind == "finalized") {
            if (args[0] == "all") {
                a.pass = true;
                for (const auto& [id, p] : r.parties) {
                    bool adversarial = s.member_behavior.contains(id) &&
                                       s.member_behavior.at(id) != segds::MemberBehavior::Honest;
                    if (!adversarial && !p.exact) {
                        a.pass = false;
                        a.detail += id + " ";
                    }
                }
                if (!a.pass) a.detail = "not reconstructed: " + a.detail;
            } else if (const auto* p = party(args[0])) {
                a.pass = p->exact;
                if (!a.pass) a.detail = "plaintext_bytes=" + std::to_string(p->plaintext_bytes);
            }
        } else if (e.kind == "excluded") {
            if (const auto* p = party(args[0])) {
                a.pass = blacklisted(args[0]) && p->plaintext_bytes == 0 && !p->holds_key;
                if (!a.pass)
                    a.detail = "blacklisted=" + std::to_string(blacklisted(args[0])) +
                               " plaintext_bytes=" + std::to_string(p->plaintext_bytes);
            }
        } else if (e.kind == "blacklisted") {
            a.pass = blacklisted(args[0]);
        } else if (e.kind == "not_blacklisted") {
            a.pass = !blacklisted(args[0]);
        } else if (e.kind == "plaintext_bytes") {
            if (const auto* p = party(args[0])) {
                a.pass = std::to_string(p->plaintext_bytes) == args[1];
                a.detail = "actual " + std::to_string(p->plaintext_bytes);
            }
        } else if (e.kind == "verdict") {
            if (args[0] == "none") {
                a.pass = r.verdicts.empty();
            } else {
                for (const auto& v : r.verdicts) a.pass |= sedds::outcome_name(v.outcome) == args[0];
            }
            for (const auto& v : r.verdicts) a.detail += std::string(sedds::outcome_name(v.outcome)) + " ";
        } else if (e.kind == "ledger") {
            std::string needle = args[0] + "," + kFileName + "," + args[1] + ",";
            if (args.size() == 3) needle += args[2] + "\n";
            a.pass = r.ledger_text.find(needle) != std::string::npos ||
                     (args[1] == "none" && r.ledger_text.find(args[0] + ",") == std::string::npos);
            a.detail = r.ledger_text.empty() ? "empty ledger" : r.ledger_text.substr(0, r.ledger_text.size() - 1);
        } else if (e.kind == "rejected") {
            auto n = r.count("reject", args.size() == 2 ? args[0] + " " + args[1] : args[0]);
            a.pass = n > 0;
            a.detail = std::to_string(n) + " rejection(s)";
        } else if (e.kind == "duplicate") {
            a.pass = r.count("duplicate", args[0]) > 0;
        } else if (e.kind == "note" || e.kind == "no_note") {
            auto n = r.count(args[0], join(args, 1));
            a.pass = e.kind == "note" ? n > 0 : n == 0;
            a.detail = std::to_string(n) + " matching event(s)";
        } else if (e.kind == "no_forgeries") {
            a.pass = r.forgeries == 0;
            a.detail = std::to_string(r.forgeries) + " forged acceptance(s)";
        } else if (e.kind == "balanced") {
            a.pass = r.conservation.balanced();
        } else if (e.kind == "consolidated") {
            a.pass = r.consolidated;
        } else if (e.kind == "check") {
            a.detail = "no such metric";
            for (const auto& c : r.costs.checks)
                if (c.metric == args[0]) {
                    a.pass = c.pass;
                    a.detail = "measured " + std::to_string(static_cast<std::uint64_t>(c.measured)) + " vs " +
                               std::to_string(static_cast<std::uint64_t>(c.reference));
                }
        }
        r.assertions.push_back(std::move(a));
    }
}

void finish(const Scenario& s, RunResult& r, sim::Simulator& sim) {
    r.transcript = sim.transcript();
    r.events = sim.events();
    r.sender_frames = sim.first_frames_by_sender();
    r.conservation = sim.conservation();
    r.forgeries = sim.forgeries().size();
    std::map<std::uint8_t, std::vector<std::uint8_t>> frames(sim.first_frames().begin(), sim.first_frames().end());
    r.costs = report::make_report(s.protocol, s.protocol == Protocol::Segds ? s.members : 1, sim.costs(), frames);
}

void run_sim(sim::Simulator& sim, RunResult& r) {
    try {
        sim.run();
    } catch (const ProtocolError& e) {
        r.assertions.push_back({"simulation completes", false, e.what()});
    }
}

RunResult run_segds(const Scenario& s) {
    RunResult r;
    Drbg keys(s.seed, "scenario/keys");
    auto kgc = KeyGenerationCenter::setup(128, keys);
    kgc.set_offense_threshold(s.offense_threshold);
    Bytes content = Drbg(s.seed, "scenario/content").bytes(s.file_size);

    segds::GroupConfig cfg;
    cfg.ch = "ch";
    cfg.sp = "sp";
    cfg.file_name = kFileName;
    cfg.file_size = s.file_size;
    cfg.weights = s.weights;
    cfg.timing = {s.window_ms, s.deadline_ms};
    auto ch_key = enroll(kgc, "ch", keys);
    auto sp_key = enroll(kgc, "sp", keys);
    std::vector<FullKeyPair> member_keys;
    for (std::size_t i = 1; i <= s.members; ++i) {
        cfg.members.push_back("uav" + std::to_string(i));
        member_keys.push_back(enroll(kgc, cfg.members.back(), keys));
    }
    Env env{&kgc.params(), &kgc.registry()};

    segds::ServiceProvider sp(sp_key, env, cfg.timing);
    sp.publish(kFileName, content);
    segds::CoordinatorHead ch(ch_key, env, cfg);
    std::vector<std::unique_ptr<segds::GroupMember>> members;
    for (const auto& k : member_keys) {
        auto it = s.member_behavior.find(k.id);
        auto b = it == s.member_behavior.end() ? segds::MemberBehavior::Honest : it->second;
        members.push_back(std::make_unique<segds::GroupMember>(k, env, cfg, b));
    }

    sim::Simulator sim(s.seed, s.script, sim::SimConfig{.metering = s.metering});
    sim.add_party("sp", sp);
    sim.add_party("ch", ch);
    for (auto& m : members) sim.add_party(m->id(), *m);
    run_sim(sim, r);

    r.protocol = s.protocol;
    r.members = s.members;
    r.seed = s.seed;
    r.consolidated = ch.consolidated();
    r.ch_blacklist = {ch.blacklist().begin(), ch.blacklist().end()};
    r.registry_blacklist = registry_blacklist(kgc.registry());
    for (const auto& m : members) {
        PartyOutcome o;
        o.plaintext_bytes = m->plaintext_bytes();
        o.exact = m->output() && *m->output() == content;
        o.holds_key = m->holds_data_key();
        r.parties[m->id()] = o;
    }
    finish(s, r, sim);
    return r;
}

RunResult run_sedds(const Scenario& s) {
    RunResult r;
    Drbg keys(s.seed, "scenario/keys");
    auto kgc = KeyGenerationCenter::setup(128, keys);
    kgc.set_offense_threshold(s.offense_threshold);
    Bytes content = Drbg(s.seed, "scenario/content").bytes(s.file_size);

    auto ue_key = enroll(kgc, "ue1", keys);
    auto uav_key = enroll(kgc, "uav1", keys);
    auto sp_key = enroll(kgc, "sp", keys);
    Env env{&kgc.params(), &kgc.registry()};
    sedds::SessionConfig cfg;
    cfg.window_ms = s.window_ms;
    cfg.prepay_percent = s.prepay;

    sedds::PaymentLedger ledger;
    sedds::Ausf ausf(kgc, ledger, "sp");
    ausf.register_original(kFileName, content);
    sedds::UserEquipment ue(ue_key, env, cfg, ledger, s.ue_behavior);
    ue.want("uav1", kFileName);
    sedds::UavNode uav(uav_key, env, cfg, s.uav_behavior);
    uav.cache(kFileName, sedds::sp_sign_content(kgc.params(), sp_key, kFileName, content, keys));

    sim::Simulator sim(s.seed, s.script, sim::SimConfig{.metering = s.metering});
    sim.add_party("ue1", ue);
    sim.add_party("uav1", uav);
    sim.add_party("ausf", ausf);
    run_sim(sim, r);

    r.protocol = s.protocol;
    r.members = 1;
    r.seed = s.seed;
    r.registry_blacklist = registry_blacklist(kgc.registry());
    r.verdicts = ausf.verdicts();
    r.ledger_text = ledger.export_text();
    PartyOutcome o;
    if (auto it = ue.received().find(kFileName); it != ue.received().end()) {
        o.plaintext_bytes = it->second.size();
        o.exact = it->second == content;
    }
    r.parties["ue1"] = o;
    finish(s, r, sim);
    return r;
}

}  // namespace

RunResult run(const Scenario& s) {
    auto r = s.protocol == Protocol::Segds ? run_segds(s) : run_sedds(s);
    evaluate(s, r);
    return r;
}

}  // namespace uavshare::scenario
