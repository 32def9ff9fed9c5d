#include "uavshare/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "uavshare/sedds.hpp"
#include "uavshare/segds.hpp"
#include "uavshare/wire.hpp"

namespace uavshare::report {

std::string_view protocol_name(Protocol p) { return p == Protocol::Segds ? "segds" : "sedds"; }

std::string Formula::text() const {
    std::ostringstream s;
    s << tm << " T_m + " << te << " T_e";
    if (taes) s << " + " << taes << " T_AES";
    return s.str();
}

Formula sedds_formula() { return {10, 2, 2}; }

Formula segds_formula(std::uint64_t n) { return {3 * (2 * n + 3), 2, 0}; }

bool within_factor(double measured, double reference, double factor) {
    if (reference == 0) return measured == 0;
    double r = measured / reference;
    return r <= factor && r >= 1.0 / factor;
}

bool within_tolerance(double measured, double reference, double tolerance) {
    return std::fabs(measured - reference) <= tolerance * reference;
}

std::vector<std::string> metered_parties(Protocol p) {
    if (p == Protocol::Segds) return {"ch"};
    return {"ue1", "uav1"};
}

std::vector<std::uint8_t> footprint_types(Protocol p) {
    auto t = [](MsgType m) { return static_cast<std::uint8_t>(m); };
    if (p == Protocol::Segds)
        return {t(MsgType::SetupInit), t(MsgType::SetupResp), t(MsgType::M1),
                t(MsgType::M2),        t(MsgType::M3),        t(MsgType::M4)};
    return {t(MsgType::Req), t(MsgType::Data), t(MsgType::Hint), t(MsgType::KeyRel), t(MsgType::Ack)};
}

bool CostReport::pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

CostReport make_report(Protocol p, std::uint64_t n, const CostSheet& costs,
                       const std::map<std::uint8_t, std::vector<std::uint8_t>>& first_frames) {
    CostReport r;
    r.protocol = p;
    r.n = n;
    for (const auto& [id, ledger] : costs.parties()) r.per_party[id] = ledger.counts();
    r.total = costs.total();
    for (const auto& id : metered_parties(p)) r.measured += costs.counts(id);
    r.formula = p == Protocol::Segds ? segds_formula(n) : sedds_formula();

    for (auto type : footprint_types(p)) {
        auto it = first_frames.find(type);
        if (it == first_frames.end()) continue;
        auto bytes = p == Protocol::Segds ? segds::overhead_bytes(it->second) : sedds::overhead_bytes(it->second);
        r.message_bytes[std::string(msg_type_name(type))] = bytes;
        r.footprint += bytes;
    }

    auto factor = [&](std::string metric, double m, double ref) {
        r.checks.push_back({std::move(metric), m, ref, "factor2", within_factor(m, ref)});
    };
    factor("scalar_mults", static_cast<double>(r.measured.scalar_mults), static_cast<double>(r.formula.tm));
    factor("modexps", static_cast<double>(r.measured.modexps), static_cast<double>(r.formula.te));
    if (r.formula.taes)
        factor("sym_cipher_calls", static_cast<double>(r.measured.sym_cipher_calls),
               static_cast<double>(r.formula.taes));
    double ref_bytes = p == Protocol::Segds ? kSegdsReferenceBytes : kSeddsReferenceBytes;
    r.checks.push_back({"bytes", static_cast<double>(r.footprint), ref_bytes, "pm25",
                        within_tolerance(static_cast<double>(r.footprint), ref_bytes)});
    return r;
}

namespace {
std::string fixed3(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << v;
    return s.str();
}
}  // namespace

std::string CostReport::render() const {
    std::ostringstream out;
    out << "# cost report: " << protocol_name(protocol) << " n=" << n << "\n\n";
    out << std::left << std::setw(10) << "party" << std::right << std::setw(8) << "T_m" << std::setw(8) << "T_e"
        << std::setw(8) << "T_AES" << std::setw(8) << "T_pa" << std::setw(10) << "bytes" << std::setw(6) << "msgs"
        << '\n';
    auto row = [&](const std::string& name, const CostCounts& c) {
        out << std::left << std::setw(10) << name << std::right << std::setw(8) << c.scalar_mults << std::setw(8)
            << c.modexps << std::setw(8) << c.sym_cipher_calls << std::setw(8) << c.point_adds << std::setw(10)
            << c.bytes_sent << std::setw(6) << c.messages_sent << '\n';
    };
    for (const auto& [id, c] : per_party) row(id, c);
    row("total", total);
    row("measured", measured);

    out << "\nformula: " << formula.text() << '\n';
    out << '\n' << std::left << std::setw(18) << "metric" << std::right << std::setw(10) << "measured"
        << std::setw(10) << "reference" << std::setw(8) << "ratio" << std::setw(9) << "rule" << std::setw(6)
        << "ok" << '\n';
    for (const auto& c : checks)
        out << std::left << std::setw(18) << c.metric << std::right << std::setw(10) << c.measured << std::setw(10)
            << c.reference << std::setw(8) << fixed3(c.reference ? c.measured / c.reference : 0) << std::setw(9)
            << c.rule << std::setw(6) << (c.pass ? "yes" : "NO") << '\n';

    out << "\nmessage bytes (content excluded):\n";
    for (const auto& [type, b] : message_bytes) out << "  " << std::left << std::setw(10) << type << b << '\n';
    out << "  " << std::left << std::setw(10) << "sum" << footprint << '\n';

    out << "\n[values]\n";
    out << "protocol=" << protocol_name(protocol) << '\n' << "n=" << n << '\n';
    out << "formula.tm=" << formula.tm << '\n' << "formula.te=" << formula.te << '\n'
        << "formula.taes=" << formula.taes << '\n';
    auto kv = [&](const std::string& prefix, const CostCounts& c) {
        out << prefix << ".scalar_mults=" << c.scalar_mults << '\n'
            << prefix << ".modexps=" << c.modexps << '\n'
            << prefix << ".sym_cipher_calls=" << c.sym_cipher_calls << '\n'
            << prefix << ".point_adds=" << c.point_adds << '\n'
            << prefix << ".bytes_sent=" << c.bytes_sent << '\n'
            << prefix << ".messages_sent=" << c.messages_sent << '\n';
    };
    kv("measured", measured);
    kv("total", total);
    for (const auto& [id, c] : per_party) kv("party." + id, c);
    out << "footprint.bytes=" << footprint << '\n';
    for (const auto& c : checks) {
        out << "check." << c.metric << ".ratio=" << fixed3(c.reference ? c.measured / c.reference : 0) << '\n';
        out << "check." << c.metric << ".pass=" << (c.pass ? 1 : 0) << '\n';
    }
    out << "pass=" << (pass() ? 1 : 0) << '\n';
    return out.str();
}

}  // namespace uavshare::report
