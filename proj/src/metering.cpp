#include "uavshare/metering.hpp"

namespace uavshare {

namespace {
thread_local CostLedger* g_active = nullptr;
}

CostCounts& CostCounts::operator+=(const CostCounts& o) {
    scalar_mults += o.scalar_mults;
    modexps += o.modexps;
    sym_cipher_calls += o.sym_cipher_calls;
    point_adds += o.point_adds;
    bytes_sent += o.bytes_sent;
    messages_sent += o.messages_sent;
    return *this;
}

CostCounts operator-(const CostCounts& a, const CostCounts& b) {
    CostCounts d;
    d.scalar_mults = a.scalar_mults - b.scalar_mults;
    d.modexps = a.modexps - b.modexps;
    d.sym_cipher_calls = a.sym_cipher_calls - b.sym_cipher_calls;
    d.point_adds = a.point_adds - b.point_adds;
    d.bytes_sent = a.bytes_sent - b.bytes_sent;
    d.messages_sent = a.messages_sent - b.messages_sent;
    return d;
}

LedgerScope::LedgerScope(CostLedger* ledger) : previous_(g_active) { g_active = ledger; }

LedgerScope::~LedgerScope() { g_active = previous_; }

namespace metering {

CostLedger* active() { return g_active; }

void scalar_mult() {
    if (g_active) g_active->add_scalar_mult();
}
void modexp() {
    if (g_active) g_active->add_modexp();
}
void sym_cipher() {
    if (g_active) g_active->add_sym_cipher();
}
void point_add() {
    if (g_active) g_active->add_point_add();
}

}  // namespace metering

CostCounts CostSheet::counts(const std::string& id) const {
    auto it = parties_.find(id);
    return it == parties_.end() ? CostCounts{} : it->second.counts();
}

CostCounts CostSheet::total() const {
    CostCounts sum;
    for (const auto& [id, ledger] : parties_) sum += ledger.counts();
    return sum;
}

}  // namespace uavshare
