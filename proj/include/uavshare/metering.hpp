#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace uavshare {

// Operation counts in the cost-unit vocabulary of the cost tables:
// T_m (group scalar multiplication), T_e (1024-bit modular exponentiation),
// T_AES (one symmetric encrypt or decrypt) and T_pa (point addition).
struct CostCounts {
    std::uint64_t scalar_mults = 0;
    std::uint64_t modexps = 0;
    std::uint64_t sym_cipher_calls = 0;
    std::uint64_t point_adds = 0;
    std::uint64_t bytes_sent = 0;
    std::uint64_t messages_sent = 0;

    CostCounts& operator+=(const CostCounts& o);
    friend CostCounts operator+(CostCounts a, const CostCounts& b) { return a += b; }
    friend CostCounts operator-(const CostCounts& a, const CostCounts& b);
    bool operator==(const CostCounts&) const = default;
};

class CostLedger {
public:
    const CostCounts& counts() const { return counts_; }
    void reset() { counts_ = {}; }

    void add_scalar_mult() { ++counts_.scalar_mults; }
    void add_modexp() { ++counts_.modexps; }
    void add_sym_cipher() { ++counts_.sym_cipher_calls; }
    void add_point_add() { ++counts_.point_adds; }
    void add_sent(std::uint64_t bytes) {
        counts_.bytes_sent += bytes;
        ++counts_.messages_sent;
    }

private:
    CostCounts counts_;
};

// Installs a ledger as the calling thread's active instrumentation target for
// the lifetime of the scope. Scopes nest; the previous target is restored.
class LedgerScope {
public:
    explicit LedgerScope(CostLedger* ledger);
    ~LedgerScope();
    LedgerScope(const LedgerScope&) = delete;
    LedgerScope& operator=(const LedgerScope&) = delete;

private:
    CostLedger* previous_;
};

namespace metering {

// Null when metering is disabled on this thread.
CostLedger* active();

void scalar_mult();
void modexp();
void sym_cipher();
void point_add();

}  // namespace metering

// Per-party ledgers for one run.
class CostSheet {
public:
    CostLedger& party(const std::string& id) { return parties_[id]; }
    const std::map<std::string, CostLedger>& parties() const { return parties_; }
    CostCounts counts(const std::string& id) const;
    CostCounts total() const;

private:
    std::map<std::string, CostLedger> parties_;
};

}  // namespace uavshare
