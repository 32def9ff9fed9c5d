#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uavshare/metering.hpp"

namespace uavshare::report {

enum class Protocol { Segds, Sedds };
std::string_view protocol_name(Protocol p);

// Published per-run cost: a T_m + b T_e + c T_AES.
struct Formula {
    std::uint64_t tm = 0;
    std::uint64_t te = 0;
    std::uint64_t taes = 0;

    std::string text() const;
};

// 2 T_e + 10 T_m + 2 T_AES
Formula sedds_formula();
// 3(2N+3) T_m + 2 T_e
Formula segds_formula(std::uint64_t n);

inline constexpr double kCountFactor = 2.0;
inline constexpr double kByteTolerance = 0.25;
inline constexpr std::uint64_t kSeddsReferenceBytes = 526;
inline constexpr std::uint64_t kSegdsReferenceBytes = 1500;

// measured/reference within [1/factor, factor].
bool within_factor(double measured, double reference, double factor = kCountFactor);
// |measured - reference| <= tolerance * reference.
bool within_tolerance(double measured, double reference, double tolerance = kByteTolerance);

// The parties whose ledgers make up the compared cost: the CH for SeGDS, the
// UE and UAV for SeDDS.
std::vector<std::string> metered_parties(Protocol p);
// Message types summed for the byte footprint.
std::vector<std::uint8_t> footprint_types(Protocol p);

struct Check {
    std::string metric;
    double measured = 0;
    double reference = 0;
    std::string rule;  // "factor2" or "pm25"
    bool pass = false;
};

struct CostReport {
    Protocol protocol = Protocol::Segds;
    std::uint64_t n = 0;
    std::map<std::string, CostCounts> per_party;
    CostCounts total;
    CostCounts measured;
    Formula formula;
    std::map<std::string, std::uint64_t> message_bytes;  // per type, content excluded
    std::uint64_t footprint = 0;
    std::vector<Check> checks;

    bool pass() const;
    // Text tables followed by a key=value section.
    std::string render() const;
};

// `first_frames` maps each message type to the first frame of that type sent.
CostReport make_report(Protocol p, std::uint64_t n, const CostSheet& costs,
                       const std::map<std::uint8_t, std::vector<std::uint8_t>>& first_frames);

}  // namespace uavshare::report
