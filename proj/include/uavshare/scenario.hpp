#pragma once

// Line-oriented scenario files:
//
//   protocol segds
//   members 5
//   file_size 65536
//   behavior uav3 freeride
//   rule drop from=uav3 type=M3
//   expect blacklisted uav3
//
// Blank lines and text after '#' are ignored.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uavshare/netsim.hpp"
#include "uavshare/report.hpp"
#include "uavshare/sedds.hpp"
#include "uavshare/segds.hpp"

namespace uavshare::scenario {

using report::Protocol;

struct Expectation {
    std::string kind;
    std::vector<std::string> args;
    std::size_t line = 0;

    std::string text() const;
};

struct Scenario {
    std::string name;
    Protocol protocol = Protocol::Segds;
    std::size_t members = 5;
    std::uint64_t file_size = 65'536;
    std::uint64_t seed = 1;
    TimeMs window_ms = 30'000;
    TimeMs deadline_ms = 10'000;
    std::vector<std::uint64_t> weights;
    int prepay = 20;
    std::uint32_t offense_threshold = 1;
    bool metering = true;
    std::map<PartyId, segds::MemberBehavior> member_behavior;
    sedds::UeBehavior ue_behavior = sedds::UeBehavior::Honest;
    sedds::UavBehavior uav_behavior = sedds::UavBehavior::Honest;
    sim::AdversaryScript script;
    std::vector<Expectation> expectations;
};

// Throws ProtocolError(ParseError) with "<source>:<line>: <reason>".
Scenario parse(std::string_view text, const std::string& source = "<input>");
Scenario load(const std::filesystem::path& path);

struct PartyOutcome {
    std::uint64_t plaintext_bytes = 0;
    bool exact = false;      // plaintext equals the original content
    bool holds_key = false;  // SeGDS: recovered K_d
};

struct AssertionResult {
    std::string text;
    bool pass = false;
    std::string detail;
};

struct RunResult {
    Protocol protocol = Protocol::Segds;
    std::size_t members = 0;
    std::uint64_t seed = 0;
    std::string transcript;
    report::CostReport costs;
    std::map<PartyId, PartyOutcome> parties;
    std::set<std::string> ch_blacklist;
    std::set<std::string> registry_blacklist;
    bool consolidated = false;
    std::vector<sedds::Verdict> verdicts;
    std::string ledger_text;
    sim::Conservation conservation;
    std::size_t forgeries = 0;
    std::vector<sim::TranscriptEvent> events;
    std::map<std::pair<PartyId, std::uint8_t>, Bytes> sender_frames;
    std::vector<AssertionResult> assertions;

    bool pass() const;
    std::size_t count(std::string_view kind, std::string_view substr = {}) const;
    // Assertions, cost report and transcript, in that order.
    std::string render() const;
};

RunResult run(const Scenario& s);

// Honest scenario with no adversary rules.
Scenario honest(Protocol p, std::size_t members, std::uint64_t file_size, std::uint64_t seed);

}  // namespace uavshare::scenario
