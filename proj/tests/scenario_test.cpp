#include <gtest/gtest.h>

#include <filesystem>

#include "uavshare/errors.hpp"
#include "uavshare/scenario.hpp"

using namespace uavshare;
using namespace uavshare::scenario;

namespace {

std::vector<std::filesystem::path> corpus() {
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(UAVSHARE_SCENARIO_DIR))
        if (e.path().extension() == ".scn" && e.path().stem() != "malformed") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

Error parse_error_code(std::string_view text) {
    try {
        parse(text);
    } catch (const ProtocolError& e) {
        return e.code();
    }
    return Error::Malformed;
}

}  // namespace

TEST(ScenarioParse, FullGrammar) {
    auto s = parse(R"(
        protocol segds   # trailing comment
        members 3
        file_size 0x100
        seed 9
        weights 1 2 3 4
        behavior uav2 freeride
        rule tamper from=uav1 to=ch type=M3 nth=2 offset=5 mask=0x10
        rule inject type=M1 raw=00ff target=uav3
        rule impersonate from=uav1 as=uav2
        expect excluded uav2
        expect note blacklist uav2
    )");
    EXPECT_EQ(s.protocol, Protocol::Segds);
    EXPECT_EQ(s.members, 3u);
    EXPECT_EQ(s.file_size, 256u);
    EXPECT_EQ(s.weights.size(), 4u);
    EXPECT_EQ(s.member_behavior.at("uav2"), segds::MemberBehavior::FreeRide);
    ASSERT_EQ(s.script.rules.size(), 3u);
    EXPECT_EQ(*s.script.rules[0].match.nth, 2u);
    EXPECT_EQ(s.script.rules[0].action.xor_mask, 0x10);
    EXPECT_EQ(s.script.rules[1].action.raw, (Bytes{0x00, 0xff}));
    EXPECT_EQ(s.expectations[1].args, (std::vector<std::string>{"blacklist", "uav2"}));
}

TEST(ScenarioParse, SeddsDefaultsToSixteenKiB) { EXPECT_EQ(parse("protocol sedds").file_size, 16384u); }

TEST(ScenarioParse, ErrorsCarryLineNumbers) {
    try {
        parse("protocol segds\n\nmembers five\n", "x.scn");
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), Error::ParseError);
        EXPECT_NE(std::string(e.what()).find("x.scn:3:"), std::string::npos);
    }
}

TEST(ScenarioParse, RejectsBadInput) {
    for (auto text : {"members 3", "protocol tcp", "protocol segds\nfoo 1", "protocol segds\nrule explode",
                      "protocol segds\nrule drop type=M9", "protocol segds\nrule impersonate from=a",
                      "protocol segds\nrule drop nth=0", "protocol segds\nexpect flying", "protocol segds\nexpect balanced x",
                      "protocol segds\nmembers 2\nbehavior uav3 freeride", "protocol segds\nmembers 2\nweights 1 1",
                      "protocol sedds\nprepay 100", "protocol segds\nrule tamper mask=0x100"})
        EXPECT_EQ(parse_error_code(text), Error::ParseError) << text;
}

TEST(ScenarioRun, FailedExpectationIsReported) {
    auto s = parse("protocol segds\nmembers 2\nfile_size 100\nexpect blacklisted uav1\nexpect finalized all");
    auto r = run(s);
    ASSERT_EQ(r.assertions.size(), 2u);
    EXPECT_FALSE(r.assertions[0].pass);
    EXPECT_TRUE(r.assertions[1].pass);
    EXPECT_FALSE(r.pass());
    EXPECT_NE(r.render().find("[FAIL] expect blacklisted uav1"), std::string::npos);
}

class Corpus : public ::testing::TestWithParam<std::filesystem::path> {};

TEST_P(Corpus, AllExpectationsHold) {
    auto r = run(load(GetParam()));
    for (const auto& a : r.assertions) EXPECT_TRUE(a.pass) << a.text << " " << a.detail;
    EXPECT_EQ(r.forgeries, 0u);
    EXPECT_TRUE(r.conservation.balanced());
}

TEST_P(Corpus, SameSeedSameOutput) {
    auto s = load(GetParam());
    EXPECT_EQ(run(s).render(), run(s).render());
}

TEST_P(Corpus, MeteringDoesNotChangeTranscript) {
    auto s = load(GetParam());
    auto on = run(s);
    s.metering = false;
    auto off = run(s);
    EXPECT_EQ(on.transcript, off.transcript);
}

INSTANTIATE_TEST_SUITE_P(Files, Corpus, ::testing::ValuesIn(corpus()),
                         [](const auto& info) { return info.param.stem().string(); });
