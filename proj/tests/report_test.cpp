#include <gtest/gtest.h>

#include "uavshare/report.hpp"
#include "uavshare/wire.hpp"

using namespace uavshare;
using namespace uavshare::report;

TEST(ReportFormula, SegdsArithmeticByHand) {
    EXPECT_EQ(segds_formula(2).tm, 21u);
    EXPECT_EQ(segds_formula(5).tm, 39u);
    EXPECT_EQ(segds_formula(10).tm, 69u);
    for (std::uint64_t n = 2; n <= 10; ++n) {
        EXPECT_EQ(segds_formula(n).te, 2u);
        EXPECT_EQ(segds_formula(n + 1).tm - segds_formula(n).tm, 6u);
    }
    EXPECT_EQ(segds_formula(5).text(), "39 T_m + 2 T_e");
}

TEST(ReportFormula, SeddsTerms) {
    auto f = sedds_formula();
    EXPECT_EQ(f.tm, 10u);
    EXPECT_EQ(f.te, 2u);
    EXPECT_EQ(f.taes, 2u);
    EXPECT_EQ(f.text(), "10 T_m + 2 T_e + 2 T_AES");
}

TEST(ReportTolerance, FactorAndPercentBoundsAreInclusive) {
    EXPECT_TRUE(within_factor(20, 10));
    EXPECT_FALSE(within_factor(20.01, 10));
    EXPECT_TRUE(within_factor(5, 10));
    EXPECT_FALSE(within_factor(4.99, 10));
    EXPECT_TRUE(within_tolerance(1875, 1500));
    EXPECT_FALSE(within_tolerance(1876, 1500));
    EXPECT_TRUE(within_tolerance(394.5, 526));
    EXPECT_FALSE(within_tolerance(658, 526));
}

TEST(ReportRender, DeterministicAndComplete) {
    CostSheet sheet;
    auto& ch = sheet.party("ch");
    for (int i = 0; i < 51; ++i) ch.add_scalar_mult();
    ch.add_modexp();
    ch.add_modexp();
    ch.add_sent(100);
    std::map<std::uint8_t, std::vector<std::uint8_t>> frames;
    frames[static_cast<std::uint8_t>(MsgType::M1)] = std::vector<std::uint8_t>(140, 0);
    auto r = make_report(Protocol::Segds, 5, sheet, frames);
    EXPECT_EQ(r.measured.scalar_mults, 51u);
    EXPECT_EQ(r.footprint, 140u);
    auto text = r.render();
    EXPECT_EQ(text, make_report(Protocol::Segds, 5, sheet, frames).render());
    EXPECT_NE(text.find("formula.tm=39"), std::string::npos);
    EXPECT_NE(text.find("check.scalar_mults.ratio=1.308"), std::string::npos);
    EXPECT_NE(text.find("check.bytes.pass=0"), std::string::npos);
    EXPECT_FALSE(r.pass());
}
