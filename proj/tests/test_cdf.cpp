#include "doctest.h"

#include "gridflow/cdf/case.hpp"
#include "support/paths.hpp"

using namespace gridflow;
using cdf::BusType;

namespace {

const char* kMinimalTwoBus =
    " 01/01/99 TEST CASE            100.0 1999 W minimal\n"
    "BUS DATA FOLLOWS                            2 ITEMS\n"
    "   1 Slack     HV  1  1  3 1.000    0.00      0.0       0.0     0.0     0.0    69.0  1.000     0.0     0.0    0.00    0.00    0\n"
    "   2 Load      LV  1  1  0 1.000    0.00     12.5       3.0     0.0     0.0    13.8  0.000     0.0     0.0    0.00    0.00    0\n"
    "-999\n"
    "BRANCH DATA FOLLOWS                         1 ITEMS\n"
    "   1    2  1  1 1 0   0.01000    0.08000    0.0000    0     0     0    0 0     0.0     0.0\n"
    "-999\n"
    "END OF DATA\n";

}  // namespace

TEST_CASE("ieee14 fixture parses to the documented shape") {
    auto c = cdf::parse_cdf(testsupport::read_file(testsupport::data_dir() / "ieee14.cdf"));
    CHECK(c.buses.size() == 14);
    CHECK(c.branches.size() == 20);
    CHECK(c.mva_base == 100.0);
    REQUIRE(c.slack_index() == 0);
    CHECK(c.buses[0].number == 1);
    CHECK(c.buses[0].bus_type == BusType::Slack);

    // spot checks against the published data
    const cdf::Bus* b2 = c.find_bus(2);
    REQUIRE(b2 != nullptr);
    CHECK(b2->bus_type == BusType::PV);
    CHECK(b2->p_load == 21.7);
    CHECK(b2->q_load == 12.7);
    CHECK(b2->p_gen == 40.0);
    CHECK(b2->v_mag == 1.045);
    CHECK(b2->q_max == 50.0);
    CHECK(b2->q_min == -40.0);
    const cdf::Bus* b9 = c.find_bus(9);
    CHECK(b9->shunt_b == 0.19);
    CHECK(c.find_bus(4)->q_load == -3.9);

    int high = 0, mid = 0, at18 = 0;
    for (const cdf::Bus& b : c.buses) {
        if (b.base_kv == 69.0) ++high;
        if (b.base_kv == 13.8 || b.base_kv == 18.0) ++mid;
        if (b.base_kv == 18.0) ++at18;
    }
    CHECK(high == 5);
    CHECK(mid == 9);
    CHECK(at18 == 1);

    // transformer branches carry their off-nominal taps
    int transformers = 0;
    for (const cdf::Branch& br : c.branches) transformers += br.is_transformer ? 1 : 0;
    CHECK(transformers == 3);
    bool found_49 = false;
    for (const cdf::Branch& br : c.branches) {
        if (br.from == 4 && br.to == 9) {
            found_49 = true;
            CHECK(br.is_transformer);
            CHECK(br.tap_ratio == 0.969);
            CHECK(br.phase_shift == 0.0);
        }
        if (br.from == 1 && br.to == 2) {
            CHECK(br.r == 0.01938);
            CHECK(br.x == 0.05917);
            CHECK(br.b_charging == 0.0528);
            CHECK(br.tap_ratio == 1.0);  // blank tap normalizes to one
        }
    }
    CHECK(found_49);
}

TEST_CASE("minimal two-bus file parses") {
    auto c = cdf::parse_cdf(kMinimalTwoBus);
    CHECK(c.buses.size() == 2);
    CHECK(c.branches.size() == 1);
    CHECK(c.buses[1].bus_type == BusType::PQ);
    CHECK(c.buses[1].p_load == 12.5);
}

TEST_CASE("bus type code 1 maps to PQ") {
    std::string text = kMinimalTwoBus;
    const auto pos = text.find("  0 1.000    0.00     12.5");
    REQUIRE(pos != std::string::npos);
    text[pos + 2] = '1';  // type column of the load bus card
    auto c = cdf::parse_cdf(text);
    CHECK(c.buses[1].bus_type == BusType::PQ);
}

TEST_CASE("parse errors carry names and line numbers") {
    SUBCASE("unterminated bus section") {
        std::string text =
            " 01/01/99 TEST                 100.0 1999 W broken\n"
            "BUS DATA FOLLOWS    1 ITEMS\n"
            "   1 Slack         1  1  3 1.000    0.00      0.0       0.0     0.0     0.0    69.0  1.000     0.0     0.0    0.00    0.00    0\n"
            "BRANCH DATA FOLLOWS  0 ITEMS\n"
            "-999\n";
        CHECK_THROWS_AS(cdf::parse_cdf(text), MissingSection);
    }
    SUBCASE("no sections at all") {
        CHECK_THROWS_AS(cdf::parse_cdf(" 01/01/99 X                    100.0 1999 W empty\n"),
                        MissingSection);
    }
    SUBCASE("malformed numeric field names its line") {
        std::string text = kMinimalTwoBus;
        const auto pos = text.find("12.5");
        text.replace(pos, 4, "12.x");
        try {
            cdf::parse_cdf(text);
            FAIL("expected MalformedCard");
        } catch (const MalformedCard& e) {
            CHECK(e.line() == 4);
        }
    }
    SUBCASE("duplicate bus number") {
        std::string text = kMinimalTwoBus;
        const auto pos = text.find("   2 Load");
        text.replace(pos, 4, "   1");
        CHECK_THROWS_AS(cdf::parse_cdf(text), DuplicateBusNumber);
    }
    SUBCASE("branch referencing an unknown bus") {
        std::string text = kMinimalTwoBus;
        const auto pos = text.find("   1    2  1  1 1 0");
        text.replace(pos, 9, "   1    7");
        CHECK_THROWS_AS(cdf::parse_cdf(text), UnknownBusInBranch);
    }
    SUBCASE("no slack bus") {
        std::string text = kMinimalTwoBus;
        const auto pos = text.find("  3 1.000");
        text.replace(pos, 3, "  0");
        CHECK_THROWS_AS(cdf::parse_cdf(text), NoSlackBus);
    }
    SUBCASE("zero impedance branch") {
        std::string text = kMinimalTwoBus;
        const auto pos = text.find("0.01000    0.08000");
        text.replace(pos, 18, "0.00000    0.00000");
        CHECK_THROWS_AS(cdf::parse_cdf(text), MalformedCard);
    }
}

TEST_CASE("export and re-import are lossless") {
    auto check_roundtrip = [](const cdf::PowerFlowCase& c) {
        auto doc = cdf::export_case(c);
        cdf::PowerFlowCase back = cdf::case_from_json(doc);
        CHECK(cdf::export_case(back) == doc);
        REQUIRE(back.buses.size() == c.buses.size());
        REQUIRE(back.branches.size() == c.branches.size());
        for (size_t i = 0; i < c.buses.size(); ++i) {
            CHECK(back.buses[i].number == c.buses[i].number);
            CHECK(back.buses[i].name == c.buses[i].name);
            CHECK(back.buses[i].base_kv == c.buses[i].base_kv);
            CHECK(back.buses[i].bus_type == c.buses[i].bus_type);
            CHECK(back.buses[i].v_mag == c.buses[i].v_mag);
            CHECK(back.buses[i].v_ang == c.buses[i].v_ang);
            CHECK(back.buses[i].p_load == c.buses[i].p_load);
            CHECK(back.buses[i].q_load == c.buses[i].q_load);
            CHECK(back.buses[i].p_gen == c.buses[i].p_gen);
            CHECK(back.buses[i].q_gen == c.buses[i].q_gen);
            CHECK(back.buses[i].q_min == c.buses[i].q_min);
            CHECK(back.buses[i].q_max == c.buses[i].q_max);
            CHECK(back.buses[i].shunt_g == c.buses[i].shunt_g);
            CHECK(back.buses[i].shunt_b == c.buses[i].shunt_b);
        }
        for (size_t i = 0; i < c.branches.size(); ++i) {
            CHECK(back.branches[i].from == c.branches[i].from);
            CHECK(back.branches[i].to == c.branches[i].to);
            CHECK(back.branches[i].r == c.branches[i].r);
            CHECK(back.branches[i].x == c.branches[i].x);
            CHECK(back.branches[i].b_charging == c.branches[i].b_charging);
            CHECK(back.branches[i].tap_ratio == c.branches[i].tap_ratio);
            CHECK(back.branches[i].phase_shift == c.branches[i].phase_shift);
            CHECK(back.branches[i].is_transformer == c.branches[i].is_transformer);
        }
    };
    check_roundtrip(cdf::parse_cdf(kMinimalTwoBus));
    check_roundtrip(
        cdf::parse_cdf(testsupport::read_file(testsupport::data_dir() / "ieee14.cdf")));
    check_roundtrip(
        cdf::parse_cdf(testsupport::read_file(testsupport::data_dir() / "twobus.cdf")));

    auto doc = cdf::export_case(cdf::parse_cdf(kMinimalTwoBus));
    CHECK(doc["buses"][0]["bus_type"] == "Slack");
}

TEST_CASE("phase shift override hits the named branch only") {
    auto c = cdf::parse_cdf(testsupport::read_file(testsupport::data_dir() / "ieee14.cdf"));
    cdf::override_phase_shift(c, 4, 9, 5.0);
    for (const cdf::Branch& br : c.branches) {
        if (br.from == 4 && br.to == 9) {
            CHECK(br.phase_shift == 5.0);
            CHECK(br.is_transformer);
        } else {
            CHECK(br.phase_shift == 0.0);
        }
    }
    CHECK_THROWS_AS(cdf::override_phase_shift(c, 1, 14, 5.0), Error);
}
