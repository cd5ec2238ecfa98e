#include "gridflow/cdf/case.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace gridflow::cdf {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(BusType type) {
    switch (type) {
        case BusType::PQ: return "PQ";
        case BusType::PV: return "PV";
        case BusType::Slack: return "Slack";
    }
    return "?";
}

BusType bus_type_from_string(const std::string& s) {
    if (s == "PQ") return BusType::PQ;
    if (s == "PV") return BusType::PV;
    if (s == "Slack") return BusType::Slack;
    throw Error("unknown bus type: " + s);
}

int PowerFlowCase::bus_index(int number) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].number == number) return static_cast<int>(i);
    return -1;
}

const Bus* PowerFlowCase::find_bus(int number) const {
    int i = bus_index(number);
    return i < 0 ? nullptr : &buses[i];
}

int PowerFlowCase::slack_index() const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].bus_type == BusType::Slack) return static_cast<int>(i);
    return -1;
}

namespace {

std::string trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

/// 1-based inclusive column slice, tolerant of short lines.
std::string_view columns(std::string_view line, size_t from, size_t to) {
    if (line.size() < from) return {};
    return line.substr(from - 1, std::min(to, line.size()) - from + 1);
}

double parse_real(std::string_view field, int line_no) {
    std::string t = trim(field);
    if (t.empty()) return 0.0;  // sparse columns default to zero
    try {
        size_t used = 0;
        double v = std::stod(t, &used);
        if (used != t.size())
            throw MalformedCard("bad numeric field '" + t + "'", line_no);
        return v;
    } catch (const std::invalid_argument&) {
        throw MalformedCard("bad numeric field '" + t + "'", line_no);
    } catch (const std::out_of_range&) {
        throw MalformedCard("numeric field out of range '" + t + "'", line_no);
    }
}

int parse_int(std::string_view field, int line_no) {
    std::string t = trim(field);
    if (t.empty()) return 0;
    int v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size())
        throw MalformedCard("bad integer field '" + t + "'", line_no);
    return v;
}

bool is_terminator(const std::string& line) {
    return trim(line).rfind("-999", 0) == 0;
}

Bus parse_bus_card(const std::string& line, int line_no) {
    Bus b;
    b.number = parse_int(columns(line, 1, 4), line_no);
    if (b.number <= 0)
        throw MalformedCard("bus number must be positive", line_no);
    b.name = trim(columns(line, 6, 17));
    int type_code = parse_int(columns(line, 25, 26), line_no);
    switch (type_code) {
        case 0:
        case 1: b.bus_type = BusType::PQ; break;   // code 1 (hold Mvar) treated as PQ
        case 2: b.bus_type = BusType::PV; break;
        case 3: b.bus_type = BusType::Slack; break;
        default:
            throw MalformedCard("unknown bus type code " + std::to_string(type_code), line_no);
    }
    b.v_mag = parse_real(columns(line, 28, 33), line_no);
    b.v_ang = parse_real(columns(line, 34, 40), line_no);
    b.p_load = parse_real(columns(line, 41, 49), line_no);
    b.q_load = parse_real(columns(line, 50, 59), line_no);
    b.p_gen = parse_real(columns(line, 60, 67), line_no);
    b.q_gen = parse_real(columns(line, 68, 75), line_no);
    b.base_kv = parse_real(columns(line, 77, 83), line_no);
    b.q_max = parse_real(columns(line, 91, 98), line_no);
    b.q_min = parse_real(columns(line, 99, 106), line_no);
    b.shunt_g = parse_real(columns(line, 107, 114), line_no);
    b.shunt_b = parse_real(columns(line, 115, 122), line_no);
    if (b.v_mag == 0.0) b.v_mag = 1.0;  // blank voltage column
    return b;
}

Branch parse_branch_card(const std::string& line, int line_no) {
    Branch br;
    br.from = parse_int(columns(line, 1, 4), line_no);
    br.to = parse_int(columns(line, 6, 9), line_no);
    if (br.from <= 0 || br.to <= 0)
        throw MalformedCard("branch endpoints must be positive bus numbers", line_no);
    int type_code = parse_int(columns(line, 19, 19), line_no);
    br.r = parse_real(columns(line, 20, 29), line_no);
    br.x = parse_real(columns(line, 30, 40), line_no);
    br.b_charging = parse_real(columns(line, 41, 50), line_no);
    double tap = parse_real(columns(line, 77, 82), line_no);
    br.phase_shift = parse_real(columns(line, 84, 90), line_no);
    br.is_transformer = tap != 0.0 || br.phase_shift != 0.0 || type_code != 0;
    br.tap_ratio = tap == 0.0 ? 1.0 : tap;  // blank tap on plain lines
    if (br.tap_ratio <= 0.0)
        throw MalformedCard("transformer tap must be positive", line_no);
    if (br.r == 0.0 && br.x == 0.0)
        throw MalformedCard("branch with zero impedance", line_no);
    return br;
}

}  // namespace

PowerFlowCase parse_cdf(std::string_view text) {
    std::vector<std::string> lines;
    {
        std::string cur;
        std::istringstream in{std::string(text)};
        while (std::getline(in, cur)) lines.push_back(cur);
    }
    if (lines.empty()) throw MissingSection("empty file");

    PowerFlowCase c;
    c.title = trim(lines[0]);
    c.mva_base = parse_real(columns(lines[0], 32, 37), 1);
    if (c.mva_base <= 0.0)
        throw MalformedCard("MVA base must be positive", 1);

    enum class Section { None, Bus, Branch };
    Section section = Section::None;
    bool bus_done = false, branch_done = false;

    std::set<int> seen_numbers;
    for (size_t i = 1; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        const int line_no = static_cast<int>(i + 1);
        const std::string t = trim(line);
        if (section == Section::None) {
            if (t.rfind("BUS DATA FOLLOWS", 0) == 0) {
                if (bus_done) throw MalformedCard("repeated bus section", line_no);
                section = Section::Bus;
            } else if (t.rfind("BRANCH DATA FOLLOWS", 0) == 0) {
                if (branch_done) throw MalformedCard("repeated branch section", line_no);
                section = Section::Branch;
            }
            continue;  // other sections are skipped
        }
        if (is_terminator(line)) {
            if (section == Section::Bus) bus_done = true;
            if (section == Section::Branch) branch_done = true;
            section = Section::None;
            continue;
        }
        if (t.rfind("BUS DATA FOLLOWS", 0) == 0 || t.rfind("BRANCH DATA FOLLOWS", 0) == 0)
            throw MissingSection(std::string(section == Section::Bus ? "bus" : "branch") +
                                     " data section not terminated by -999",
                                 line_no);
        if (t.empty()) continue;
        if (section == Section::Bus) {
            Bus b = parse_bus_card(line, line_no);
            if (!seen_numbers.insert(b.number).second)
                throw DuplicateBusNumber("duplicate bus number " + std::to_string(b.number),
                                         line_no);
            c.buses.push_back(std::move(b));
        } else {
            c.branches.push_back(parse_branch_card(line, line_no));
        }
    }
    if (!bus_done)
        throw MissingSection(c.buses.empty() ? "bus data section not found"
                                             : "bus data section not terminated");
    if (!branch_done)
        throw MissingSection(c.branches.empty() ? "branch data section not found"
                                                : "branch data section not terminated");
    if (c.buses.empty()) throw MissingSection("no bus cards");

    for (const Branch& br : c.branches) {
        if (c.bus_index(br.from) < 0)
            throw UnknownBusInBranch("branch references unknown bus " + std::to_string(br.from));
        if (c.bus_index(br.to) < 0)
            throw UnknownBusInBranch("branch references unknown bus " + std::to_string(br.to));
    }
    int slacks = 0;
    for (const Bus& b : c.buses)
        if (b.bus_type == BusType::Slack) ++slacks;
    if (slacks != 1)
        throw NoSlackBus("expected exactly one slack bus, found " + std::to_string(slacks));
    return c;
}

ordered_json export_case(const PowerFlowCase& c) {
    ordered_json buses = ordered_json::array();
    for (const Bus& b : c.buses) {
        buses.push_back(ordered_json{
            {"number", b.number},       {"name", b.name},
            {"base_kv", b.base_kv},     {"bus_type", to_string(b.bus_type)},
            {"v_mag", b.v_mag},         {"v_ang", b.v_ang},
            {"p_load", b.p_load},       {"q_load", b.q_load},
            {"p_gen", b.p_gen},         {"q_gen", b.q_gen},
            {"q_min", b.q_min},         {"q_max", b.q_max},
            {"shunt_g", b.shunt_g},     {"shunt_b", b.shunt_b},
        });
    }
    ordered_json branches = ordered_json::array();
    for (const Branch& br : c.branches) {
        branches.push_back(ordered_json{
            {"from", br.from},               {"to", br.to},
            {"r", br.r},                     {"x", br.x},
            {"b_charging", br.b_charging},   {"tap_ratio", br.tap_ratio},
            {"phase_shift", br.phase_shift}, {"is_transformer", br.is_transformer},
        });
    }
    return ordered_json{{"title", c.title},
                        {"mva_base", c.mva_base},
                        {"buses", std::move(buses)},
                        {"branches", std::move(branches)}};
}

PowerFlowCase case_from_json(const json& doc) {
    PowerFlowCase c;
    c.title = doc.value("title", "");
    c.mva_base = doc.at("mva_base").get<double>();
    if (c.mva_base <= 0.0) throw Error("mva_base must be positive");
    for (const auto& jb : doc.at("buses")) {
        Bus b;
        b.number = jb.at("number").get<int>();
        b.name = jb.value("name", "");
        b.base_kv = jb.value("base_kv", 0.0);
        b.bus_type = bus_type_from_string(jb.at("bus_type").get<std::string>());
        b.v_mag = jb.value("v_mag", 1.0);
        b.v_ang = jb.value("v_ang", 0.0);
        b.p_load = jb.value("p_load", 0.0);
        b.q_load = jb.value("q_load", 0.0);
        b.p_gen = jb.value("p_gen", 0.0);
        b.q_gen = jb.value("q_gen", 0.0);
        b.q_min = jb.value("q_min", 0.0);
        b.q_max = jb.value("q_max", 0.0);
        b.shunt_g = jb.value("shunt_g", 0.0);
        b.shunt_b = jb.value("shunt_b", 0.0);
        c.buses.push_back(std::move(b));
    }
    for (const auto& jb : doc.at("branches")) {
        Branch br;
        br.from = jb.at("from").get<int>();
        br.to = jb.at("to").get<int>();
        br.r = jb.value("r", 0.0);
        br.x = jb.value("x", 0.0);
        br.b_charging = jb.value("b_charging", 0.0);
        br.tap_ratio = jb.value("tap_ratio", 1.0);
        br.phase_shift = jb.value("phase_shift", 0.0);
        br.is_transformer = jb.value("is_transformer", false);
        c.branches.push_back(std::move(br));
    }
    return c;
}

void override_phase_shift(PowerFlowCase& c, int from, int to, double degrees) {
    for (Branch& br : c.branches) {
        if (br.from == from && br.to == to) {
            br.phase_shift = degrees;
            br.is_transformer = true;
            return;
        }
    }
    throw Error("no branch " + std::to_string(from) + "-" + std::to_string(to));
}

}  // namespace gridflow::cdf
