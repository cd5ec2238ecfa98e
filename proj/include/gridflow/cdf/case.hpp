#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gridflow/errors.hpp"
#include "json.hpp"

namespace gridflow::cdf {

enum class BusType { PQ, PV, Slack };

const char* to_string(BusType type);
BusType bus_type_from_string(const std::string& s);

struct Bus {
    int number = 0;
    std::string name;
    double base_kv = 0.0;
    BusType bus_type = BusType::PQ;
    double v_mag = 1.0;   // per-unit; setpoint for PV/slack
    double v_ang = 0.0;   // degrees
    double p_load = 0.0;  // MW
    double q_load = 0.0;  // Mvar
    double p_gen = 0.0;   // MW
    double q_gen = 0.0;   // Mvar
    double q_min = 0.0;   // Mvar
    double q_max = 0.0;   // Mvar
    double shunt_g = 0.0; // per-unit
    double shunt_b = 0.0; // per-unit
};

struct Branch {
    int from = 0;
    int to = 0;
    double r = 0.0;           // per-unit
    double x = 0.0;           // per-unit
    double b_charging = 0.0;  // per-unit, total line charging
    double tap_ratio = 1.0;   // 1.0 when not a transformer
    double phase_shift = 0.0; // degrees
    bool is_transformer = false;
};

struct PowerFlowCase {
    std::string title;
    double mva_base = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;

    int bus_index(int number) const;  // -1 when absent
    const Bus* find_bus(int number) const;
    int slack_index() const;          // index into buses
};

/// Parses the fixed-column IEEE Common Data Format. The bus and branch
/// sections are mandatory; other sections are skipped.
PowerFlowCase parse_cdf(std::string_view text);

/// Canonical JSON form; load_case(export_case(c)) is lossless.
nlohmann::ordered_json export_case(const PowerFlowCase& c);
PowerFlowCase case_from_json(const nlohmann::json& doc);

/// Injects a transformer phase shift (degrees) on the branch from->to.
/// Used to reproduce solver variants that assume shifted transformers.
void override_phase_shift(PowerFlowCase& c, int from, int to, double degrees);

}  // namespace gridflow::cdf
