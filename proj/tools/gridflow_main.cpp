#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gridflow/cdf/case.hpp"
#include "gridflow/flow/serialize.hpp"
#include "gridflow/pf/report.hpp"
#include "gridflow/pf/solver.hpp"
#include "gridflow/sim/runner.hpp"
#include "gridflow/sim/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace gridflow;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ShiftOverride {
    int from = 0;
    int to = 0;
    double degrees = 0.0;
};

ShiftOverride parse_shift_override(const std::string& text) {
    ShiftOverride ov;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> ov.from >> c1 >> ov.to >> c2 >> ov.degrees) || c1 != ',' || c2 != ',')
        throw Error("--phase-shift-override expects \"from,to,degrees\", got \"" + text +
                    "\"");
    return ov;
}

cdf::PowerFlowCase load_case(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open case file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return cdf::parse_cdf(buf.str());
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write: " + path);
    out << content;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty() || out_path == "-")
        std::cout << content;
    else
        write_text(out_path, content);
}

int cmd_pf(const std::string& case_path, const std::string& method, double tol,
           int max_iter, const std::string& shift_override, const std::string& out,
           const std::string& format) {
    cdf::PowerFlowCase pf_case = load_case(case_path);
    if (!shift_override.empty()) {
        const ShiftOverride ov = parse_shift_override(shift_override);
        cdf::override_phase_shift(pf_case, ov.from, ov.to, ov.degrees);
    }
    pf::SolverConfig cfg;
    cfg.method = pf::method_from_string(method);
    cfg.tolerance = tol;
    cfg.max_iter = max_iter;
    const pf::PowerFlowSolution sol = pf::solve(pf_case, cfg);
    std::cerr << "method=" << pf::to_string(cfg.method) << " iterations=" << sol.iterations
              << " mismatch=" << sol.mismatch << (sol.converged ? "" : " (diverged)")
              << "\n";
    if (!sol.converged) {
        std::cerr << "error: Diverged after " << sol.iterations
                  << " iterations (mismatch " << sol.mismatch << " > tolerance " << tol
                  << ")\n";
        return 1;
    }
    if (format == "json") {
        emit(out, pf::solution_to_json(pf_case, sol, cfg).dump(2) + "\n");
    } else {
        const std::string bus_csv =
            pf::bus_rows_csv(pf::bus_rows(pf_case, sol), pf_case.mva_base);
        const std::string branch_csv =
            pf::branch_rows_csv(pf::branch_rows(sol), pf_case.mva_base);
        if (out.empty() || out == "-") {
            std::cout << bus_csv << "\n" << branch_csv;
        } else {
            write_text(out + ".bus.csv", bus_csv);
            write_text(out + ".branch.csv", branch_csv);
        }
    }
    return 0;
}

ordered_json diff_solutions(const cdf::PowerFlowCase& c, const pf::PowerFlowSolution& a,
                            const pf::PowerFlowSolution& b, const std::string& label_a,
                            const std::string& label_b) {
    ordered_json buses = ordered_json::array();
    double max_dv = 0.0, max_da = 0.0;
    for (size_t i = 0; i < c.buses.size(); ++i) {
        const int k = static_cast<int>(i);
        const double dv = a.v_mag(k) - b.v_mag(k);
        const double da = a.v_ang_deg(k) - b.v_ang_deg(k);
        max_dv = std::max(max_dv, std::abs(dv));
        max_da = std::max(max_da, std::abs(da));
        buses.push_back(ordered_json{{"number", c.buses[i].number},
                                     {"dv_mag_pu", dv},
                                     {"dv_ang_deg", da}});
    }
    ordered_json branches = ordered_json::array();
    double max_dp = 0.0, max_dq = 0.0;
    for (size_t k = 0; k < a.branch_flows.size(); ++k) {
        const auto& fa = a.branch_flows[k];
        const auto& fb = b.branch_flows[k];
        const double dp = fa.s_from.real() - fb.s_from.real();
        const double dq = fa.s_from.imag() - fb.s_from.imag();
        max_dp = std::max(max_dp, std::abs(dp));
        max_dq = std::max(max_dq, std::abs(dq));
        branches.push_back(ordered_json{
            {"from", fa.from}, {"to", fa.to}, {"dp_from_pu", dp}, {"dq_from_pu", dq}});
    }
    return ordered_json{{"a", label_a},
                        {"b", label_b},
                        {"max_dv_mag_pu", max_dv},
                        {"max_dv_ang_deg", max_da},
                        {"max_dp_from_pu", max_dp},
                        {"max_dq_from_pu", max_dq},
                        {"buses", std::move(buses)},
                        {"branches", std::move(branches)}};
}

int cmd_compare(const std::string& case_path, double tol, int nr_max_iter,
                int gs_max_iter, const std::string& shift_override,
                const std::string& out) {
    const cdf::PowerFlowCase base_case = load_case(case_path);

    pf::SolverConfig nr_cfg;
    nr_cfg.method = pf::Method::NewtonRaphson;
    nr_cfg.tolerance = tol;
    nr_cfg.max_iter = nr_max_iter;
    pf::SolverConfig gs_cfg;
    gs_cfg.method = pf::Method::GaussSeidel;
    gs_cfg.tolerance = tol;
    gs_cfg.max_iter = gs_max_iter;

    const pf::PowerFlowSolution nr = pf::solve(base_case, nr_cfg);
    const pf::PowerFlowSolution gs = pf::solve(base_case, gs_cfg);
    if (!nr.converged || !gs.converged) {
        std::cerr << "error: " << (!nr.converged ? "Newton-Raphson" : "Gauss-Seidel")
                  << " diverged\n";
        return 1;
    }
    ordered_json doc;
    doc["case"] = base_case.title;
    doc["tolerance"] = tol;
    doc["nr_iterations"] = nr.iterations;
    doc["gs_iterations"] = gs.iterations;
    doc["nr_vs_gs"] = diff_solutions(base_case, nr, gs, "nr", "gs");

    if (!shift_override.empty()) {
        const ShiftOverride ov = parse_shift_override(shift_override);
        cdf::PowerFlowCase variant = base_case;
        cdf::override_phase_shift(variant, ov.from, ov.to, ov.degrees);
        const pf::PowerFlowSolution shifted = pf::solve(variant, nr_cfg);
        if (!shifted.converged) {
            std::cerr << "error: phase-shift variant diverged\n";
            return 1;
        }
        doc["phase_shift_override"] = ordered_json{
            {"from", ov.from}, {"to", ov.to}, {"degrees", ov.degrees}};
        doc["variant_vs_baseline"] =
            diff_solutions(base_case, shifted, nr, "variant", "baseline");
    }
    const auto& diff = doc["nr_vs_gs"];
    std::cerr << "max |dV| = " << diff["max_dv_mag_pu"].get<double>()
              << " pu, max |dAngle| = " << diff["max_dv_ang_deg"].get<double>()
              << " deg, max |dP| = " << diff["max_dp_from_pu"].get<double>() << " pu\n";
    emit(out, doc.dump(2) + "\n");
    return 0;
}

int cmd_sim(const std::string& scenario_path, long steps_override, long seed_override,
            bool have_steps, bool have_seed, const std::string& out_dir) {
    sim::Scenario sc = sim::load_scenario(scenario_path);
    if (have_steps) sc.steps = steps_override;
    if (have_seed) sc.seed = static_cast<std::uint64_t>(seed_override);

    const sim::Trace trace = sim::run(sc);

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text((fs::path(out_dir) / "trace.jsonl").string(), trace.to_jsonl());
        ordered_json util{
            {"utilities", trace.summary.value("utilities", ordered_json::object())},
            {"receipts", trace.summary.value("receipts", ordered_json::object())},
            {"balances", trace.summary.value("balances", ordered_json::object())}};
        write_text((fs::path(out_dir) / "utilities.json").string(), util.dump(2) + "\n");
        write_text((fs::path(out_dir) / "multinet.json").string(),
                   flow::to_json(sim::build_multinetwork(sc)).dump(2) + "\n");
    } else {
        std::cout << trace.to_jsonl();
    }
    if (trace.halted) {
        std::cerr << "error: " << trace.halt_reason << "\n";
        return 1;
    }
    std::cerr << "completed " << trace.steps_completed << " steps\n";
    return 0;
}

ordered_json output_schemas() {
    ordered_json bus_row{{"number", "int"},      {"type", "PQ|PV|Slack"},
                         {"v_mag_pu", "double"}, {"v_ang_deg", "double"},
                         {"p_pu", "double"},     {"q_pu", "double"}};
    ordered_json branch_row{{"from", "int"},         {"to", "int"},
                            {"p_from_pu", "double"}, {"q_from_pu", "double"},
                            {"p_to_pu", "double"},   {"q_to_pu", "double"},
                            {"loss_p_pu", "double"}};
    return ordered_json{
        {"pf_json",
         {{"case", "string"},
          {"mva_base", "double"},
          {"method", "nr|gs"},
          {"tolerance", "double"},
          {"converged", "bool"},
          {"iterations", "int"},
          {"mismatch", "double"},
          {"totals", "object"},
          {"buses", ordered_json::array({bus_row})},
          {"branches", ordered_json::array({branch_row})}}},
        {"pf_csv",
         {{"bus_table", "number,type,v_mag_pu,v_ang_deg,p_pu,q_pu"},
          {"branch_table", "from,to,p_from_pu,q_from_pu,p_to_pu,q_to_pu,loss_p_pu"},
          {"header_comment", "# mva_base=<value>"}}},
        {"compare_json",
         {{"nr_vs_gs", "per-bus dv_mag_pu/dv_ang_deg, per-branch dp_from_pu/dq_from_pu"},
          {"variant_vs_baseline", "same shape, present with --phase-shift-override"}}},
        {"trace_jsonl",
         {{"header", "title, seed, steps_planned, step_seconds, steps_completed, halted"},
          {"step",
           "actions, rejected, sent, deliveries, powerflow{converged, iterations, "
           "mismatch, totals, buses}, transactions, soc, metered_mw, utilities, "
           "flow_violations"},
          {"summary", "balances, receipts, utilities, welfare, ledger_total"}}},
        {"multinet_json",
         {{"networks", "energy|information|payment -> {nodes, edges}"},
          {"agents", "[{id, controlled: [{kind, node}]}]"}}}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled energy/information/payment network simulator"};
    app.set_version_flag("--version", kVersion);
    bool dump_schema = false;
    app.add_flag("--schema", dump_schema, "print the output document schemas and exit");

    auto* pf_cmd = app.add_subcommand("pf", "solve an AC power flow from an IEEE CDF case");
    std::string pf_case_path, pf_method = "nr", pf_shift, pf_out, pf_format = "json";
    double pf_tol = 1e-8;
    int pf_max_iter = 50;
    pf_cmd->add_option("case", pf_case_path, "IEEE common data format file")->required();
    pf_cmd->add_option("--method", pf_method, "nr|gs")
        ->check(CLI::IsMember({"nr", "gs"}));
    pf_cmd->add_option("--tol", pf_tol, "mismatch tolerance, per-unit infinity norm");
    pf_cmd->add_option("--max-iter", pf_max_iter, "iteration limit");
    pf_cmd->add_option("--phase-shift-override", pf_shift,
                       "from,to,degrees transformer phase shift to inject");
    pf_cmd->add_option("--out", pf_out, "output path (default stdout)");
    pf_cmd->add_option("--format", pf_format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));

    auto* cmp_cmd =
        app.add_subcommand("compare", "run Newton-Raphson against Gauss-Seidel and diff");
    std::string cmp_case_path, cmp_shift, cmp_out;
    double cmp_tol = 1e-8;
    int cmp_nr_iter = 50, cmp_gs_iter = 20000;
    cmp_cmd->add_option("case", cmp_case_path, "IEEE common data format file")->required();
    cmp_cmd->add_option("--tol", cmp_tol, "mismatch tolerance for both solvers");
    cmp_cmd->add_option("--max-iter", cmp_nr_iter, "Newton-Raphson iteration limit");
    cmp_cmd->add_option("--gs-max-iter", cmp_gs_iter, "Gauss-Seidel sweep limit");
    cmp_cmd->add_option("--phase-shift-override", cmp_shift,
                        "also solve a from,to,degrees shifted variant and diff it");
    cmp_cmd->add_option("--out", cmp_out, "output path (default stdout)");

    auto* sim_cmd = app.add_subcommand("sim", "run a multi-network scenario");
    std::string sim_scenario, sim_out;
    long sim_steps = 0, sim_seed = 0;
    sim_cmd->add_option("scenario", sim_scenario, "scenario JSON file")->required();
    auto* steps_opt = sim_cmd->add_option("--steps", sim_steps, "override scenario steps");
    auto* seed_opt = sim_cmd->add_option("--seed", sim_seed, "override scenario seed");
    sim_cmd->add_option("--out", sim_out, "output directory (default: trace to stdout)");

    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        if (dump_schema) {
            std::cout << output_schemas().dump(2) << "\n";
            return 0;
        }
        if (pf_cmd->parsed())
            return cmd_pf(pf_case_path, pf_method, pf_tol, pf_max_iter, pf_shift, pf_out,
                          pf_format);
        if (cmp_cmd->parsed())
            return cmd_compare(cmp_case_path, cmp_tol, cmp_nr_iter, cmp_gs_iter, cmp_shift,
                               cmp_out);
        if (sim_cmd->parsed())
            return cmd_sim(sim_scenario, sim_steps, sim_seed, steps_opt->count() > 0,
                           seed_opt->count() > 0, sim_out);
        std::cerr << app.help();
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
