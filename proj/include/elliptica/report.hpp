#pragma once

#include <chrono>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "elliptica/identities.hpp"
#include "elliptica/version.hpp"

namespace elliptica {

using json = nlohmann::ordered_json;

inline json complex_to_json(cplx v) {
    return json{{"re", v.real()}, {"im", v.imag()}};
}

inline json sample_record_to_json(const SampleRecord& r) {
    json params = json::object();
    for (const auto& [k, v] : r.params) params[k] = complex_to_json(v);
    return json{{"index", r.index},
                {"N", r.N},
                {"tau", complex_to_json(r.tau)},
                {"params", params}};
}

inline json check_report_to_json(const CheckReport& r) {
    return json{{"id", r.id},
                {"samples_run", r.samples_run},
                {"max_residual", r.max_residual},
                {"mean_residual", r.mean_residual},
                {"tolerance", r.tolerance},
                {"pass", r.pass},
                {"worst_sample", sample_record_to_json(r.worst_sample)}};
}

/// Everything one `check` invocation needs (CLI RunConfig).
struct RunConfig {
    std::string command = "check";
    std::uint64_t seed = 42;
    std::vector<int> N_list{1, 2, 3};
    std::vector<cplx> tau_values{cplx{0.0, 0.8}};
    int sample_count = 50;
    std::map<std::string, double> tolerance_overrides;
    std::vector<std::string> ids;  // empty: all registered checks
    double pole_guard = 0.05;
    int jobs = 0;  // 0: hardware concurrency
    std::string output_path;
    std::string output_format = "json";

    SamplePlan plan() const {
        SamplePlan p;
        p.seed = seed;
        p.count = sample_count;
        p.N_list = N_list;
        p.tau_list.clear();
        for (cplx t : tau_values) p.tau_list.push_back(Tau(t));
        p.pole_guard = pole_guard;
        p.validate();
        return p;
    }
};

struct SuiteReport {
    std::string version = version_string;
    int schema_version = report_schema_version;
    RunConfig config;
    std::vector<CheckReport> checks;
    bool overall_pass = true;
    double wall_time_ms = 0.0;
};

inline json run_config_to_json(const RunConfig& c) {
    json taus = json::array();
    for (cplx t : c.tau_values) taus.push_back(complex_to_json(t));
    json tol = json::object();
    for (const auto& [k, v] : c.tolerance_overrides) tol[k] = v;
    return json{{"command", c.command},
                {"seed", c.seed},
                {"n_list", c.N_list},
                {"tau_list", taus},
                {"sample_count", c.sample_count},
                {"tolerance_overrides", tol},
                {"ids", c.ids},
                {"pole_guard", c.pole_guard},
                {"output_format", c.output_format}};
}

inline json suite_report_to_json(const SuiteReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back(check_report_to_json(c));
    return json{{"toolkit_version", r.version},
                {"schema_version", r.schema_version},
                {"config", run_config_to_json(r.config)},
                {"checks", checks},
                {"overall_pass", r.overall_pass},
                {"wall_time_ms", r.wall_time_ms}};
}

/// RFC-4180 field quoting.
inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

inline void suite_report_to_csv(const SuiteReport& r, std::ostream& os) {
    os << "id,samples_run,max_residual,mean_residual,tolerance,pass,worst_sample\r\n";
    for (const auto& c : r.checks) {
        std::ostringstream ws;
        ws << sample_record_to_json(c.worst_sample).dump();
        os << csv_escape(c.id) << ',' << c.samples_run << ',' << c.max_residual << ','
           << c.mean_residual << ',' << c.tolerance << ',' << (c.pass ? 1 : 0) << ','
           << csv_escape(ws.str()) << "\r\n";
    }
}

/// Run the selected checks (all by default) under one plan.
inline SuiteReport run_suite(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteReport rep;
    rep.config = cfg;
    const SamplePlan plan = cfg.plan();

    std::vector<const IdentityCheck*> selected;
    if (cfg.ids.empty()) {
        for (const auto& c : registry()) selected.push_back(&c);
    } else {
        for (const auto& id : cfg.ids) selected.push_back(&find_check(id));
    }
    for (const IdentityCheck* chk : selected) {
        std::optional<double> tol;
        if (auto it = cfg.tolerance_overrides.find(chk->id);
            it != cfg.tolerance_overrides.end())
            tol = it->second;
        CheckReport cr = run_check(*chk, plan, tol, cfg.jobs);
        rep.overall_pass = rep.overall_pass && cr.pass;
        rep.checks.push_back(std::move(cr));
    }
    rep.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    return rep;
}

/// Serialized suite report with the wall-time field normalized; the
/// determinism contract is byte-identity of this form.
inline std::string suite_report_dump_stable(const SuiteReport& r) {
    json j = suite_report_to_json(r);
    j["wall_time_ms"] = 0.0;
    return j.dump(2);
}

}
