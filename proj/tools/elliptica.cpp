// elliptica command-line front end: identity suites, Painleve VI runs,
// special-function tables.
//
// Exit codes: 0 pass, 1 check failure, 2 usage error, 3 numerical halt.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "elliptica/painleve.hpp"
#include "elliptica/report.hpp"

namespace {

using namespace elliptica;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumericalHalt = 3;

/// Parse "a+bi" / "a-bi" / "bi" / "a" (no spaces).
cplx parse_complex(const std::string& text) {
    if (text.empty()) throw ConfigError("empty complex literal");
    if (text.back() == 'i' || text.back() == 'I') {
        std::string body = text.substr(0, text.size() - 1);
        // split into real and imaginary parts at the last +/- that is not an
        // exponent sign
        int split = -1;
        for (int i = static_cast<int>(body.size()) - 1; i > 0; --i) {
            const char c = body[static_cast<std::size_t>(i)];
            if ((c == '+' || c == '-') &&
                body[static_cast<std::size_t>(i - 1)] != 'e' &&
                body[static_cast<std::size_t>(i - 1)] != 'E') {
                split = i;
                break;
            }
        }
        try {
            if (split < 0) {
                const std::string im = body.empty() || body == "+" ? "1"
                                       : body == "-"               ? "-1"
                                                                   : body;
                return {0.0, std::stod(im)};
            }
            const std::string re = body.substr(0, static_cast<std::size_t>(split));
            std::string im = body.substr(static_cast<std::size_t>(split));
            if (im == "+") im = "1";
            if (im == "-") im = "-1";
            return {std::stod(re), std::stod(im)};
        } catch (const std::exception&) {
            throw ConfigError("cannot parse complex literal '" + text + "'");
        }
    }
    try {
        return {std::stod(text), 0.0};
    } catch (const std::exception&) {
        throw ConfigError("cannot parse complex literal '" + text + "'");
    }
}

std::vector<cplx> parse_complex_list(const std::string& text) {
    std::vector<cplx> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_complex(item));
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

void write_text(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file '" + path + "'");
    f << content;
}

std::uint64_t default_seed_from_env() {
    if (const char* env = std::getenv("ELLIPTICA_SEED")) {
        try {
            return static_cast<std::uint64_t>(std::stoull(env));
        } catch (const std::exception&) {
            throw ConfigError("ELLIPTICA_SEED is not an integer");
        }
    }
    return 42;
}

int cmd_check(const RunConfig& cfg) {
    const SuiteReport rep = run_suite(cfg);
    std::string payload;
    if (cfg.output_format == "json") {
        payload = suite_report_to_json(rep).dump(2);
        payload += "\n";
    } else {
        std::ostringstream os;
        suite_report_to_csv(rep, os);
        payload = os.str();
    }
    write_text(cfg.output_path, payload);
    if (!cfg.output_path.empty() && cfg.output_path != "-") {
        for (const auto& c : rep.checks)
            std::cerr << (c.pass ? "pass " : "FAIL ") << c.id
                      << "  max_residual=" << c.max_residual << "  tol=" << c.tolerance
                      << "\n";
    }
    return rep.overall_pass ? kExitPass : kExitCheckFailure;
}

int cmd_list() {
    for (const auto& c : registry()) {
        std::cout << c.id << "\n    anchor: " << c.paper_anchor
                  << "\n    params: " << c.arity
                  << "\n    tolerance: " << c.default_tolerance;
        if (!c.allowed_N.empty()) {
            std::cout << "\n    N: ";
            for (std::size_t i = 0; i < c.allowed_N.size(); ++i)
                std::cout << (i ? "," : "") << c.allowed_N[i];
        }
        std::cout << "\n";
    }
    return kExitPass;
}

struct PviOptions {
    int N = 1;
    std::vector<double> nu{0.1, 0.2, 0.3, 0.4};
    cplx tau0{0.0, 0.9};
    cplx tau1{0.0, 1.2};
    std::optional<cplx> u0;
    cplx v0{0.05, 0.0};
    std::vector<cplx> hbars{cplx{0.17, 0.11}, cplx{0.31, 0.0}, cplx{0.0, 0.23}};
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double residual_threshold = 1e-7;
    std::string out_path = "pvi_trajectory.csv";
};

int cmd_pvi(const PviOptions& opt) {
    PVIConstants constants;
    for (int a = 0; a < 4; ++a) constants.nu[static_cast<std::size_t>(a)] = opt.nu[static_cast<std::size_t>(a)];
    // For even N only nu^2 = sum nu_a^2 is effective and the Lax pair holds in
    // its single-constant form; fold the four inputs into one for monitoring.
    double nu_sq = 0.0;
    for (double v : opt.nu) nu_sq += v * v;
    if (opt.N % 2 == 0) constants.nu = {std::sqrt(nu_sq), 0.0, 0.0, 0.0};
    const Tau tau0(opt.tau0);
    const cplx u0 = opt.u0.value_or(0.31 + 0.14 * tau0.value);
    const PVIState initial{u0, opt.v0, tau0};

    StepperConfig cfg;
    cfg.rel_tol = opt.rel_tol;
    cfg.abs_tol = opt.abs_tol;

    const Trajectory traj = integrate(initial, constants, opt.tau1, cfg, opt.N);

    std::ostringstream csv;
    csv << "tau_re,tau_im,u_re,u_im,v_re,v_im";
    for (std::size_t k = 0; k < opt.hbars.size(); ++k) csv << ",residual_h" << k;
    csv << ",local_error,min_pole_dist\r\n";
    double max_residual = 0.0;
    for (const auto& pt : traj.points) {
        csv << pt.tau.real() << ',' << pt.tau.imag() << ',' << pt.u.real() << ','
            << pt.u.imag() << ',' << pt.v.real() << ',' << pt.v.imag();
        const PVIState s{pt.u, pt.v, Tau(pt.tau)};
        for (const cplx h : opt.hbars) {
            const double r = monodromy_residual(s, constants, h, opt.N);
            max_residual = std::max(max_residual, r);
            csv << ',' << r;
        }
        csv << ',' << pt.local_error << ',' << pt.min_pole_distance << "\r\n";
    }
    write_text(opt.out_path, csv.str());

    json summary{{"command", "pvi"},
                 {"N", opt.N},
                 {"steps", traj.points.size() - 1},
                 {"rows", traj.points.size()},
                 {"max_residual", max_residual},
                 {"residual_threshold", opt.residual_threshold},
                 {"halted", traj.halted},
                 {"output", opt.out_path}};
    json nus = json::array();
    for (double v : opt.nu) nus.push_back(v);
    summary["nu"] = nus;
    if (opt.N % 2 == 0) {
        summary["effective_nu_sq"] = nu_sq;
        summary["note"] =
            "even N: the Lax pair represents the single-constant equation "
            "u'' = -nu^2 wp'(u) with nu^2 = sum nu_a^2";
    }
    if (traj.halted) summary["halt_reason"] = traj.halt_reason;
    summary["pass"] = !traj.halted && max_residual < opt.residual_threshold;
    std::cout << summary.dump(2) << "\n";

    if (traj.halted) return kExitNumericalHalt;
    return max_residual < opt.residual_threshold ? kExitPass : kExitCheckFailure;
}

struct TableOptions {
    int nx = 10, ny = 10;
    cplx u{0.3, 0.0};
    cplx tau{0.0, 0.8};
    double guard = 0.05;
    std::string out_path;
};

int cmd_table(const TableOptions& opt) {
    const Tau tau(opt.tau);
    std::ostringstream csv;
    csv << "z_re,z_im,u_re,u_im,phi_re,phi_im,E1_re,E1_im,E2_re,E2_im,wp_re,wp_im,"
           "pole_flag\r\n";
    for (int j = 0; j < opt.nx; ++j) {
        for (int k = 0; k < opt.ny; ++k) {
            const cplx z = static_cast<double>(j) / opt.nx +
                           (static_cast<double>(k) / opt.ny) * tau.value;
            const bool pole = lattice_distance(z, tau) < opt.guard ||
                              lattice_distance(opt.u, tau) < opt.guard;
            cplx phi{0.0}, v1{0.0}, v2{0.0}, vp{0.0};
            if (!pole) {
                phi = kronecker_phi(z, opt.u, tau);
                v1 = e1(z, tau);
                v2 = e2(z, tau);
                vp = wp(z, tau);
            }
            csv << z.real() << ',' << z.imag() << ',' << opt.u.real() << ','
                << opt.u.imag() << ',' << phi.real() << ',' << phi.imag() << ','
                << v1.real() << ',' << v1.imag() << ',' << v2.real() << ',' << v2.imag()
                << ',' << vp.real() << ',' << vp.imag() << ',' << (pole ? 1 : 0)
                << "\r\n";
        }
    }
    write_text(opt.out_path, csv.str());
    return kExitPass;
}

void print_gnuplot_hint() {
    std::cout <<
        R"(# gnuplot recipe for `elliptica table --out table.csv`:
set datafile separator ','
set key autotitle columnhead
plot 'table.csv' using 1:5 with lines title 'Re phi(z,u)'
# and for `elliptica pvi --out pvi_trajectory.csv`:
# plot 'pvi_trajectory.csv' using 2:7 with lines title 'residual vs Im tau'
)";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"elliptica: Baxter-Belavin R-matrix identity suites and "
                 "Painleve VI Lax-pair tools"};
    app.require_subcommand(1);
    bool gnuplot_hint = false;
    app.add_flag("--gnuplot-hint", gnuplot_hint, "print a plotting recipe and exit");

    // ---- check ----
    RunConfig cfg;
    std::string ids_arg, n_arg = "1,2,3", tau_arg = "0.8i";
    std::vector<std::string> tolerance_args;
    auto* check = app.add_subcommand("check", "run identity checks");
    check->add_option("--ids", ids_arg, "comma-separated check ids (default: all)");
    check->add_option("--n", n_arg, "comma-separated N values")->capture_default_str();
    check->add_option("--tau", tau_arg, "comma-separated tau values, e.g. 0.8i,0.5+0.9i")
        ->capture_default_str();
    check->add_option("--count", cfg.sample_count, "samples per check")
        ->capture_default_str();
    std::optional<std::uint64_t> seed_arg;
    check->add_option("--seed", seed_arg, "RNG seed (default 42; env ELLIPTICA_SEED)");
    check->add_option("--tolerance", tolerance_args,
                      "per-check tolerance override, id=value (repeatable)");
    check->add_option("--pole-guard", cfg.pole_guard, "lattice pole guard distance")
        ->capture_default_str();
    check->add_option("--jobs", cfg.jobs, "worker pool size (0: hardware)")
        ->capture_default_str();
    check->add_option("--out", cfg.output_path, "report path (default: stdout)");
    check->add_option("--format", cfg.output_format, "json|csv")->capture_default_str();

    // ---- pvi ----
    PviOptions pvi;
    std::string nu_arg = "0.1,0.2,0.3,0.4", tau0_arg = "0.9i", tau1_arg = "1.2i";
    std::string u0_arg, v0_arg = "0.05", hbars_arg;
    auto* pvic = app.add_subcommand("pvi", "integrate Painleve VI and monitor the "
                                           "monodromy-preservation residual");
    pvic->add_option("--n", pvi.N, "matrix size parameter N")->capture_default_str();
    pvic->add_option("--nu", nu_arg, "four constants nu0..nu3")->capture_default_str();
    pvic->add_option("--tau0", tau0_arg, "start of the tau path")->capture_default_str();
    pvic->add_option("--tau1", tau1_arg, "end of the tau path")->capture_default_str();
    pvic->add_option("--u0", u0_arg, "initial u (default 0.31 + 0.14 tau0)");
    pvic->add_option("--v0", v0_arg, "initial v = du/dtau")->capture_default_str();
    pvic->add_option("--hbar", hbars_arg,
                     "comma-separated spectral points for residual monitoring");
    pvic->add_option("--rel-tol", pvi.rel_tol, "integrator relative tolerance")
        ->capture_default_str();
    pvic->add_option("--abs-tol", pvi.abs_tol, "integrator absolute tolerance")
        ->capture_default_str();
    pvic->add_option("--residual-threshold", pvi.residual_threshold,
                     "pass/fail bound on the monodromy residual")
        ->capture_default_str();
    pvic->add_option("--out", pvi.out_path, "trajectory CSV path")->capture_default_str();

    // ---- table ----
    TableOptions tab;
    std::string tab_tau_arg = "0.8i", tab_u_arg = "0.3";
    auto* tabc = app.add_subcommand("table", "dump a phi/E1/E2/wp grid as CSV");
    tabc->add_option("--nx", tab.nx, "grid points along 1")->capture_default_str();
    tabc->add_option("--ny", tab.ny, "grid points along tau")->capture_default_str();
    tabc->add_option("--u", tab_u_arg, "second phi argument")->capture_default_str();
    tabc->add_option("--tau", tab_tau_arg, "modulus")->capture_default_str();
    tabc->add_option("--pole-guard", tab.guard, "flag rows this close to the lattice")
        ->capture_default_str();
    tabc->add_option("--out", tab.out_path, "CSV path (default: stdout)");

    auto* listc = app.add_subcommand("list", "list registered checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    if (gnuplot_hint) {
        print_gnuplot_hint();
        return kExitPass;
    }

    try {
        if (check->parsed()) {
            cfg.command = "check";
            cfg.seed = seed_arg.value_or(default_seed_from_env());
            if (!ids_arg.empty()) {
                std::stringstream ss(ids_arg);
                std::string id;
                while (std::getline(ss, id, ',')) cfg.ids.push_back(id);
                for (const auto& id : cfg.ids) find_check(id);  // validate early
            }
            cfg.N_list.clear();
            for (cplx v : parse_complex_list(n_arg)) {
                const int n = static_cast<int>(v.real());
                if (v.imag() != 0.0 || static_cast<double>(n) != v.real())
                    throw ConfigError("--n expects integers");
                cfg.N_list.push_back(n);
            }
            cfg.tau_values = parse_complex_list(tau_arg);
            for (const auto& t : tolerance_args) {
                const auto eq = t.find('=');
                if (eq == std::string::npos)
                    throw ConfigError("--tolerance expects id=value, got '" + t + "'");
                const std::string id = t.substr(0, eq);
                find_check(id);
                cfg.tolerance_overrides[id] = std::stod(t.substr(eq + 1));
            }
            if (cfg.output_format != "json" && cfg.output_format != "csv")
                throw ConfigError("--format must be json or csv");
            return cmd_check(cfg);
        }
        if (pvic->parsed()) {
            pvi.nu.clear();
            for (cplx v : parse_complex_list(nu_arg)) pvi.nu.push_back(v.real());
            if (pvi.nu.size() != 4) throw ConfigError("--nu expects four values");
            pvi.tau0 = parse_complex(tau0_arg);
            pvi.tau1 = parse_complex(tau1_arg);
            if (!u0_arg.empty()) pvi.u0 = parse_complex(u0_arg);
            pvi.v0 = parse_complex(v0_arg);
            if (!hbars_arg.empty()) pvi.hbars = parse_complex_list(hbars_arg);
            return cmd_pvi(pvi);
        }
        if (tabc->parsed()) {
            tab.u = parse_complex(tab_u_arg);
            tab.tau = parse_complex(tab_tau_arg);
            return cmd_table(tab);
        }
        if (listc->parsed()) return cmd_list();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const PoleError& e) {
        std::cerr << "numerical halt: " << e.what() << "\n";
        return kExitNumericalHalt;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericalHalt;
    }
    return kExitUsage;
}
