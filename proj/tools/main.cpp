#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "experiments.hpp"

namespace cli = csnewton::cli;

namespace {

// Flat "key = value" file; '#' starts a comment. Keys are long option names
// without the leading dashes. Command-line values win over file values.
std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw cli::UsageError("cannot read config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t\r"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
        return s;
    };
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw cli::UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_config(CLI::App& sub, const std::string& path) {
    if (path.empty()) return;
    for (const auto& [key, value] : read_config(path)) {
        CLI::Option* opt = nullptr;
        try {
            opt = sub.get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw cli::UsageError("unknown config key '" + key + "'");
        }
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
    }
}

// Echo of every option value actually in effect, for the manifest.
nlohmann::json echo_options(const CLI::App& sub) {
    nlohmann::json j = nlohmann::json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
        if (name == "help" || name == "config") continue;
        const auto& res = opt->results();
        if (!res.empty()) {
            j[name] = res.back();
        } else if (!opt->get_default_str().empty()) {
            j[name] = opt->get_default_str();
        }
    }
    return j;
}

template <class T>
void add_optional(CLI::App& app, const std::string& name, std::optional<T>& target, const std::string& desc) {
    app.add_option_function<T>(name, [&target](const T& v) { target = v; }, desc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Complex-step Newton solvers: convergence scans, stiff ODEs and DNLS lattices"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_version_flag("--version", std::string(csnewton::kVersion));
    app.require_subcommand(1);

    // rate-scan
    cli::RateScanOptions rs;
    std::string rs_config;
    std::string rs_x0;
    auto* rate = app.add_subcommand("rate-scan", "Newton iteration counts and rate estimates over a grid of h");
    rate->add_option("--variant", rs.variant, "scalar | jacobian | jfnk")->capture_default_str();
    rate->add_option("--problem", rs.problem, "scalar | system")->capture_default_str();
    rate->add_option("--h-grid", rs.h_grid, "reciprocal | list:a,b,... | geometric:lo,hi,count")->capture_default_str();
    rate->add_option("--cap-n", rs.cap_n, "largest n for the reciprocal grid h = 2/n")->capture_default_str();
    rate->add_option("--tol", rs.tol, "stopping tolerance on the error")->capture_default_str();
    rate->add_option("--inner-tol", rs.inner_tol, "GMRES relative tolerance (jfnk)")->capture_default_str();
    rate->add_option("--max-iter", rs.max_iter, "Newton iteration cap")->capture_default_str();
    rate->add_option("--x0", rs_x0, "starting point, comma separated (default 2.5)");
    rate->add_option("--workers", rs.workers, "worker threads")->capture_default_str();
    rate->add_option("--out", rs.out, "CSV output path (stdout when omitted)");
    rate->add_option("--config", rs_config, "key = value config file");

    // ode
    cli::OdeOptions od;
    std::string od_config;
    auto* ode = app.add_subcommand("ode", "Integrate a test ODE with the two-stage Gauss-Legendre method");
    ode->add_option("--problem", od.problem, "stiff | olsen")->capture_default_str();
    add_optional(*ode, "--dt", od.dt, "step size (problem default when omitted)");
    add_optional(*ode, "--t-end", od.t_end, "final time (problem default when omitted)");
    ode->add_option("--h", od.h, "complex step")->capture_default_str();
    ode->add_option("--tol", od.tol, "Newton step tolerance")->capture_default_str();
    ode->add_option("--inner-tol", od.inner_tol, "GMRES relative tolerance")->capture_default_str();
    ode->add_option("--max-iter", od.max_iter, "Newton iteration cap per step")->capture_default_str();
    ode->add_option("--out", od.out, "output file prefix")->capture_default_str();
    ode->add_option("--config", od_config, "key = value config file");

    // dnls
    cli::DnlsOptions dn;
    std::string dn_config;
    auto* dnls = app.add_subcommand("dnls", "DNLS lattice: steady soliton and its time evolution");
    dnls->add_option("--mode", dn.mode, "ground | evolve")->capture_default_str();
    dnls->add_option("--N", dn.N, "lattice sites")->capture_default_str();
    dnls->add_option("--omega", dn.omega, "frequency")->capture_default_str();
    add_optional(*dnls, "--n0", dn.n0, "soliton centre, 1-based (default N/2)");
    dnls->add_option("--h", dn.h, "complex step")->capture_default_str();
    dnls->add_option("--tol", dn.tol, "Newton step tolerance")->capture_default_str();
    dnls->add_option("--inner-tol", dn.inner_tol, "GMRES relative tolerance")->capture_default_str();
    dnls->add_option("--max-iter", dn.max_iter, "Newton iteration cap")->capture_default_str();
    dnls->add_option("--dt", dn.dt, "time step (evolve)")->capture_default_str();
    dnls->add_option("--t-end", dn.t_end, "final time (evolve)")->capture_default_str();
    dnls->add_option("--out", dn.out, "output file prefix")->capture_default_str();
    dnls->add_option("--config", dn_config, "key = value config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kExitUsage;
    }

    try {
        cli::Manifest manifest;
        if (rate->parsed()) {
            apply_config(*rate, rs_config);
            if (!rs_x0.empty()) rs.x0 = cli::parse_list(rs_x0);
            manifest.command = "rate-scan";
            manifest.config = echo_options(*rate);
            return cli::cmd_rate_scan(rs, manifest);
        }
        if (ode->parsed()) {
            apply_config(*ode, od_config);
            manifest.command = "ode";
            manifest.config = echo_options(*ode);
            return cli::cmd_ode(od, manifest);
        }
        apply_config(*dnls, dn_config);
        manifest.command = "dnls";
        manifest.config = echo_options(*dnls);
        return cli::cmd_dnls(dn, manifest);
    } catch (const cli::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return cli::kExitUsage;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return cli::kExitUsage;
    } catch (const csnewton::InvalidArgument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return cli::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kExitNonConvergence;
    }
}
