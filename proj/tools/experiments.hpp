#pragma once

// Experiment drivers behind the csnewton command-line tool. Each cmd_*
// function validates its options, runs the solves, writes CSV files plus a
// JSON manifest and returns the process exit code.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "csnewton/csnewton.hpp"

namespace csnewton::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNonConvergence = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// 17 significant digits: round-trips every double.
[[nodiscard]] inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[nodiscard]] inline double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw UsageError("not a number: '" + s + "'");
    }
    if (pos != s.size()) throw UsageError("not a number: '" + s + "'");
    return v;
}

[[nodiscard]] inline std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(parse_double(item));
    }
    return out;
}

// Grid forms:
//   "list:a,b,c" or "a,b,c"    explicit values
//   "geometric:lo,hi,count"    count points log-spaced from lo to hi
//   "reciprocal"               h = 2/n for n = 1..cap_n
[[nodiscard]] inline std::vector<double> parse_h_grid(const std::string& text, std::size_t cap_n) {
    std::vector<double> grid;
    if (text == "reciprocal") {
        if (cap_n == 0) throw UsageError("--cap-n must be positive");
        grid.reserve(cap_n);
        for (std::size_t n = 1; n <= cap_n; ++n) grid.push_back(2.0 / static_cast<double>(n));
    } else if (text.rfind("geometric:", 0) == 0) {
        const auto v = parse_list(text.substr(10));
        if (v.size() != 3) throw UsageError("geometric grid needs lo,hi,count");
        const double lo = v[0];
        const double hi = v[1];
        const double count = v[2];
        if (!(lo > 0.0) || !(hi >= lo)) throw UsageError("geometric grid needs 0 < lo <= hi");
        if (count < 1 || count != std::floor(count)) throw UsageError("geometric grid count must be a positive integer");
        const auto c = static_cast<std::size_t>(count);
        for (std::size_t i = 0; i < c; ++i) {
            const double f = c == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(c - 1);
            grid.push_back(i + 1 == c ? hi : lo * std::pow(hi / lo, f));
        }
    } else {
        grid = parse_list(text.rfind("list:", 0) == 0 ? text.substr(5) : text);
    }
    if (grid.empty()) throw UsageError("empty h grid");
    for (double h : grid)
        if (!(h > 0.0) || !std::isfinite(h)) throw UsageError("grid values must be positive and finite");
    return grid;
}

// ---------------------------------------------------------------- manifest

struct Manifest {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    std::time_t started = std::time(nullptr);

    void write(const std::string& path, int exit_code) const {
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&started));
        nlohmann::json j;
        j["command"] = command;
        j["version"] = kVersion;
        j["config"] = config;
        j["started_utc"] = stamp;
        j["duration_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        j["outputs"] = outputs;
        j["exit_code"] = exit_code;
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot write " + path);
        os << j.dump(2) << '\n';
    }
};

inline std::ofstream open_output(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    return os;
}

// ---------------------------------------------------------------- rate-scan

enum class Variant { Scalar, Jacobian, Jfnk };

[[nodiscard]] inline Variant parse_variant(const std::string& s) {
    if (s == "scalar") return Variant::Scalar;
    if (s == "jacobian") return Variant::Jacobian;
    if (s == "jfnk") return Variant::Jfnk;
    throw UsageError("unknown variant '" + s + "' (scalar|jacobian|jfnk)");
}

struct RateScanOptions {
    std::string variant = "scalar";
    // "scalar" (f(x) = x(e^{x/2}+1)) or "system" (two decoupled copies).
    std::string problem = "scalar";
    std::vector<double> h_values;  // overrides h_grid when non-empty
    std::string h_grid = "reciprocal";
    std::size_t cap_n = 10000;
    double tol = 1e-14;
    double inner_tol = 1e-14;
    std::size_t max_iter = 100;
    std::vector<double> x0;  // empty: 2.5 in every component
    std::size_t workers = 1;
    std::string out;  // empty or "-": stdout
};

struct RateRow {
    double h = 0.0;
    std::size_t iterations = 0;
    double final_error = 0.0;
    std::optional<double> rate;
    std::optional<std::size_t> inner_total;
    std::string status;

    [[nodiscard]] bool ok() const { return status == "converged"; }
};

[[nodiscard]] inline RateRow rate_scan_row(Variant variant, const std::string& problem, const std::vector<double>& x0,
                                           double h, const RateScanOptions& opt) {
    RateRow row;
    row.h = h;
    try {
        NewtonConfig cfg;
        cfg.h = CsStep(h);
        cfg.step_tol = opt.tol;
        cfg.max_iter = opt.max_iter;
        cfg.known_root = RVector(x0.size(), 0.0);
        cfg.inner.rel_tol = opt.inner_tol;

        SolveReport rep;
        if (variant == Variant::Scalar) {
            rep = scalar_cs_newton(problems::scalar_test_fn(), x0[0], cfg);
        } else {
            const AnalyticMap F = problem == "system" ? problems::uncoupled_system() : problems::scalar_as_system();
            rep = variant == Variant::Jacobian ? jacobian_cs_newton(F, x0, cfg) : jfnk_cs_newton(F, x0, cfg);
            if (variant == Variant::Jfnk) row.inner_total = rep.total_inner_iterations();
        }
        row.iterations = rep.iterations;
        row.final_error = rep.error_history.back();
        row.rate = rep.rate_estimate;
        row.status = rep.converged ? "converged" : "max_iter";
    } catch (const SolverError& e) {
        row.status = std::string("error: ") + e.what();
    }
    return row;
}

[[nodiscard]] inline std::vector<RateRow> rate_scan(const RateScanOptions& opt) {
    const Variant variant = parse_variant(opt.variant);
    if (opt.problem != "scalar" && opt.problem != "system") throw UsageError("unknown problem '" + opt.problem + "' (scalar|system)");
    if (variant == Variant::Scalar && opt.problem != "scalar") throw UsageError("the scalar variant needs --problem scalar");
    if (!(opt.tol > 0.0)) throw UsageError("--tol must be positive");
    if (!(opt.inner_tol > 0.0)) throw UsageError("--inner-tol must be positive");
    if (opt.max_iter == 0) throw UsageError("--max-iter must be positive");

    const std::size_t dim = opt.problem == "system" ? 2 : 1;
    std::vector<double> x0 = opt.x0;
    if (x0.empty()) x0.assign(dim, 2.5);
    if (x0.size() == 1 && dim == 2) x0.assign(2, x0[0]);
    if (x0.size() != dim) throw UsageError("--x0 must have " + std::to_string(dim) + " component(s)");

    const std::vector<double> grid = opt.h_values.empty() ? parse_h_grid(opt.h_grid, opt.cap_n) : opt.h_values;
    for (double h : grid)
        if (!(h > 0.0) || !std::isfinite(h)) throw UsageError("h values must be positive and finite");

    std::vector<RateRow> rows(grid.size());
    const std::size_t workers = std::clamp<std::size_t>(opt.workers, 1, grid.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++)
            rows[i] = rate_scan_row(variant, opt.problem, x0, grid[i], opt);
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return rows;
}

inline void write_rate_csv(std::ostream& os, const std::vector<RateRow>& rows) {
    os << "h,iterations,final_error,rate_estimate,inner_iteration_total,status\n";
    for (const auto& r : rows) {
        os << fmt(r.h) << ',' << r.iterations << ',' << fmt(r.final_error) << ',' << (r.rate ? fmt(*r.rate) : "")
           << ',' << (r.inner_total ? std::to_string(*r.inner_total) : "") << ',' << r.status << '\n';
    }
}

inline int cmd_rate_scan(const RateScanOptions& opt, Manifest manifest) {
    const std::vector<RateRow> rows = rate_scan(opt);
    const bool all_ok = std::all_of(rows.begin(), rows.end(), [](const RateRow& r) { return r.ok(); });
    const int code = all_ok ? kExitOk : kExitNonConvergence;
    if (opt.out.empty() || opt.out == "-") {
        write_rate_csv(std::cout, rows);
    } else {
        auto os = open_output(opt.out);
        write_rate_csv(os, rows);
        manifest.outputs.push_back(opt.out);
        manifest.write(opt.out + ".manifest.json", code);
    }
    if (!all_ok) {
        for (const auto& r : rows)
            if (!r.ok()) std::cerr << "rate-scan: h=" << fmt(r.h) << ": " << r.status << '\n';
    }
    return code;
}

// ---------------------------------------------------------------- ode

struct OdeOptions {
    std::string problem = "stiff";  // stiff | olsen
    std::optional<double> dt;       // problem default when unset
    std::optional<double> t_end;
    double h = 0.1;
    double tol = 1e-12;
    double inner_tol = 1e-12;
    std::size_t max_iter = 100;
    std::string out = "ode";  // file prefix
};

[[nodiscard]] inline OdeProblem make_ode(const OdeOptions& opt) {
    if (opt.dt && !(*opt.dt > 0.0)) throw UsageError("--dt must be positive");
    if (!(opt.h > 0.0) || !std::isfinite(opt.h)) throw UsageError("--h must be positive");
    if (!(opt.tol > 0.0) || !(opt.inner_tol > 0.0)) throw UsageError("tolerances must be positive");
    OdeProblem p;
    if (opt.problem == "stiff") {
        p = problems::stiff_ode();
    } else if (opt.problem == "olsen") {
        p = problems::olsen_system();
    } else {
        throw UsageError("unknown problem '" + opt.problem + "' (stiff|olsen)");
    }
    if (opt.dt) p.dt = *opt.dt;
    if (opt.t_end) p.t_end = *opt.t_end;
    if (!(p.t_end > p.t0)) throw UsageError("--t-end must exceed the start time");
    return p;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
    os << 't';
    const std::size_t n = tr.states.front().size();
    for (std::size_t i = 0; i < n; ++i) os << ",y" << i + 1;
    os << '\n';
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        os << fmt(tr.times[k]);
        for (double v : tr.states[k]) os << ',' << fmt(v);
        os << '\n';
    }
}

inline void write_steps_csv(std::ostream& os, const std::vector<IrkStepReport>& reports) {
    os << "step,newton_iters,max_gmres_iters\n";
    for (std::size_t k = 0; k < reports.size(); ++k)
        os << k + 1 << ',' << reports[k].newton_iterations << ',' << reports[k].max_inner_iterations() << '\n';
}

inline int cmd_ode(const OdeOptions& opt, Manifest manifest) {
    const OdeProblem prob = make_ode(opt);
    NewtonConfig cfg;
    cfg.h = CsStep(opt.h);
    cfg.step_tol = opt.tol;
    cfg.max_iter = opt.max_iter;
    cfg.inner.rel_tol = opt.inner_tol;

    int code = kExitOk;
    Trajectory tr;
    try {
        tr = integrate(prob, cfg);
    } catch (const StageSolveFailure& e) {
        std::cerr << "ode: " << e.what() << '\n';
        code = kExitNonConvergence;
    }
    const std::string traj_path = opt.out + "_trajectory.csv";
    const std::string steps_path = opt.out + "_steps.csv";
    if (code == kExitOk) {
        auto ts = open_output(traj_path);
        write_trajectory_csv(ts, tr);
        auto ss = open_output(steps_path);
        write_steps_csv(ss, tr.step_reports);
        manifest.outputs = {traj_path, steps_path};
    }
    manifest.write(opt.out + "_manifest.json", code);
    return code;
}

// ---------------------------------------------------------------- dnls

struct DnlsOptions {
    std::string mode = "ground";  // ground | evolve
    std::size_t N = 200;
    double omega = 0.1;
    std::optional<std::size_t> n0;  // N/2 when unset
    double h = 0.05;
    double tol = 1e-12;
    double inner_tol = 1e-6;
    std::size_t max_iter = 100;
    double dt = 0.1;
    double t_end = 100.0;
    std::string out = "dnls";
};

// Norms below this mean the Newton iteration fell into the trivial root.
inline constexpr double kTrivialRootNorm = 1e-3;

struct GroundState {
    SolveReport report;
    double P = 0.0;
    double H = 0.0;

    [[nodiscard]] bool ok() const { return report.converged && P >= kTrivialRootNorm; }
};

[[nodiscard]] inline problems::DnlsParams dnls_params(const DnlsOptions& opt) {
    if (opt.N == 0) throw UsageError("--N must be positive");
    if (!(opt.h > 0.0) || !std::isfinite(opt.h)) throw UsageError("--h must be positive");
    if (!(opt.tol > 0.0) || !(opt.inner_tol > 0.0)) throw UsageError("tolerances must be positive");
    problems::DnlsParams p;
    p.N = opt.N;
    p.omega = opt.omega;
    p.n0 = opt.n0.value_or(std::max<std::size_t>(1, opt.N / 2));
    if (p.n0 < 1 || p.n0 > p.N) throw UsageError("--n0 must lie in [1, N]");
    return p;
}

[[nodiscard]] inline NewtonConfig dnls_newton_config(const DnlsOptions& opt) {
    NewtonConfig cfg;
    cfg.h = CsStep(opt.h);
    cfg.step_tol = opt.tol;
    cfg.max_iter = opt.max_iter;
    cfg.inner.rel_tol = opt.inner_tol;
    return cfg;
}

[[nodiscard]] inline GroundState solve_ground_state(const problems::DnlsParams& p, const NewtonConfig& cfg) {
    GroundState g;
    g.report = jfnk_cs_newton(problems::dnls_steady_residual(p), problems::dnls_initial_guess(p), cfg);
    const auto s = problems::LatticeState::from_stacked(g.report.solution());
    g.P = problems::dnls_norm(s);
    g.H = problems::dnls_hamiltonian(s);
    return g;
}

inline void write_lattice_csv(std::ostream& os, std::span<const double> stacked) {
    const auto s = problems::LatticeState::from_stacked(stacked);
    os << "n,R,I\n";
    for (std::size_t j = 0; j < s.size(); ++j) os << j + 1 << ',' << fmt(s.R[j]) << ',' << fmt(s.I[j]) << '\n';
}

inline int cmd_dnls(const DnlsOptions& opt, Manifest manifest) {
    if (opt.mode != "ground" && opt.mode != "evolve") throw UsageError("unknown mode '" + opt.mode + "' (ground|evolve)");
    const problems::DnlsParams p = dnls_params(opt);
    if (opt.mode == "evolve" && (!(opt.dt > 0.0) || !(opt.t_end > 0.0))) throw UsageError("--dt and --t-end must be positive");
    const NewtonConfig cfg = dnls_newton_config(opt);

    const GroundState ground = solve_ground_state(p, cfg);
    manifest.config["ground_newton_iterations"] = ground.report.iterations;
    manifest.config["ground_P"] = ground.P;
    manifest.config["ground_H"] = ground.H;
    if (!ground.ok()) {
        std::cerr << "dnls: ground state solve failed (converged=" << ground.report.converged << ", P=" << fmt(ground.P)
                  << ")\n";
        manifest.write(opt.out + "_manifest.json", kExitNonConvergence);
        return kExitNonConvergence;
    }

    if (opt.mode == "ground") {
        const std::string state_path = opt.out + "_state.csv";
        const std::string summary_path = opt.out + "_summary.csv";
        auto ss = open_output(state_path);
        write_lattice_csv(ss, ground.report.solution());
        auto sm = open_output(summary_path);
        sm << "quantity,value\n"
           << "P," << fmt(ground.P) << '\n'
           << "H," << fmt(ground.H) << '\n'
           << "newton_iterations," << ground.report.iterations << '\n'
           << "gmres_iterations," << ground.report.total_inner_iterations() << '\n';
        manifest.outputs = {state_path, summary_path};
        manifest.write(opt.out + "_manifest.json", kExitOk);
        return kExitOk;
    }

    const OdeProblem prob = problems::dnls_evolution(p, ground.report.solution(), opt.dt, opt.t_end);
    const std::string series_path = opt.out + "_series.csv";
    const std::string final_path = opt.out + "_final.csv";
    auto series = open_output(series_path);
    series << "t,P,H,abs_dP,abs_dH,newton_iters,max_gmres_iters\n";
    const double P0 = ground.P;
    const double H0 = ground.H;
    series << fmt(prob.t0) << ',' << fmt(P0) << ',' << fmt(H0) << ",0,0,0,0\n";

    int code = kExitOk;
    Trajectory tr;
    try {
        tr = integrate(prob, cfg, [&](std::size_t, double t, std::span<const double> y, const IrkStepReport& rep) {
            const auto s = problems::LatticeState::from_stacked(y);
            const double P = problems::dnls_norm(s);
            const double H = problems::dnls_hamiltonian(s);
            series << fmt(t) << ',' << fmt(P) << ',' << fmt(H) << ',' << fmt(std::abs(P - P0)) << ','
                   << fmt(std::abs(H - H0)) << ',' << rep.newton_iterations << ',' << rep.max_inner_iterations() << '\n';
        });
    } catch (const StageSolveFailure& e) {
        std::cerr << "dnls: " << e.what() << '\n';
        code = kExitNonConvergence;
    }
    manifest.outputs = {series_path};
    if (code == kExitOk) {
        auto fs = open_output(final_path);
        write_lattice_csv(fs, tr.states.back());
        manifest.outputs.push_back(final_path);
    }
    manifest.write(opt.out + "_manifest.json", code);
    return code;
}

}  // namespace csnewton::cli
