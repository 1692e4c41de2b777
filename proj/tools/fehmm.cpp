// fehmm command-line driver.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fehmm/fehmm.hpp"

namespace fs = std::filesystem;
using fehmm::config::json;

namespace {

struct Common {
    std::string config_path;
    std::string out_dir;
    int threads = 0;
    bool timing = false;
    bool verbose = false;
    bool quiet = false;
};

fehmm::config::RunConfig load(const Common& o) {
    if (o.config_path.empty()) throw fehmm::InputError("--config is required");
    return fehmm::config::load_config(o.config_path);
}

int threads_of(const Common& o) { return o.threads > 0 ? o.threads : fehmm::default_threads(); }

fs::path output_dir(const Common& o, const fehmm::config::RunConfig& c) {
    fs::path dir = o.out_dir.empty() ? fs::path(c.output.dir) : fs::path(o.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw fehmm::InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw fehmm::InputError("cannot write '" + p.string() + "'");
    return out;
}

void write_json(const fs::path& p, const json& j) {
    auto out = open_out(p);
    out << j.dump(2) << '\n';
}

void write_manifest(const fs::path& dir, const fehmm::config::RunConfig& c) {
    write_json(dir / "manifest.json", fehmm::config::manifest(c));
}

json summary_of(const fehmm::config::RunConfig& c, const fehmm::MacroTrajectory& traj) {
    json s;
    s["run_id"] = fehmm::config::run_id(c);
    s["final_time"] = traj.final_time();
    s["states"] = traj.states.size();
    s["cache_hits"] = traj.cache_hits;
    s["cache_misses"] = traj.cache_misses;
    s["resolved"] = traj.resolved;
    if (!traj.note.empty()) s["note"] = traj.note;
    if (auto u = fehmm::config::exact_fn(c, false)) {
        const auto e = fehmm::analysis::errors_vs_exact(traj, *u, fehmm::config::exact_fn(c, true));
        s["err_l2"] = e.err_l2;
        s["err_h1"] = e.err_h1;
        s["err_triple"] = e.err_triple;
        s["exact_l2"] = e.exact_l2;
    }
    return s;
}

int cmd_homogenize(const Common& o, std::optional<double> t, std::optional<double> x) {
    const auto c = load(o);
    const auto m = fehmm::config::to_macro(c, threads_of(o));
    const double tt = t.value_or(0.0);
    const double xx = x.value_or(0.5 * (c.problem.a + c.problem.b));
    const auto oracle = fehmm::micro::a0_oracle_periodic(m.coefficient, tt, xx, m.oracle);
    const auto ahh = fehmm::micro::assemble_Ahh(m.cell(tt, xx));
    using fehmm::analysis::format_double;
    std::cout << "a0_oracle " << format_double(oracle.a0) << '\n';
    json out;
    out["t"] = tt;
    out["x"] = xx;
    out["a0_oracle"] = oracle.a0;
    out["oracle_periods"] = oracle.periods;
    const auto& cf = m.coefficient;
    if (!cf.depends_on_t() && !cf.depends_on_x() && !cf.depends_on_s()) {
        const double hm = fehmm::coeff::harmonic_mean_1d(cf, 4 * m.oracle.n_y);
        std::cout << "harmonic_mean " << format_double(hm) << '\n';
        out["harmonic_mean"] = hm;
    }
    std::cout << "a_hh " << format_double(ahh.scalar()) << '\n';
    out["a_hh"] = ahh.scalar();
    const auto dir = output_dir(o, c);
    write_manifest(dir, c);
    write_json(dir / "homogenize.json", out);
    return 0;
}

int cmd_cell(const Common& o, std::optional<double> t, std::optional<double> x) {
    const auto c = load(o);
    const auto m = fehmm::config::to_macro(c, 1);
    const double tt = t.value_or(0.0);
    const double xx = x.value_or(m.space().mesh().barycenter(0));
    const auto sol = fehmm::micro::solve_cell(m.cell(tt, xx));
    const auto dir = output_dir(o, c);
    write_manifest(dir, c);
    auto out = open_out(dir / "cell.csv");
    fehmm::analysis::write_cell(out, sol);
    std::cout << "a_hh " << fehmm::analysis::format_double(fehmm::micro::homogenized_from(sol).scalar()) << '\n';
    return 0;
}

int cmd_solve(const Common& o) {
    const auto c = load(o);
    const auto traj = fehmm::macro::run_hmm(fehmm::config::to_macro(c, threads_of(o)));
    const auto dir = output_dir(o, c);
    write_manifest(dir, c);
    auto out = open_out(dir / "trajectory.csv");
    fehmm::analysis::write_trajectory(out, traj);
    const json s = summary_of(c, traj);
    write_json(dir / "summary.json", s);
    if (!o.quiet) std::cout << s.dump(2) << '\n';
    return 0;
}

int cmd_fine(const Common& o) {
    const auto c = load(o);
    const auto traj = fehmm::fine::run_fine(fehmm::config::to_fine(c));
    const auto dir = output_dir(o, c);
    write_manifest(dir, c);
    auto out = open_out(dir / "trajectory.csv");
    fehmm::analysis::write_trajectory(out, traj);
    const json s = summary_of(c, traj);
    write_json(dir / "summary.json", s);
    if (!o.quiet) std::cout << s.dump(2) << '\n';
    return 0;
}

int run_sweep_to(const Common& o, const fehmm::config::RunConfig& c, bool ehmm_only, const std::string& stem) {
    fehmm::config::DriverOptions opt;
    opt.threads = threads_of(o);
    opt.timing = o.timing;
    opt.ehmm_only = ehmm_only;
    const auto rep = fehmm::config::run_sweep(c, opt);
    const auto dir = output_dir(o, c);
    write_manifest(dir, c);
    {
        auto out = open_out(dir / (stem + ".csv"));
        fehmm::analysis::write_records(out, rep.records);
    }
    write_json(dir / "report.json", rep.report);
    if (!o.quiet) fehmm::analysis::write_records(std::cout, rep.records);
    return 0;
}

int cmd_convergence(const Common& o) { return run_sweep_to(o, load(o), false, "convergence"); }

int cmd_ehmm(const Common& o) { return run_sweep_to(o, load(o), true, "ehmm"); }

int cmd_preset(Common o, const std::string& name, bool write_only) {
    const auto c = fehmm::config::preset(name);
    if (write_only) {
        const auto dir = output_dir(o, c);
        write_manifest(dir, c);
        std::cout << (dir / "manifest.json").string() << '\n';
        return 0;
    }
    const bool fine = c.sweep && c.sweep->solver == "fine";
    return run_sweep_to(o, c, false, fine ? "stagnation" : "convergence");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FE-HMM for one-dimensional parabolic multiscale problems"};
    app.require_subcommand(1);
    Common o;
    const auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* cfg = sub->add_option("-c,--config", o.config_path, "JSON run configuration");
        if (needs_config) cfg->required();
        sub->add_option("-o,--out", o.out_dir, "output directory (overrides output.dir)");
        sub->add_option("--threads", o.threads, "worker threads (default: HMM_THREADS or 1)")->check(CLI::PositiveNumber);
        sub->add_flag("--timing", o.timing, "record wall-clock times in CSV output");
        sub->add_flag("-v,--verbose", o.verbose, "log progress to stderr");
        sub->add_flag("-q,--quiet", o.quiet, "print nothing but errors");
    };
    std::optional<double> t, x;
    auto* homogenize = app.add_subcommand("homogenize", "print the oracle A0, and A_{H,h}, at one point (t, x)");
    add_common(homogenize, true);
    homogenize->add_option("--t", t, "macro time (default 0)");
    homogenize->add_option("--x", x, "macro position (default: domain midpoint)");

    auto* cell = app.add_subcommand("cell", "solve one cell problem and dump eta_{h,k} as CSV");
    add_common(cell, true);
    cell->add_option("--t", t, "macro time t_n (default 0)");
    cell->add_option("--x", x, "cell center x_K (default: first barycenter)");

    auto* solve = app.add_subcommand("solve", "run the HMM macro solver");
    add_common(solve, true);
    auto* fine = app.add_subcommand("fine", "run the fine-scale reference solver");
    add_common(fine, true);
    auto* convergence = app.add_subcommand("convergence", "run the configured sweep and fit rates");
    add_common(convergence, true);
    auto* ehmm = app.add_subcommand("ehmm", "sweep e(HMM) = max |A0 - A_{H,h}|");
    add_common(ehmm, true);

    std::string preset_name;
    bool write_only = false;
    auto* preset = app.add_subcommand("preset", "run a built-in experiment (paper-example-1, paper-example-2, paper-motivation)");
    add_common(preset, false);
    preset->add_option("name", preset_name, "preset name")->required();
    preset->add_flag("--write-config", write_only, "only write the preset manifest");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    fehmm::log::set_level(o.quiet ? fehmm::log::Level::quiet
                                  : (o.verbose ? fehmm::log::Level::info : fehmm::log::Level::warn));

    try {
        if (*homogenize) return cmd_homogenize(o, t, x);
        if (*cell) return cmd_cell(o, t, x);
        if (*solve) return cmd_solve(o);
        if (*fine) return cmd_fine(o);
        if (*convergence) return cmd_convergence(o);
        if (*ehmm) return cmd_ehmm(o);
        if (*preset) return cmd_preset(o, preset_name, write_only);
    } catch (const fehmm::InputError& e) {
        std::cerr << "fehmm: " << e.what() << '\n';
        return 1;
    } catch (const fehmm::NumericalError& e) {
        std::cerr << "fehmm: numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "fehmm: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
