#pragma once

// Sweep drivers behind the convergence, ehmm and preset subcommands. Runs are
// independent and may execute in parallel; rows come back in sweep order
// (series value major, sweep value minor) whatever the thread count.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fehmm/analysis/ehmm.hpp"
#include "fehmm/analysis/errors.hpp"
#include "fehmm/analysis/rates.hpp"
#include "fehmm/analysis/report.hpp"
#include "fehmm/config/run_config.hpp"
#include "fehmm/fine/fine.hpp"
#include "fehmm/macro/hmm.hpp"
#include "fehmm/parallel.hpp"

namespace fehmm::config {

struct DriverOptions {
    int threads = 1;
    bool timing = false;  // fill wall_ms (otherwise 0, keeping output byte-stable)
    bool ehmm_only = false;
};

struct SweepCell {
    std::optional<double> series_value;
    double value = 0.0;
    RunConfig config;
};

struct ConvergenceReport {
    std::string run_id;
    std::vector<analysis::ErrorRecord> records;
    json report;  // fitted slopes per series and error column
};

inline std::vector<SweepCell> expand_sweep(const RunConfig& c) {
    std::vector<SweepCell> cells;
    if (!c.sweep) {
        cells.push_back({std::nullopt, 0.0, c});
        return cells;
    }
    const auto& sw = *c.sweep;
    const std::vector<std::optional<double>> series =
        sw.series ? std::vector<std::optional<double>>(sw.series->values.begin(), sw.series->values.end())
                  : std::vector<std::optional<double>>{std::nullopt};
    for (const auto& s : series) {
        RunConfig base = s ? with_parameter(c, sw.series->parameter, *s) : c;
        for (double v : sw.values) cells.push_back({s, v, with_parameter(base, sw.parameter, v)});
    }
    return cells;
}

inline std::optional<analysis::SpaceTimeFn> exact_fn(const RunConfig& c, bool derivative) {
    const auto& src = derivative ? c.problem.exact_dx : c.problem.exact_solution;
    if (!src) return std::nullopt;
    auto e = std::make_shared<coeff::Expr>(coeff::parse(*src));
    return analysis::SpaceTimeFn([e](double t, double x) { return e->evaluate({t, x, 0.0, 0.0}); });
}

/// Value of the swept quantity as a length (or epsilon), the abscissa of the rate fits.
inline double fit_abscissa(const analysis::ErrorRecord& r, const std::string& parameter) {
    if (parameter == "H" || parameter == "n_elems" || parameter == "fine_h" || parameter == "fine_n_elems") return r.H;
    if (parameter == "tau" || parameter == "n_steps" || parameter == "fine_tau" || parameter == "fine_n_steps") return r.tau;
    if (parameter == "h" || parameter == "n_h") return r.h.value_or(0.0);
    if (parameter == "theta" || parameter == "n_cell") return r.theta.value_or(0.0);
    if (parameter == "delta") return r.delta.value_or(0.0);
    if (parameter == "sigma") return r.sigma.value_or(0.0);
    return r.epsilon;
}

inline analysis::ErrorRecord hmm_row(const RunConfig& c, const DriverOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    const Resolved r = resolve(c);
    analysis::ErrorRecord rec;
    rec.example = c.problem.example;
    rec.epsilon = c.problem.epsilon;
    rec.H = r.H;
    rec.tau = r.tau;
    const auto mcfg = to_macro(c, 1);
    if (mcfg.mode == macro::CoefficientMode::hmm) {
        rec.delta = r.delta;
        rec.sigma = r.sigma;
        rec.h = r.h;
        rec.theta = r.theta;
    }
    if (!opt.ehmm_only) {
        const auto traj = macro::run_hmm(mcfg);
        if (auto u = exact_fn(c, false)) {
            const auto e = analysis::errors_vs_exact(traj, *u, exact_fn(c, true));
            rec.err_l2 = e.err_l2;
            rec.err_h1 = e.err_h1;
            rec.err_triple = e.err_triple;
        }
    }
    if ((opt.ehmm_only || (c.sweep && c.sweep->ehmm)) && mcfg.mode == macro::CoefficientMode::hmm)
        rec.ehmm = analysis::ehmm_estimate(mcfg, c.oracle).ehmm;
    if (opt.timing)
        rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

/// Fine-solver row: error against the reference run (same steps, reference_n_elems
/// elements) when configured, otherwise against the exact solution.
inline analysis::ErrorRecord fine_row(const RunConfig& c, const DriverOptions& opt,
                                      const std::function<const MacroTrajectory&(const RunConfig&)>& reference) {
    const auto start = std::chrono::steady_clock::now();
    analysis::ErrorRecord rec;
    rec.example = c.problem.example;
    rec.epsilon = c.problem.epsilon;
    const auto fcfg = to_fine(c);
    rec.H = fcfg.h();
    rec.tau = fcfg.tau();
    const auto traj = fine::run_fine(fcfg);
    if (c.fine->reference_n_elems) {
        const MacroTrajectory& ref = reference(c);
        const auto d = fine::difference_on_nested(traj.final_state(), ref.final_state());
        rec.err_l2 = d.l2;
        rec.err_h1 = d.h1;
        double s = 0.0;
        for (std::size_t i = 1; i < traj.states.size(); ++i) {
            const long j = ref.index_at(traj.times[i]);
            if (j < 0) continue;
            const double g = fine::difference_on_nested(traj.states[i], ref.states[static_cast<std::size_t>(j)]).h1;
            s += traj.tau * static_cast<double>(traj.steps[i] - traj.steps[i - 1]) * g * g;
        }
        rec.err_triple = std::sqrt(s);
    } else if (auto u = exact_fn(c, false)) {
        const auto e = analysis::errors_vs_exact(traj, *u, exact_fn(c, true));
        rec.err_l2 = e.err_l2;
        rec.err_h1 = e.err_h1;
        rec.err_triple = e.err_triple;
    }
    if (opt.timing)
        rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

inline json fits_json(const std::vector<analysis::ErrorRecord>& rows, const std::string& parameter, std::size_t window) {
    json out = json::object();
    const auto column = [&](const char* name, auto get) {
        std::vector<analysis::RatePoint> pts;
        for (const auto& r : rows) {
            const std::optional<double> v = get(r);
            const double x = fit_abscissa(r, parameter);
            if (v && *v > 0.0 && x > 0.0) pts.push_back({x, *v});
        }
        if (pts.size() < 3) {
            out[name] = nullptr;
            return;
        }
        out[name] = analysis::fit_to_json(analysis::fit_rate(pts, std::min(window, pts.size())));
    };
    column("err_l2", [](const analysis::ErrorRecord& r) { return r.err_l2; });
    column("err_h1", [](const analysis::ErrorRecord& r) { return r.err_h1; });
    column("err_triple", [](const analysis::ErrorRecord& r) { return r.err_triple; });
    column("ehmm", [](const analysis::ErrorRecord& r) { return r.ehmm; });
    return out;
}

inline ConvergenceReport run_sweep(const RunConfig& c, const DriverOptions& opt) {
    ConvergenceReport out;
    out.run_id = run_id(c);
    const auto cells = expand_sweep(c);
    const bool fine_solver = c.sweep && c.sweep->solver == "fine";

    // Reference fine runs, one per distinct reference configuration.
    std::mutex ref_mutex;
    std::map<std::string, std::shared_ptr<std::once_flag>> ref_once;
    std::map<std::string, std::shared_ptr<MacroTrajectory>> refs;
    const auto reference = [&](const RunConfig& rc) -> const MacroTrajectory& {
        RunConfig key_cfg = rc;
        key_cfg.fine->n_elems = *rc.fine->reference_n_elems;
        const std::string key = content_hash(key_cfg);
        std::shared_ptr<std::once_flag> flag;
        {
            std::lock_guard lock(ref_mutex);
            auto& f = ref_once[key];
            if (!f) f = std::make_shared<std::once_flag>();
            flag = f;
        }
        std::call_once(*flag, [&] {
            auto traj = std::make_shared<MacroTrajectory>(fine::run_fine(to_fine(rc, true)));
            std::lock_guard lock(ref_mutex);
            refs[key] = std::move(traj);
        });
        std::lock_guard lock(ref_mutex);
        return *refs.at(key);
    };

    std::vector<analysis::ErrorRecord> rows(cells.size());
    parallel_for(cells.size(), opt.threads, [&](std::size_t i) {
        rows[i] = fine_solver ? fine_row(cells[i].config, opt, reference) : hmm_row(cells[i].config, opt);
        rows[i].run_id = out.run_id + "-" + std::to_string(i);
        rows[i].check();
    });
    out.records = rows;

    json rep;
    rep["run_id"] = out.run_id;
    rep["example"] = c.problem.example;
    const std::string parameter = c.sweep ? c.sweep->parameter : std::string{};
    const std::size_t window = c.sweep ? c.sweep->window : 3;
    rep["parameter"] = parameter;
    rep["window"] = window;
    json series = json::array();
    if (c.sweep) {
        std::size_t i = 0;
        while (i < cells.size()) {
            std::size_t j = i;
            std::vector<analysis::ErrorRecord> group;
            while (j < cells.size() && cells[j].series_value == cells[i].series_value) group.push_back(rows[j++]);
            json s;
            if (c.sweep->series) {
                s["parameter"] = c.sweep->series->parameter;
                s["value"] = *cells[i].series_value;
            }
            s["rows"] = group.size();
            s["fits"] = fits_json(group, parameter, window);
            series.push_back(s);
            i = j;
        }
    }
    rep["series"] = series;
    out.report = rep;
    return out;
}

}  // namespace fehmm::config
