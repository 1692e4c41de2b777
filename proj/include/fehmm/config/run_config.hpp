#pragma once

// JSON run configuration. Sections and keys:
//
//   problem  example, omega [a, b], T, epsilon, coefficient (string, or
//            {expr, bounds: [lambda, Lambda]}), rhs, initial, exact_solution, exact_dx
//   macro    n_elems | H, n_steps | tau, coefficient_mode ("hmm", "oracle_a0", "fixed_a0(v)")
//   micro    delta_rule, sigma_rule ("eps^(p/q)" or a literal), h | n_h, theta | n_cell, degree
//   oracle   n_y, n_s, period_tol, max_periods, degree
//   fine     n_elems | h, n_steps | tau, degree, store_every, memory_cap_mb, reference_n_elems
//   sweep    parameter, values, series {parameter, values}, window, solver ("hmm" | "fine"), ehmm
//   output   dir, run_id
//
// Unknown keys are rejected and every schema violation is reported at once.
// A top-level "resolved" object (written into manifests) is accepted and ignored.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fehmm/analysis/report.hpp"
#include "fehmm/coeff/coefficient.hpp"
#include "fehmm/coeff/expr.hpp"
#include "fehmm/error.hpp"
#include "fehmm/fine/fine.hpp"
#include "fehmm/macro/hmm.hpp"
#include "fehmm/micro/oracle.hpp"

namespace fehmm::config {

using json = nlohmann::ordered_json;

struct ProblemSpec {
    std::string example = "custom";
    double a = 0.0, b = 1.0;
    double T = 1.0;
    double epsilon = 1e-3;
    std::string coefficient = "1";
    std::optional<double> lambda_min, lambda_max;  // sampled from the expression when absent
    std::string rhs = "0";
    std::string initial = "0";
    std::optional<std::string> exact_solution;
    std::optional<std::string> exact_dx;
};

struct MacroSpec {
    std::size_t n_elems = 16;
    std::size_t n_steps = 15;
    std::string coefficient_mode = "hmm";
};

struct MicroSpec {
    std::string delta_rule = "eps^(1/3)";
    std::string sigma_rule = "eps^(2/3)";
    std::optional<double> h;
    std::optional<std::size_t> n_h;  // cells per delta; used when h is absent (default 512)
    std::optional<double> theta;
    std::optional<std::size_t> n_cell;  // steps per sigma; used when theta is absent (default 15)
    int degree = 2;
};

struct FineSpec {
    std::size_t n_elems = 64;
    std::size_t n_steps = 64;
    int degree = 1;
    std::size_t store_every = 1;
    double memory_cap_mb = 1024.0;
    std::optional<std::size_t> reference_n_elems;  // error against a finer run with the same steps
};

struct SeriesSpec {
    std::string parameter;
    std::vector<double> values;
};

struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
    std::optional<SeriesSpec> series;
    std::size_t window = 3;
    std::string solver = "hmm";
    bool ehmm = false;
};

struct OutputSpec {
    std::string dir = "runs";
    std::optional<std::string> run_id;
};

struct RunConfig {
    ProblemSpec problem;
    MacroSpec macro;
    MicroSpec micro;
    micro::OracleSettings oracle;
    std::optional<FineSpec> fine;
    std::optional<SweepSpec> sweep;
    OutputSpec output;
};

// ---------------------------------------------------------------------------
// rules

/// "eps^(p/q)", "eps^p", "eps" or a decimal literal.
inline double resolve_rule(std::string_view rule, double epsilon) {
    const auto trim = [](std::string_view s) {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        return s;
    };
    const auto number = [&](std::string_view s) -> std::optional<double> {
        s = trim(s);
        double v = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
        return v;
    };
    const std::string_view r = trim(rule);
    double value = 0.0;
    if (auto lit = number(r)) {
        value = *lit;
    } else if (r == "eps") {
        value = epsilon;
    } else if (r.starts_with("eps^")) {
        std::string_view e = trim(r.substr(4));
        if (e.size() >= 2 && e.front() == '(' && e.back() == ')') e = e.substr(1, e.size() - 2);
        const auto slash = e.find('/');
        std::optional<double> p = number(slash == std::string_view::npos ? e : e.substr(0, slash));
        std::optional<double> q = slash == std::string_view::npos ? std::optional<double>(1.0) : number(e.substr(slash + 1));
        if (!p || !q || *q == 0.0) throw InputError("rule '" + std::string(rule) + "': expected eps^(p/q)");
        value = std::pow(epsilon, *p / *q);
    } else {
        throw InputError("rule '" + std::string(rule) + "': expected eps^(p/q) or a number");
    }
    if (!(value > 0.0) || !std::isfinite(value))
        throw InputError("rule '" + std::string(rule) + "' does not evaluate to a positive number");
    return value;
}

// ---------------------------------------------------------------------------
// loading

namespace detail {

/// Collects schema errors with their JSON path.
class Checker {
public:
    void fail(const std::string& path, const std::string& msg) { errors_.push_back(path + ": " + msg); }
    bool ok() const { return errors_.empty(); }

    void raise() const {
        if (errors_.empty()) return;
        std::string msg = "invalid configuration (" + std::to_string(errors_.size()) + " error" +
                          (errors_.size() == 1 ? "" : "s") + "):";
        for (const auto& e : errors_) msg += "\n  " + e;
        throw InputError(msg);
    }

    void keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!obj.is_object()) {
            fail(path, "expected an object");
            return;
        }
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [k, v] : obj.items())
            if (!ok.count(k)) fail(path + "." + k, "unknown key");
    }

    std::optional<double> number(const json& obj, const char* key, const std::string& path) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_number()) {
            fail(path + "." + key, "expected a number");
            return std::nullopt;
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            fail(path + "." + key, "must be finite");
            return std::nullopt;
        }
        return d;
    }

    std::optional<double> positive(const json& obj, const char* key, const std::string& path) {
        auto v = number(obj, key, path);
        if (v && !(*v > 0.0)) {
            fail(path + "." + key, "must be positive");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::size_t> count(const json& obj, const char* key, const std::string& path) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_number_integer() || v.get<long long>() <= 0) {
            fail(path + "." + key, "expected a positive integer");
            return std::nullopt;
        }
        return static_cast<std::size_t>(v.get<long long>());
    }

    std::optional<std::string> string(const json& obj, const char* key, const std::string& path) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_string()) {
            fail(path + "." + key, "expected a string");
            return std::nullopt;
        }
        return v.get<std::string>();
    }

    /// Rule: string or number; returned as text.
    std::optional<std::string> rule(const json& obj, const char* key, const std::string& path) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (v.is_number()) return analysis::format_double(v.get<double>());
        if (v.is_string()) return v.get<std::string>();
        fail(path + "." + key, "expected a rule string or a number");
        return std::nullopt;
    }

    void expression(const std::string& src, const std::string& path) {
        try {
            coeff::parse(src);
        } catch (const ParseError& e) {
            fail(path, std::string("cannot parse '") + src + "': " + e.what());
        }
    }

private:
    std::vector<std::string> errors_;
};

/// Number of intervals of width w in length L; must be (close to) an integer.
inline std::optional<std::size_t> intervals(double L, double w) {
    const double r = L / w;
    const double n = std::round(r);
    if (n < 1.0 || std::fabs(r - n) > 1e-9 * std::max(1.0, r)) return std::nullopt;
    return static_cast<std::size_t>(n);
}

inline const std::set<std::string>& sweep_parameters() {
    static const std::set<std::string> p{"H",     "n_elems", "tau",     "n_steps",      "h",           "n_h",
                                         "theta", "n_cell",  "epsilon", "delta",        "sigma",       "fine_h",
                                         "fine_n_elems", "fine_tau", "fine_n_steps"};
    return p;
}

}  // namespace detail

inline bool is_integer_parameter(const std::string& p) {
    return p == "n_elems" || p == "n_steps" || p == "n_h" || p == "n_cell" || p == "fine_n_elems" ||
           p == "fine_n_steps";
}

inline RunConfig from_json(const json& doc) {
    detail::Checker ck;
    RunConfig cfg;
    ck.keys(doc, "$", {"problem", "macro", "micro", "oracle", "fine", "sweep", "output", "resolved"});
    if (!doc.is_object()) ck.raise();

    const json empty = json::object();
    const auto section = [&](const char* name) -> const json& { return doc.contains(name) ? doc.at(name) : empty; };

    // problem
    {
        const json& p = section("problem");
        const std::string path = "problem";
        ck.keys(p, path,
                {"example", "omega", "T", "epsilon", "coefficient", "rhs", "initial", "exact_solution", "exact_dx"});
        if (auto v = ck.string(p, "example", path)) cfg.problem.example = *v;
        if (p.contains("omega")) {
            const auto& o = p.at("omega");
            if (!o.is_array() || o.size() != 2 || !o[0].is_number() || !o[1].is_number() ||
                !(o[0].get<double>() < o[1].get<double>()))
                ck.fail(path + ".omega", "expected [a, b] with a < b");
            else {
                cfg.problem.a = o[0].get<double>();
                cfg.problem.b = o[1].get<double>();
            }
        }
        if (auto v = ck.positive(p, "T", path)) cfg.problem.T = *v;
        if (!p.contains("epsilon")) ck.fail(path + ".epsilon", "required");
        if (auto v = ck.positive(p, "epsilon", path)) cfg.problem.epsilon = *v;
        if (p.contains("coefficient")) {
            const auto& c = p.at("coefficient");
            if (c.is_string()) {
                cfg.problem.coefficient = c.get<std::string>();
            } else if (c.is_object()) {
                ck.keys(c, path + ".coefficient", {"expr", "bounds"});
                if (auto v = ck.string(c, "expr", path + ".coefficient")) cfg.problem.coefficient = *v;
                else ck.fail(path + ".coefficient.expr", "required");
                if (c.contains("bounds")) {
                    const auto& bd = c.at("bounds");
                    if (!bd.is_array() || bd.size() != 2 || !bd[0].is_number() || !bd[1].is_number() ||
                        !(bd[0].get<double>() > 0.0) || !(bd[0].get<double>() <= bd[1].get<double>()))
                        ck.fail(path + ".coefficient.bounds", "expected [lambda, Lambda] with 0 < lambda <= Lambda");
                    else {
                        cfg.problem.lambda_min = bd[0].get<double>();
                        cfg.problem.lambda_max = bd[1].get<double>();
                    }
                }
            } else {
                ck.fail(path + ".coefficient", "expected an expression string or {expr, bounds}");
            }
            ck.expression(cfg.problem.coefficient, path + ".coefficient");
        } else {
            ck.fail(path + ".coefficient", "required");
        }
        for (const char* key : {"rhs", "initial", "exact_solution", "exact_dx"}) {
            if (auto v = ck.string(p, key, path)) {
                ck.expression(*v, path + "." + key);
                if (std::string_view(key) == "rhs") cfg.problem.rhs = *v;
                else if (std::string_view(key) == "initial") cfg.problem.initial = *v;
                else if (std::string_view(key) == "exact_solution") cfg.problem.exact_solution = *v;
                else cfg.problem.exact_dx = *v;
            }
        }
    }
    const double L = cfg.problem.b - cfg.problem.a;
    const double T = cfg.problem.T;

    // macro
    {
        const json& m = section("macro");
        const std::string path = "macro";
        ck.keys(m, path, {"n_elems", "H", "n_steps", "tau", "coefficient_mode"});
        if (m.contains("n_elems") && m.contains("H")) ck.fail(path, "give n_elems or H, not both");
        if (auto v = ck.count(m, "n_elems", path)) cfg.macro.n_elems = *v;
        if (auto v = ck.positive(m, "H", path)) {
            if (auto n = detail::intervals(L, *v)) cfg.macro.n_elems = *n;
            else ck.fail(path + ".H", "does not divide the domain into whole elements");
        }
        if (m.contains("n_steps") && m.contains("tau")) ck.fail(path, "give n_steps or tau, not both");
        if (auto v = ck.count(m, "n_steps", path)) cfg.macro.n_steps = *v;
        if (auto v = ck.positive(m, "tau", path)) {
            if (auto n = detail::intervals(T, *v)) cfg.macro.n_steps = *n;
            else ck.fail(path + ".tau", "does not divide [0, T] into whole steps");
        }
        if (auto v = ck.string(m, "coefficient_mode", path)) cfg.macro.coefficient_mode = *v;
    }

    // micro
    {
        const json& m = section("micro");
        const std::string path = "micro";
        ck.keys(m, path, {"delta_rule", "sigma_rule", "h", "n_h", "theta", "n_cell", "degree"});
        if (auto v = ck.rule(m, "delta_rule", path)) cfg.micro.delta_rule = *v;
        if (auto v = ck.rule(m, "sigma_rule", path)) cfg.micro.sigma_rule = *v;
        if (m.contains("h") && m.contains("n_h")) ck.fail(path, "give h or n_h, not both");
        if (m.contains("theta") && m.contains("n_cell")) ck.fail(path, "give theta or n_cell, not both");
        cfg.micro.h = ck.positive(m, "h", path);
        cfg.micro.n_h = ck.count(m, "n_h", path);
        cfg.micro.theta = ck.positive(m, "theta", path);
        cfg.micro.n_cell = ck.count(m, "n_cell", path);
        if (auto v = ck.count(m, "degree", path)) {
            if (*v < 2 || *v > 8) ck.fail(path + ".degree", "must be in 2..8");
            else cfg.micro.degree = static_cast<int>(*v);
        }
        for (const auto& [rule, key] : {std::pair{cfg.micro.delta_rule, "delta_rule"}, {cfg.micro.sigma_rule, "sigma_rule"}}) {
            try {
                resolve_rule(rule, cfg.problem.epsilon);
            } catch (const InputError& e) {
                ck.fail(path + "." + key, e.what());
            }
        }
    }

    // oracle
    {
        const json& o = section("oracle");
        const std::string path = "oracle";
        ck.keys(o, path, {"n_y", "n_s", "period_tol", "max_periods", "degree"});
        if (auto v = ck.count(o, "n_y", path)) cfg.oracle.n_y = static_cast<int>(*v);
        if (auto v = ck.count(o, "n_s", path)) cfg.oracle.n_s = static_cast<int>(*v);
        if (auto v = ck.positive(o, "period_tol", path)) cfg.oracle.period_tol = *v;
        if (auto v = ck.count(o, "max_periods", path)) cfg.oracle.max_periods = static_cast<int>(*v);
        if (auto v = ck.count(o, "degree", path)) cfg.oracle.degree = static_cast<int>(*v);
    }

    // fine
    if (doc.contains("fine")) {
        const json& f = doc.at("fine");
        const std::string path = "fine";
        ck.keys(f, path, {"n_elems", "h", "n_steps", "tau", "degree", "store_every", "memory_cap_mb", "reference_n_elems"});
        FineSpec fs;
        if (f.contains("n_elems") && f.contains("h")) ck.fail(path, "give n_elems or h, not both");
        if (auto v = ck.count(f, "n_elems", path)) fs.n_elems = *v;
        if (auto v = ck.positive(f, "h", path)) {
            if (auto n = detail::intervals(L, *v)) fs.n_elems = *n;
            else ck.fail(path + ".h", "does not divide the domain into whole elements");
        }
        if (f.contains("n_steps") && f.contains("tau")) ck.fail(path, "give n_steps or tau, not both");
        if (auto v = ck.count(f, "n_steps", path)) fs.n_steps = *v;
        if (auto v = ck.positive(f, "tau", path)) {
            if (auto n = detail::intervals(T, *v)) fs.n_steps = *n;
            else ck.fail(path + ".tau", "does not divide [0, T] into whole steps");
        }
        if (auto v = ck.count(f, "degree", path)) fs.degree = static_cast<int>(*v);
        if (auto v = ck.count(f, "store_every", path)) fs.store_every = *v;
        if (auto v = ck.positive(f, "memory_cap_mb", path)) fs.memory_cap_mb = *v;
        fs.reference_n_elems = ck.count(f, "reference_n_elems", path);
        cfg.fine = fs;
    }

    // sweep
    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        const std::string path = "sweep";
        ck.keys(s, path, {"parameter", "values", "series", "window", "solver", "ehmm"});
        SweepSpec sw;
        const auto read_axis = [&](const json& obj, const std::string& p, std::string& name, std::vector<double>& values) {
            if (auto v = ck.string(obj, "parameter", p)) {
                name = *v;
                if (!detail::sweep_parameters().count(name)) ck.fail(p + ".parameter", "unknown sweep parameter '" + name + "'");
            } else {
                ck.fail(p + ".parameter", "required");
            }
            if (!obj.contains("values") || !obj.at("values").is_array() || obj.at("values").empty()) {
                ck.fail(p + ".values", "expected a non-empty array of positive numbers");
                return;
            }
            for (const auto& v : obj.at("values")) {
                if (!v.is_number() || !(v.get<double>() > 0.0) || !std::isfinite(v.get<double>())) {
                    ck.fail(p + ".values", "expected a non-empty array of positive numbers");
                    return;
                }
                values.push_back(v.get<double>());
                if (is_integer_parameter(name) && std::floor(values.back()) != values.back())
                    ck.fail(p + ".values", "parameter '" + name + "' takes integers");
            }
        };
        read_axis(s, path, sw.parameter, sw.values);
        if (s.contains("series")) {
            const auto& se = s.at("series");
            ck.keys(se, path + ".series", {"parameter", "values"});
            SeriesSpec series;
            if (se.is_object()) read_axis(se, path + ".series", series.parameter, series.values);
            sw.series = series;
        }
        if (auto v = ck.count(s, "window", path)) {
            if (*v < 3) ck.fail(path + ".window", "must be at least 3");
            else sw.window = *v;
        }
        if (auto v = ck.string(s, "solver", path)) {
            if (*v != "hmm" && *v != "fine") ck.fail(path + ".solver", "expected \"hmm\" or \"fine\"");
            else sw.solver = *v;
        }
        if (s.contains("ehmm")) {
            if (!s.at("ehmm").is_boolean()) ck.fail(path + ".ehmm", "expected true or false");
            else sw.ehmm = s.at("ehmm").get<bool>();
        }
        if (sw.solver == "fine" && !cfg.fine) ck.fail(path + ".solver", "the fine solver needs a \"fine\" section");
        cfg.sweep = sw;
    }

    // output
    {
        const json& o = section("output");
        const std::string path = "output";
        ck.keys(o, path, {"dir", "run_id"});
        if (auto v = ck.string(o, "dir", path)) cfg.output.dir = *v;
        if (auto v = ck.string(o, "run_id", path)) {
            if (v->empty() || v->find_first_of(",\n\r/\\") != std::string::npos)
                ck.fail(path + ".run_id", "must be non-empty without commas, slashes or line breaks");
            else cfg.output.run_id = *v;
        }
    }

    // coefficient_mode syntax
    {
        const std::string& mode = cfg.macro.coefficient_mode;
        if (mode != "hmm" && mode != "oracle_a0") {
            bool good = mode.starts_with("fixed_a0(") && mode.back() == ')';
            if (good) {
                const std::string inner = mode.substr(9, mode.size() - 10);
                double v = 0.0;
                auto res = std::from_chars(inner.data(), inner.data() + inner.size(), v);
                good = res.ec == std::errc{} && res.ptr == inner.data() + inner.size() && v > 0.0 && std::isfinite(v);
            }
            if (!good) ck.fail("macro.coefficient_mode", "expected \"hmm\", \"oracle_a0\" or \"fixed_a0(<positive value>)\"");
        }
    }

    // sampled coefficient bounds must be positive
    if (ck.ok() && !cfg.problem.lambda_min) {
        try {
            const coeff::MultiscaleCoefficient probe(cfg.problem.coefficient, 1e-300, 1e300);
            const auto r = coeff::check_bounds(probe, 65, {0.0, T, cfg.problem.a, cfg.problem.b});
            if (!(r.min_seen > 0.0)) ck.fail("problem.coefficient", "not positive on the sampled grid; declare bounds");
        } catch (const NumericalError& e) {
            ck.fail("problem.coefficient", e.what());
        }
    }
    ck.raise();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("config file '" + path + "': " + e.what());
    }
    return from_json(doc);
}

// ---------------------------------------------------------------------------
// normalized form, resolution

inline json to_json(const RunConfig& c) {
    json j;
    auto& p = j["problem"];
    p["example"] = c.problem.example;
    p["omega"] = {c.problem.a, c.problem.b};
    p["T"] = c.problem.T;
    p["epsilon"] = c.problem.epsilon;
    if (c.problem.lambda_min)
        p["coefficient"] = {{"expr", c.problem.coefficient}, {"bounds", {*c.problem.lambda_min, *c.problem.lambda_max}}};
    else
        p["coefficient"] = c.problem.coefficient;
    p["rhs"] = c.problem.rhs;
    p["initial"] = c.problem.initial;
    if (c.problem.exact_solution) p["exact_solution"] = *c.problem.exact_solution;
    if (c.problem.exact_dx) p["exact_dx"] = *c.problem.exact_dx;

    j["macro"] = {{"n_elems", c.macro.n_elems}, {"n_steps", c.macro.n_steps}, {"coefficient_mode", c.macro.coefficient_mode}};

    auto& m = j["micro"];
    m["delta_rule"] = c.micro.delta_rule;
    m["sigma_rule"] = c.micro.sigma_rule;
    if (c.micro.h) m["h"] = *c.micro.h;
    if (c.micro.n_h) m["n_h"] = *c.micro.n_h;
    if (c.micro.theta) m["theta"] = *c.micro.theta;
    if (c.micro.n_cell) m["n_cell"] = *c.micro.n_cell;
    m["degree"] = c.micro.degree;

    j["oracle"] = {{"n_y", c.oracle.n_y},
                   {"n_s", c.oracle.n_s},
                   {"period_tol", c.oracle.period_tol},
                   {"max_periods", c.oracle.max_periods},
                   {"degree", c.oracle.degree}};
    if (c.fine) {
        auto& f = j["fine"];
        f["n_elems"] = c.fine->n_elems;
        f["n_steps"] = c.fine->n_steps;
        f["degree"] = c.fine->degree;
        f["store_every"] = c.fine->store_every;
        f["memory_cap_mb"] = c.fine->memory_cap_mb;
        if (c.fine->reference_n_elems) f["reference_n_elems"] = *c.fine->reference_n_elems;
    }
    if (c.sweep) {
        auto& s = j["sweep"];
        s["parameter"] = c.sweep->parameter;
        s["values"] = c.sweep->values;
        if (c.sweep->series) s["series"] = {{"parameter", c.sweep->series->parameter}, {"values", c.sweep->series->values}};
        s["window"] = c.sweep->window;
        s["solver"] = c.sweep->solver;
        s["ehmm"] = c.sweep->ehmm;
    }
    j["output"]["dir"] = c.output.dir;
    if (c.output.run_id) j["output"]["run_id"] = *c.output.run_id;
    return j;
}

/// 64-bit FNV-1a of the normalized config without the output section.
inline std::string content_hash(const RunConfig& c) {
    json j = to_json(c);
    j.erase("output");
    const std::string text = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string run_id(const RunConfig& c) { return c.output.run_id.value_or(content_hash(c)); }

/// Literal values after rule expansion.
struct Resolved {
    double H, tau, delta, sigma, h, theta;
    std::size_t n_h, n_cell;
};

inline Resolved resolve(const RunConfig& c) {
    Resolved r{};
    r.H = (c.problem.b - c.problem.a) / static_cast<double>(c.macro.n_elems);
    r.tau = c.problem.T / static_cast<double>(c.macro.n_steps);
    r.delta = resolve_rule(c.micro.delta_rule, c.problem.epsilon);
    r.sigma = resolve_rule(c.micro.sigma_rule, c.problem.epsilon);
    const double h_req = c.micro.h ? *c.micro.h : r.delta / static_cast<double>(c.micro.n_h.value_or(512));
    const double theta_req = c.micro.theta ? *c.micro.theta : r.sigma / static_cast<double>(c.micro.n_cell.value_or(15));
    // Snapped exactly as the cell problem does.
    r.n_h = micro::snap_count(r.delta, h_req);
    r.n_cell = micro::snap_count(r.sigma, theta_req);
    r.h = r.delta / static_cast<double>(r.n_h);
    r.theta = r.sigma / static_cast<double>(r.n_cell);
    return r;
}

inline json resolved_json(const RunConfig& c) {
    const Resolved r = resolve(c);
    json j;
    j["run_id"] = run_id(c);
    j["H"] = r.H;
    j["tau"] = r.tau;
    j["delta"] = r.delta;
    j["sigma"] = r.sigma;
    j["h"] = r.h;
    j["n_h"] = r.n_h;
    j["theta"] = r.theta;
    j["n_cell"] = r.n_cell;
    if (c.fine) {
        j["fine_h"] = (c.problem.b - c.problem.a) / static_cast<double>(c.fine->n_elems);
        j["fine_tau"] = c.problem.T / static_cast<double>(c.fine->n_steps);
    }
    return j;
}

/// Manifest: the normalized config (loadable as is) plus the resolved literals.
inline json manifest(const RunConfig& c) {
    json j = to_json(c);
    j["output"]["run_id"] = run_id(c);
    j["resolved"] = resolved_json(c);
    return j;
}

inline coeff::MultiscaleCoefficient make_coefficient(const RunConfig& c) {
    auto expr = coeff::parse(c.problem.coefficient);
    if (c.problem.lambda_min) return {std::move(expr), *c.problem.lambda_min, *c.problem.lambda_max};
    const coeff::MultiscaleCoefficient probe(expr, 1e-300, 1e300);
    const auto r = coeff::check_bounds(probe, 65, {0.0, c.problem.T, c.problem.a, c.problem.b});
    if (!(r.min_seen > 0.0)) throw InputError("coefficient is not positive on the sampled grid; declare bounds");
    return {std::move(expr), r.min_seen, r.max_seen};
}

inline macro::MacroConfig to_macro(const RunConfig& c, int threads = 1) {
    const Resolved r = resolve(c);
    macro::MacroConfig m;
    m.a = c.problem.a;
    m.b = c.problem.b;
    m.T = c.problem.T;
    m.n_elems = c.macro.n_elems;
    m.n_steps = c.macro.n_steps;
    m.epsilon = c.problem.epsilon;
    m.micro = {r.delta, r.sigma, r.h, r.theta, c.micro.degree};
    m.coefficient = make_coefficient(c);
    m.rhs = coeff::parse(c.problem.rhs);
    m.initial = coeff::parse(c.problem.initial);
    const std::string& mode = c.macro.coefficient_mode;
    if (mode == "hmm") {
        m.mode = macro::CoefficientMode::hmm;
    } else if (mode == "oracle_a0") {
        m.mode = macro::CoefficientMode::oracle_a0;
    } else {
        m.mode = macro::CoefficientMode::fixed_a0;
        const std::string inner = mode.substr(9, mode.size() - 10);
        std::from_chars(inner.data(), inner.data() + inner.size(), m.fixed_a0);
    }
    m.oracle = c.oracle;
    m.threads = threads;
    return m;
}

inline fine::FineConfig to_fine(const RunConfig& c, bool reference = false) {
    if (!c.fine) throw InputError("configuration has no \"fine\" section");
    fine::FineConfig f;
    f.a = c.problem.a;
    f.b = c.problem.b;
    f.T = c.problem.T;
    f.epsilon = c.problem.epsilon;
    f.coefficient = make_coefficient(c);
    f.rhs = coeff::parse(c.problem.rhs);
    f.initial = coeff::parse(c.problem.initial);
    f.n_elems = reference ? c.fine->reference_n_elems.value_or(c.fine->n_elems) : c.fine->n_elems;
    f.n_steps = c.fine->n_steps;
    f.degree = c.fine->degree;
    f.store_every = c.fine->store_every;
    f.memory_cap_bytes = static_cast<std::size_t>(c.fine->memory_cap_mb * 1024.0 * 1024.0);
    return f;
}

/// Copy of c with one sweep parameter set.
inline RunConfig with_parameter(RunConfig c, const std::string& p, double v) {
    const double L = c.problem.b - c.problem.a;
    const double T = c.problem.T;
    const auto whole = [&](double length, double w, const char* what) {
        auto n = detail::intervals(length, w);
        if (!n) throw InputError(std::string("sweep value ") + analysis::format_double(w) + " for " + what +
                                 " does not give a whole number of intervals");
        return *n;
    };
    const auto need_fine = [&]() -> FineSpec& {
        if (!c.fine) throw InputError("sweep parameter '" + p + "' needs a \"fine\" section");
        return *c.fine;
    };
    if (p == "H") c.macro.n_elems = whole(L, v, "H");
    else if (p == "n_elems") c.macro.n_elems = static_cast<std::size_t>(v);
    else if (p == "tau") c.macro.n_steps = whole(T, v, "tau");
    else if (p == "n_steps") c.macro.n_steps = static_cast<std::size_t>(v);
    else if (p == "h") {
        c.micro.h = v;
        c.micro.n_h.reset();
    } else if (p == "n_h") {
        c.micro.n_h = static_cast<std::size_t>(v);
        c.micro.h.reset();
    } else if (p == "theta") {
        c.micro.theta = v;
        c.micro.n_cell.reset();
    } else if (p == "n_cell") {
        c.micro.n_cell = static_cast<std::size_t>(v);
        c.micro.theta.reset();
    } else if (p == "epsilon") c.problem.epsilon = v;
    else if (p == "delta") c.micro.delta_rule = analysis::format_double(v);
    else if (p == "sigma") c.micro.sigma_rule = analysis::format_double(v);
    else if (p == "fine_h") need_fine().n_elems = whole(L, v, "fine_h");
    else if (p == "fine_n_elems") need_fine().n_elems = static_cast<std::size_t>(v);
    else if (p == "fine_tau") need_fine().n_steps = whole(T, v, "fine_tau");
    else if (p == "fine_n_steps") need_fine().n_steps = static_cast<std::size_t>(v);
    else throw InputError("unknown sweep parameter '" + p + "'");
    return c;
}

}  // namespace fehmm::config
