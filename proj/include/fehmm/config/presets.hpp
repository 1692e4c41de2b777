#pragma once

// Built-in experiment setups. Cell grid widths are given as n_h = delta / h,
// so "h = delta / 512" reads n_h = 512.

#include <string>
#include <vector>

#include "fehmm/config/run_config.hpp"
#include "fehmm/error.hpp"

namespace fehmm::config {

inline constexpr double kExample1A0 = 3.352429824667637;

inline std::vector<std::string> preset_names() { return {"paper-example-1", "paper-example-2", "paper-motivation"}; }

inline json preset_json(const std::string& name) {
    json common_problem = {{"omega", {0.0, 1.0}},
                           {"T", 1.0},
                           {"initial", "0"},
                           {"exact_solution", "t^2*(x - x^2)"},
                           {"exact_dx", "t^2*(1 - 2*x)"}};
    if (name == "paper-example-1") {
        json p = common_problem;
        p["example"] = name;
        p["epsilon"] = 1e-3;
        p["coefficient"] = {{"expr", "3 + cos(2*pi*y) + cos(2*pi*s)^2"}, {"bounds", {2.0, 5.0}}};
        p["rhs"] = "2*t*(x - x^2) + 2*3.352429824667637*t^2";
        return {{"problem", p},
                {"macro", {{"n_elems", 16}, {"n_steps", 15}, {"coefficient_mode", "hmm"}}},
                {"micro", {{"delta_rule", "eps^(1/3)"}, {"sigma_rule", "eps^(2/3)"}, {"n_h", 512}, {"n_cell", 15}, {"degree", 2}}},
                {"oracle", {{"n_y", 256}, {"n_s", 256}}},
                {"sweep",
                 {{"parameter", "n_elems"},
                  {"values", {4, 8, 16, 32, 64}},
                  {"series", {{"parameter", "n_h"}, {"values", {128, 256, 512, 1024}}}},
                  {"window", 3}}},
                {"output", {{"dir", "runs/paper-example-1"}}}};
    }
    if (name == "paper-example-2") {
        json p = common_problem;
        p["example"] = name;
        p["epsilon"] = 1e-3;
        p["coefficient"] = {{"expr", "1/(2 - cos(2*pi*y))"}, {"bounds", {1.0 / 3.0, 1.0}}};
        p["rhs"] = "2*t*(x - x^2) + 2*0.5*t^2";
        return {{"problem", p},
                {"macro", {{"n_elems", 16}, {"n_steps", 15}, {"coefficient_mode", "hmm"}}},
                {"micro", {{"delta_rule", "eps^(1/3)"}, {"sigma_rule", "eps^(2/3)"}, {"n_h", 512}, {"n_cell", 15}, {"degree", 2}}},
                {"oracle", {{"n_y", 512}, {"n_s", 256}}},
                {"sweep",
                 {{"parameter", "n_elems"},
                  {"values", {4, 8, 16, 32, 64}},
                  {"series", {{"parameter", "n_h"}, {"values", {8, 128, 256, 512}}}},
                  {"window", 3}}},
                {"output", {{"dir", "runs/paper-example-2"}}}};
    }
    if (name == "paper-motivation") {
        json p = {{"example", name},
                  {"omega", {0.0, 1.0}},
                  {"T", 1.0},
                  {"epsilon", 0.05},
                  {"coefficient", {{"expr", "3 + cos(2*pi*y) + cos(2*pi*s)^2"}, {"bounds", {2.0, 5.0}}}},
                  {"rhs", "2*t*(x - x^2) + 2*3.352429824667637*t^2"},
                  {"initial", "0"}};
        // tau_f = 0.05^2 / 4 for both series; reference h = 1/1280.
        return {{"problem", p},
                {"fine", {{"n_elems", 5}, {"n_steps", 1600}, {"degree", 1}, {"reference_n_elems", 1280}}},
                {"sweep",
                 {{"parameter", "fine_n_elems"},
                  {"values", {5, 10, 20, 40, 80, 160, 320}},
                  {"series", {{"parameter", "epsilon"}, {"values", {0.1, 0.05}}}},
                  {"solver", "fine"},
                  {"window", 3}}},
                {"output", {{"dir", "runs/paper-motivation"}}}};
    }
    throw InputError("unknown preset '" + name + "' (available: paper-example-1, paper-example-2, paper-motivation)");
}

inline RunConfig preset(const std::string& name) { return from_json(preset_json(name)); }

}  // namespace fehmm::config
