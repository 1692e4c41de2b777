#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fehmm/error.hpp"

namespace fehmm::analysis {

struct RatePoint {
    double param = 0.0;
    double error = 0.0;
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;              // log(error) at log(param) = 0
    std::vector<double> interval_slopes;  // between consecutive points of the window, finest last
    std::size_t window = 0;               // points used
};

/// Least-squares slope of log(error) against log(param) over the `window`
/// smallest parameters (0 means all points). Points are sorted by decreasing
/// parameter, so interval slopes read from coarse to fine.
inline RateFit fit_rate(std::span<const RatePoint> points, std::size_t window = 0) {
    if (points.size() < 3) throw InputError("fit_rate: need at least three points");
    std::vector<RatePoint> p(points.begin(), points.end());
    for (const auto& q : p)
        if (!(q.param > 0.0) || !(q.error > 0.0) || !std::isfinite(q.param) || !std::isfinite(q.error))
            throw InputError("fit_rate: parameters and errors must be positive and finite");
    std::sort(p.begin(), p.end(), [](const RatePoint& a, const RatePoint& b) { return a.param > b.param; });
    if (window != 0 && window < 3) throw InputError("fit_rate: window must cover at least three points");
    if (window != 0 && window < p.size()) p.erase(p.begin(), p.end() - static_cast<std::ptrdiff_t>(window));

    const double n = static_cast<double>(p.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& q : p) {
        const double lx = std::log(q.param), ly = std::log(q.error);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (!(std::fabs(denom) > 0.0)) throw InputError("fit_rate: parameters must not all coincide");
    RateFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.window = p.size();
    for (std::size_t i = 1; i < p.size(); ++i)
        fit.interval_slopes.push_back(std::log(p[i - 1].error / p[i].error) / std::log(p[i - 1].param / p[i].param));
    return fit;
}

inline RateFit fit_rate(std::initializer_list<RatePoint> points, std::size_t window = 0) {
    return fit_rate(std::span<const RatePoint>(points.begin(), points.size()), window);
}

}  // namespace fehmm::analysis
