#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature with maps for infinite
// and semi-infinite ranges.

#include "gridgbm/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <string>

namespace gridgbm::quad {

struct Options {
    double relTol = 1e-9;
    double absTol = 1e-300;
    std::size_t maxIntervals = 4000;
    std::size_t initialPanels = 8;
    // Extra stopping tolerance relative to the integral of |f|; useful when f
    // changes sign and the signed integral can cancel to nearly zero.
    double massRelTol = 0.0;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};

inline constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Weights of the embedded 7-point Gauss rule; its nodes are kKronrodNodes[1,3,5,7].
inline constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a;
    double b;
    double value;
    double error;
    double mass;
    bool operator<(const Panel& other) const { return error < other.error; }
};

// Non-finite samples at the far ends of a mapped range are products like 0*inf;
// they carry no mass.
inline double finiteOrZero(double v) { return std::isfinite(v) ? v : 0.0; }

template <class F>
Panel kronrod15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = finiteOrZero(f(center));
    double kronrod = kKronrodWeights[7] * fc;
    double gauss = kGaussWeights[3] * fc;
    double mass = kKronrodWeights[7] * std::abs(fc);
    for (std::size_t i = 0; i < 7; ++i) {
        const double dx = half * kKronrodNodes[i];
        const double lo = finiteOrZero(f(center - dx));
        const double hi = finiteOrZero(f(center + dx));
        kronrod += kKronrodWeights[i] * (lo + hi);
        mass += kKronrodWeights[i] * (std::abs(lo) + std::abs(hi));
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (lo + hi);
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss), std::abs(half) * mass};
}

}  // namespace detail

/// Integrates f over the finite interval [a, b].
/// Throws NumericError carrying the achieved error estimate when the
/// interval budget is exhausted before the tolerance is met.
template <class F>
Result integrate(F&& f, double a, double b, const Options& opts = {}) {
    if (!(b > a)) {
        if (a == b) return {};
        throw InputError("quad::integrate: need a < b");
    }
    std::priority_queue<detail::Panel> heap;
    double value = 0.0;
    double error = 0.0;
    double mass = 0.0;
    const std::size_t panels = opts.initialPanels == 0 ? 1 : opts.initialPanels;
    const double width = (b - a) / static_cast<double>(panels);
    for (std::size_t i = 0; i < panels; ++i) {
        const double lo = a + width * static_cast<double>(i);
        const double hi = (i + 1 == panels) ? b : lo + width;
        auto p = detail::kronrod15(f, lo, hi);
        value += p.value;
        error += p.error;
        mass += p.mass;
        heap.push(p);
    }
    std::size_t count = panels;
    auto tolerance = [&] {
        return std::max({opts.absTol, opts.relTol * std::abs(value), opts.massRelTol * mass});
    };
    while (error > tolerance()) {
        if (count >= opts.maxIntervals) {
            throw NumericError("adaptive quadrature did not converge (estimated error " +
                                   std::to_string(error) + ")",
                               error);
        }
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw NumericError("adaptive quadrature hit floating-point resolution", error);
        }
        auto left = detail::kronrod15(f, worst.a, mid);
        auto right = detail::kronrod15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        mass += left.mass + right.mass - worst.mass;
        heap.push(left);
        heap.push(right);
        ++count;
    }
    // Recompute sums from the panels to drop accumulated update round-off.
    double v = 0.0, e = 0.0;
    while (!heap.empty()) {
        v += heap.top().value;
        e += heap.top().error;
        heap.pop();
    }
    return {v, e, count * 15};
}

/// Integrates f over the whole real line. `center` and `scale` should roughly
/// locate the mass of f; the map x = center + scale * u / (1 - u^2) sends
/// (-1, 1) onto R.
template <class F>
Result integrateReal(F&& f, double center, double scale, const Options& opts = {}) {
    auto mapped = [&](double u) {
        const double d = 1.0 - u * u;
        const double x = center + scale * u / d;
        return f(x) * scale * (1.0 + u * u) / (d * d);
    };
    return integrate(mapped, -1.0, 1.0, opts);
}

/// Integrates f over (-inf, upper] via x = upper - scale * u / (1 - u).
template <class F>
Result integrateLowerTail(F&& f, double upper, double scale, const Options& opts = {}) {
    auto mapped = [&](double u) {
        const double d = 1.0 - u;
        const double x = upper - scale * u / d;
        return f(x) * scale / (d * d);
    };
    return integrate(mapped, 0.0, 1.0, opts);
}

/// Integrates f over [lower, +inf).
template <class F>
Result integrateUpperTail(F&& f, double lower, double scale, const Options& opts = {}) {
    auto mapped = [&](double u) {
        const double d = 1.0 - u;
        const double x = lower + scale * u / d;
        return f(x) * scale / (d * d);
    };
    return integrate(mapped, 0.0, 1.0, opts);
}

}  // namespace gridgbm::quad
