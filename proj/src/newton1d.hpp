#pragma once

#include "lapvard/types.hpp"

#include <cmath>
#include <limits>

namespace lapvard::detail {

struct Eval1D {
    Real value = 0;
    Real d1 = 0;
    Real d2 = 0;
};

// Minimizes a strictly convex piecewise-C2 function over [lo, hi] (either
// bound may be infinite) by Newton steps safeguarded with a derivative-sign
// bracket and bisection fallback. Non-finite evaluations are treated as lying
// beyond a barrier and retreated from. `x0` must be a finite-valued point in
// [lo, hi]; `scale` sets the initial bracket-expansion step.
template <class F>  // F: Real -> Eval1D
Real newton_min_1d(F&& f, Real lo, Real hi, Real x0, Real scale, int newton_steps) {
    if (!(scale > 0)) scale = 1;

    Real a = lo, b = hi;  // bracket; once sign-established, d1(a) < 0 < d1(b)
    Real x = x0;
    Eval1D e = f(x);
    if (!std::isfinite(e.d1)) return x0;
    if (e.d1 == 0) return x;

    // Expand toward the descent side until the derivative changes sign.
    if (e.d1 > 0) {
        b = x;
        Real step = scale;
        bool bracketed = false;
        for (int m = 0; m < 200; ++m) {
            Real t = b - step;
            if (t <= lo) t = lo;
            const Eval1D et = f(t);
            if (!std::isfinite(et.d1) || !std::isfinite(et.value)) {
                step *= 0.5;  // stepped over a barrier
                if (step < 1e-300) break;
                continue;
            }
            if (et.d1 < 0) {
                a = t;
                x = t;
                e = et;
                bracketed = true;
                break;
            }
            if (et.d1 == 0) return t;
            b = t;
            if (t <= lo) return lo;  // increasing on the whole interval
            step *= 2;
        }
        if (!bracketed) return b;
    } else {
        a = x;
        Real step = scale;
        bool bracketed = false;
        for (int m = 0; m < 200; ++m) {
            Real t = a + step;
            if (t >= hi) t = hi;
            const Eval1D et = f(t);
            if (!std::isfinite(et.d1) || !std::isfinite(et.value)) {
                step *= 0.5;
                if (step < 1e-300) break;
                continue;
            }
            if (et.d1 > 0) {
                b = t;
                x = t;
                e = et;
                bracketed = true;
                break;
            }
            if (et.d1 == 0) return t;
            a = t;
            if (t >= hi) return hi;  // decreasing on the whole interval
            step *= 2;
        }
        if (!bracketed) return a;
    }

    // Newton refinement inside the bracket.
    for (int it = 0; it < newton_steps; ++it) {
        Real trial;
        if (std::isfinite(e.d2) && e.d2 > 0) {
            trial = x - e.d1 / e.d2;
            if (!(trial > a && trial < b)) trial = (a + b) / 2;
        } else {
            trial = (a + b) / 2;
        }
        const Eval1D et = f(trial);
        if (!std::isfinite(et.d1) || !std::isfinite(et.value)) {
            // should not happen inside a convex domain bracket; bisect anyway
            trial = (a + b) / 2;
            e = f(trial);
            x = trial;
        } else {
            x = trial;
            e = et;
        }
        if (e.d1 > 0)
            b = x;
        else if (e.d1 < 0)
            a = x;
        else
            return x;
        if (b - a <= 1e-14 * (std::abs(a) + std::abs(b) + scale)) break;
    }
    return x;
}

}  // namespace lapvard::detail
