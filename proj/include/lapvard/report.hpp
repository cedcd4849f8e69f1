#pragma once

#include "lapvard/types.hpp"

#include <string>
#include <vector>

namespace lapvard {

struct IterationRow {
    Index iteration = 0;
    Real objective = 0;
    double cumulative_ms = 0;
};

// Per-run record shared by every solver: objective trace, timing, convergence
// flags and (once computed by the experiment runner) final image metrics.
struct SolveReport {
    std::string solver;
    std::vector<IterationRow> rows;

    // Objective value after every block update; for the variational solver the
    // initial value followed by three entries per outer iteration (location,
    // scale, prior-scale blocks, in update order).
    std::vector<Real> block_objectives;

    bool early_stop = false;
    bool clamps_triggered = false;
    bool diverged = false;
    long scale_cap_hits = 0;  // posterior-scale updates capped on an all-zero column

    Real rmse = -1;
    Real psnr_db = 0;
    Real peak = 0;
};

}  // namespace lapvard
