#pragma once

#include "hazardcp/model.hpp"

namespace hazardcp {

// Calibrated preset: T-Bill risk-free rate plus BB / CCC-and-lower spread
// levels, jump intensity 0.25 (four-year expected wait), observation noise
// 0.15, ten-year horizon.
struct Table2Preset {
    ModelParams params = new_params(0.0, 0.25, 0.0366, 0.1148, 0.15);
    double r = 0.0263;
    double horizon = 10.0;
    double deltas[2] = {0.0, 0.5};
};

// Illustrative preset used for the estimator comparison: slow change point,
// large post-change hazard, unit observation noise, sixty-year horizon.
struct Table1Preset {
    ModelParams params = new_params(0.0, 0.06, 0.02, 0.22, 1.0);
    double horizon = 60.0;
};

// Threshold-study variants: A and B differ in noise level, B and C in the
// post-change hazard.
struct SensitivityCases {
    ModelParams case_a = new_params(0.0, 0.06, 0.02, 0.12, 1.0);
    ModelParams case_b = new_params(0.0, 0.06, 0.02, 0.12, 2.0);
    ModelParams case_c = new_params(0.0, 0.06, 0.02, 0.22, 2.0);
    double horizon = 60.0;
};

}  // namespace hazardcp
