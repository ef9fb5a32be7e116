#pragma once

// Umbrella header for the qincome library: quantile-parameterized
// Singh-Maddala and Dagum distributions, parametric quantile regression,
// residual diagnostics, and Monte Carlo study tooling.

#include "qincome/bfgs.hpp"
#include "qincome/csv.hpp"
#include "qincome/diagnostics.hpp"
#include "qincome/distributions.hpp"
#include "qincome/linalg.hpp"
#include "qincome/montecarlo.hpp"
#include "qincome/regression.hpp"
#include "qincome/specfun.hpp"
#include "qincome/stats.hpp"
