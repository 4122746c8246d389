#pragma once

// Change-point tests for panels with a small fixed number of time points:
// test statistics, change-point and covariance estimation, simulated
// asymptotic nulls, scenario generators, and a size/power harness.

#include "panelcp/changepoint.hpp"
#include "panelcp/covariance.hpp"
#include "panelcp/csv.hpp"
#include "panelcp/datagen.hpp"
#include "panelcp/errors.hpp"
#include "panelcp/functionals.hpp"
#include "panelcp/harness.hpp"
#include "panelcp/kernel.hpp"
#include "panelcp/limit.hpp"
#include "panelcp/panel.hpp"
#include "panelcp/report.hpp"
#include "panelcp/rng.hpp"
#include "panelcp/statistics.hpp"
