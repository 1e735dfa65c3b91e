#pragma once

// Umbrella header: Shapley values of matching games on weighted graphs,
// exactly and approximately, plus the matchable-subgraph counting harness.

#include "matchshap/config.hpp"
#include "matchshap/counting_reduction.hpp"
#include "matchshap/errors.hpp"
#include "matchshap/fpras.hpp"
#include "matchshap/graph_core.hpp"
#include "matchshap/matching.hpp"
#include "matchshap/rational.hpp"
#include "matchshap/shapley_exact.hpp"
#include "matchshap/shapley_structured.hpp"
