#pragma once

// Fractal percolation laboratory: construction and sampling, branching
// analytics, arithmetic sum/difference criteria, projections, operator
// certificates, slice counts and d-fold sumsets.

#include "arithmetic.hpp"
#include "branching.hpp"
#include "condition.hpp"
#include "core.hpp"
#include "crossing.hpp"
#include "grid_function.hpp"
#include "interval_union.hpp"
#include "kv.hpp"
#include "projection.hpp"
#include "rng.hpp"
#include "serialize.hpp"
#include "slices.hpp"
#include "stats.hpp"
#include "sumset.hpp"
#include "tree.hpp"
