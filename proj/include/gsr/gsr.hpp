#pragma once

// Umbrella header for the GSR performance-evaluation library.

#include "gsr/normal.hpp"
#include "gsr/model.hpp"
#include "gsr/grid.hpp"
#include "gsr/collocation.hpp"
#include "gsr/solver.hpp"
#include "gsr/metrics.hpp"
#include "gsr/accuracy.hpp"
#include "gsr/calibration.hpp"
#include "gsr/mc.hpp"
#include "gsr/io.hpp"
