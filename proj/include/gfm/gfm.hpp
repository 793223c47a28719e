#pragma once
// Umbrella header for the grid-forming inverter toolkit.
#include "gfm/analysis.hpp"
#include "gfm/config.hpp"
#include "gfm/constants.hpp"
#include "gfm/controllers.hpp"
#include "gfm/errors.hpp"
#include "gfm/io.hpp"
#include "gfm/metrics.hpp"
#include "gfm/plant.hpp"
#include "gfm/polynomial.hpp"
#include "gfm/simulate.hpp"
#include "gfm/state_space.hpp"
#include "gfm/transfer_function.hpp"
