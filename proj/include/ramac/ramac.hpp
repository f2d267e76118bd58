#pragma once

// Umbrella header for the random-access MAC performance toolkit.

#include "ramac/analytic_qos.hpp"
#include "ramac/analytic_single.hpp"
#include "ramac/errors.hpp"
#include "ramac/mac_sim.hpp"
#include "ramac/markov_core.hpp"
#include "ramac/metrics.hpp"
#include "ramac/phy_channel.hpp"
#include "ramac/plot.hpp"
#include "ramac/scenario.hpp"
#include "ramac/sweep.hpp"
