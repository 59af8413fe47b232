#pragma once

// Convenience include for the whole library.

#include "caresim/allocation.hpp"
#include "caresim/config.hpp"
#include "caresim/csv.hpp"
#include "caresim/demography.hpp"
#include "caresim/economy.hpp"
#include "caresim/engine.hpp"
#include "caresim/health.hpp"
#include "caresim/population.hpp"
#include "caresim/reports.hpp"
#include "caresim/rng.hpp"
#include "caresim/synthetic.hpp"
