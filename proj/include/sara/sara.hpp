#pragma once

// Umbrella header.

#include "sara/core_types.hpp"
#include "sara/dram_model.hpp"
#include "sara/harness.hpp"
#include "sara/mem_controller.hpp"
#include "sara/metrics.hpp"
#include "sara/noc_arbiter.hpp"
#include "sara/qos_meter.hpp"
#include "sara/rng.hpp"
#include "sara/scenario.hpp"
#include "sara/simulator.hpp"
#include "sara/traffic_gen.hpp"
