#pragma once

// Umbrella header for the jumpflow library: Monte Carlo construction of the
// stochastic flow of jump-diffusion SDEs on shared noise, statistical
// regularity checks, and grid-based stochastic control with DPP verification.

#include "common.hpp"
#include "rng.hpp"
#include "distributions.hpp"
#include "noise.hpp"
#include "model.hpp"
#include "controls.hpp"
#include "integrator.hpp"
#include "stats.hpp"
#include "regularity.hpp"
#include "costs.hpp"
#include "value.hpp"
#include "config.hpp"
#include "io.hpp"
#include "runner.hpp"
