#pragma once

// Umbrella header for the whole library.

#include "laser/actors.hpp"
#include "laser/adversaries.hpp"
#include "laser/analysis.hpp"
#include "laser/blake2s.hpp"
#include "laser/config.hpp"
#include "laser/crypto.hpp"
#include "laser/latency.hpp"
#include "laser/scenarios.hpp"
#include "laser/simnet.hpp"
#include "laser/wire.hpp"
