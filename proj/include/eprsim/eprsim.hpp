#pragma once

// Umbrella header.

#include "eprsim/bellstats.hpp"
#include "eprsim/errors.hpp"
#include "eprsim/linalg.hpp"
#include "eprsim/optics.hpp"
#include "eprsim/protocol.hpp"
#include "eprsim/rng.hpp"
