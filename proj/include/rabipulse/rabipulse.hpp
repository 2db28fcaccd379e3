#pragma once

#include "rabipulse/errors.hpp"
#include "rabipulse/levels.hpp"
#include "rabipulse/pulse.hpp"
#include "rabipulse/quadrature.hpp"
#include "rabipulse/ode.hpp"
#include "rabipulse/designer.hpp"
#include "rabipulse/propagator.hpp"
#include "rabipulse/scenario.hpp"
#include "rabipulse/bench.hpp"
