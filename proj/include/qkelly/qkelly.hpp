#pragma once

#include "qkelly/core.hpp"
#include "qkelly/errors.hpp"
#include "qkelly/grid.hpp"
#include "qkelly/optimize.hpp"
#include "qkelly/policy.hpp"
#include "qkelly/report.hpp"
#include "qkelly/sim.hpp"
#include "qkelly/solver.hpp"
#include "qkelly/surface.hpp"
#include "qkelly/types.hpp"
#include "qkelly/version.hpp"
