#pragma once

#include "zappa/error.hpp"
#include "zappa/rational.hpp"
#include "zappa/polynomial.hpp"
#include "zappa/cross_section.hpp"
#include "zappa/profile.hpp"
#include "zappa/kernel.hpp"
#include "zappa/slow_manifold.hpp"
#include "zappa/micro_solver.hpp"
#include "zappa/particle_mc.hpp"
#include "zappa/macro_solver.hpp"
#include "zappa/diagnostics.hpp"
#include "zappa/config.hpp"
