#pragma once

#include "rta/constraints.hpp"
#include "rta/controllers.hpp"
#include "rta/dynamics.hpp"
#include "rta/filter.hpp"
#include "rta/harness.hpp"
#include "rta/io.hpp"
#include "rta/jet.hpp"
#include "rta/log.hpp"
#include "rta/math.hpp"
#include "rta/params.hpp"
#include "rta/qp.hpp"
#include "rta/rng.hpp"
#include "rta/state.hpp"
