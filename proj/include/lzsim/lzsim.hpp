#pragma once

#include "lzsim/error.hpp"
#include "lzsim/special.hpp"
#include "lzsim/hamiltonian.hpp"
#include "lzsim/integrator.hpp"
#include "lzsim/propagator.hpp"
#include "lzsim/aia.hpp"
#include "lzsim/analysis.hpp"
#include "lzsim/sweep.hpp"
#include "lzsim/config.hpp"
#include "lzsim/csv.hpp"
