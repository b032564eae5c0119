#pragma once

// umbrella header for the whole library

#include "odc/config.hpp"
#include "odc/errors.hpp"
#include "odc/f_analysis.hpp"
#include "odc/gbm.hpp"
#include "odc/io.hpp"
#include "odc/mc_checks.hpp"
#include "odc/monte_carlo.hpp"
#include "odc/ou_solver.hpp"
#include "odc/quadrature.hpp"
#include "odc/roots.hpp"
#include "odc/serialize.hpp"
#include "odc/strategy.hpp"
#include "odc/svg.hpp"
#include "odc/vasicek.hpp"
#include "odc/version.hpp"
#include "odc/zero_bond.hpp"
