#pragma once

#include "nematic/diagnostics.hpp"
#include "nematic/dynamics.hpp"
#include "nematic/error.hpp"
#include "nematic/fit.hpp"
#include "nematic/grid.hpp"
#include "nematic/harness/config.hpp"
#include "nematic/harness/experiment.hpp"
#include "nematic/harness/hypotheses.hpp"
#include "nematic/harness/scenario.hpp"
#include "nematic/lifting.hpp"
#include "nematic/linsolve.hpp"
#include "nematic/majorant.hpp"
#include "nematic/norms.hpp"
#include "nematic/simulate.hpp"
#include "nematic/steady.hpp"
