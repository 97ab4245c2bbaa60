#pragma once

#include "nlcoef/banded.hpp"
#include "nlcoef/coefficient.hpp"
#include "nlcoef/config.hpp"
#include "nlcoef/data_pipeline.hpp"
#include "nlcoef/error.hpp"
#include "nlcoef/experiment.hpp"
#include "nlcoef/expression.hpp"
#include "nlcoef/final_time.hpp"
#include "nlcoef/forward_solver.hpp"
#include "nlcoef/grid.hpp"
#include "nlcoef/interpolation.hpp"
#include "nlcoef/iteration.hpp"
#include "nlcoef/observation.hpp"
#include "nlcoef/problem.hpp"
#include "nlcoef/recon_common.hpp"
#include "nlcoef/stencils.hpp"
#include "nlcoef/time_trace.hpp"
