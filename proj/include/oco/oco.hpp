#pragma once

#include "oco/core/circ.hpp"
#include "oco/core/decision_space.hpp"
#include "oco/core/dynamics.hpp"
#include "oco/core/environment.hpp"
#include "oco/core/history.hpp"
#include "oco/core/loss.hpp"
#include "oco/core/rng.hpp"
#include "oco/core/types.hpp"

#include "oco/learners/ftrl.hpp"
#include "oco/learners/regularizer.hpp"
#include "oco/learners/runner.hpp"
#include "oco/learners/solver.hpp"
#include "oco/learners/tuning.hpp"

#include "oco/analysis/bounds.hpp"
#include "oco/analysis/capacity.hpp"

#include "oco/adversaries/block_adversary.hpp"
#include "oco/adversaries/lower_bound.hpp"

#include "oco/environments/olc.hpp"
#include "oco/environments/opp.hpp"
#include "oco/environments/stage_cost.hpp"
#include "oco/environments/truncated_view.hpp"
