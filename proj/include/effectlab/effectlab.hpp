#pragma once

// Umbrella header: global feature effect estimation (pd, cd, ale, dale),
// robustness bounds, data-poisoning attacks and model randomization tests
// for tabular predictors.

#include "effectlab/analytic.hpp"
#include "effectlab/attack.hpp"
#include "effectlab/bounds.hpp"
#include "effectlab/common.hpp"
#include "effectlab/dataset.hpp"
#include "effectlab/effects.hpp"
#include "effectlab/grid.hpp"
#include "effectlab/mlp.hpp"
#include "effectlab/predictor.hpp"
#include "effectlab/randomize.hpp"
#include "effectlab/tv.hpp"
