#pragma once

#include "brainval/budget.hpp"
#include "brainval/errors.hpp"
#include "brainval/estimators.hpp"
#include "brainval/hash.hpp"
#include "brainval/linalg.hpp"
#include "brainval/linmodel.hpp"
#include "brainval/model_io.hpp"
#include "brainval/montecarlo.hpp"
#include "brainval/rng.hpp"
#include "brainval/theory.hpp"
#include "brainval/valuation.hpp"
