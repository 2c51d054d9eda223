#pragma once

#include "mognm/analytic.hpp"
#include "mognm/config.hpp"
#include "mognm/core_model.hpp"
#include "mognm/errors.hpp"
#include "mognm/experiments.hpp"
#include "mognm/optimize.hpp"
#include "mognm/qfunction.hpp"
#include "mognm/rng.hpp"
#include "mognm/rxchain.hpp"
#include "mognm/txchain.hpp"
