#pragma once

#include "mpcfolio/backtest.hpp"
#include "mpcfolio/errors.hpp"
#include "mpcfolio/forecast.hpp"
#include "mpcfolio/model.hpp"
#include "mpcfolio/price_data.hpp"
#include "mpcfolio/qp_builder.hpp"
#include "mpcfolio/qp_solver.hpp"
