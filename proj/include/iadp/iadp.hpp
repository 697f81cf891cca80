#pragma once

#include "iadp/baselines.hpp"
#include "iadp/beta_driver.hpp"
#include "iadp/conditionals.hpp"
#include "iadp/distributions.hpp"
#include "iadp/errors.hpp"
#include "iadp/problem.hpp"
#include "iadp/trellis.hpp"
