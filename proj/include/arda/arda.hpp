#pragma once

#include "arda/checks.hpp"
#include "arda/config.hpp"
#include "arda/core_math.hpp"
#include "arda/driver.hpp"
#include "arda/oracles.hpp"
#include "arda/params.hpp"
#include "arda/problems.hpp"
#include "arda/subsolvers.hpp"
#include "arda/trace.hpp"
#include "arda/verify.hpp"
