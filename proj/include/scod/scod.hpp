#pragma once

#include "numerics.hpp"
#include "confidence_set.hpp"
#include "dynamics.hpp"
#include "analysis.hpp"
#include "scenarios.hpp"
#include "io.hpp"
