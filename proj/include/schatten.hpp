#pragma once

#include "schatten/core.hpp"
#include "schatten/data.hpp"
#include "schatten/experiments.hpp"
#include "schatten/metrics.hpp"
#include "schatten/norms.hpp"
#include "schatten/solvers.hpp"
