#pragma once

#include "msbvp/bench.hpp"
#include "msbvp/costmodel.hpp"
#include "msbvp/linalg.hpp"
#include "msbvp/ode.hpp"
#include "msbvp/shooting.hpp"
#include "msbvp/solvers.hpp"
