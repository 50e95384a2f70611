#pragma once

#include "nncrit/random.hpp"
#include "nncrit/simlab/experiments.hpp"
#include "nncrit/simlab/harness.hpp"
#include "nncrit/simlab/quadrature.hpp"
#include "nncrit/simlab/samplers.hpp"
