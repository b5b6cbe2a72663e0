#pragma once

#include "fraclap/analysis.hpp"
#include "fraclap/domain.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/experiment.hpp"
#include "fraclap/extension.hpp"
#include "fraclap/linalg.hpp"
#include "fraclap/operators.hpp"
#include "fraclap/special_functions.hpp"
