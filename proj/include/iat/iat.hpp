#pragma once

// Umbrella header for the whole library.

#include "iat/bench.hpp"
#include "iat/krylov.hpp"
#include "iat/operator.hpp"
#include "iat/problems.hpp"
#include "iat/rates.hpp"
#include "iat/report.hpp"
#include "iat/rng.hpp"
#include "iat/selection.hpp"
#include "iat/solver.hpp"
#include "iat/spectral.hpp"
#include "iat/version.hpp"
