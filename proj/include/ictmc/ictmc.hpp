#pragma once

// Umbrella header for the numerical library (no JSON or CLI dependencies).

#include "ictmc/axioms.hpp"
#include "ictmc/core.hpp"
#include "ictmc/envelope.hpp"
#include "ictmc/errors.hpp"
#include "ictmc/logarithm.hpp"
#include "ictmc/operators.hpp"
#include "ictmc/semigroup.hpp"
