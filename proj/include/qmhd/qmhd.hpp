#pragma once

// Umbrella header.

#include "qmhd/constants.hpp"
#include "qmhd/energy.hpp"
#include "qmhd/errors.hpp"
#include "qmhd/field_io.hpp"
#include "qmhd/grid.hpp"
#include "qmhd/mhd.hpp"
#include "qmhd/operators.hpp"
#include "qmhd/parallel.hpp"
#include "qmhd/quaternion.hpp"
#include "qmhd/random_fields.hpp"
#include "qmhd/solvers.hpp"
#include "qmhd/verification.hpp"
