#pragma once

#include "orbifold/algebra.hpp"
#include "orbifold/errors.hpp"
#include "orbifold/group.hpp"
#include "orbifold/linalg.hpp"
#include "orbifold/observables.hpp"
#include "orbifold/rgflow.hpp"
#include "orbifold/scenario.hpp"
#include "orbifold/space.hpp"
#include "orbifold/spectral.hpp"
#include "orbifold/toymodel.hpp"
