#pragma once

#include "iucert/errors.hpp"
#include "iucert/quadrature.hpp"
#include "iucert/roots.hpp"
#include "iucert/specialfn.hpp"
#include "iucert/potentials.hpp"
#include "iucert/discretize.hpp"
#include "iucert/rosen.hpp"
#include "iucert/semigroup.hpp"
#include "iucert/iu.hpp"
