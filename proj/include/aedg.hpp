#pragma once

#include "aedg/errors.hpp"
#include "aedg/basis.hpp"
#include "aedg/geometry.hpp"
#include "aedg/mesh.hpp"
#include "aedg/acoustic.hpp"
#include "aedg/elastic.hpp"
#include "aedg/fluxes.hpp"
#include "aedg/timestep.hpp"
#include "aedg/analytic.hpp"
#include "aedg/solver.hpp"
#include "aedg/harness.hpp"
#include "aedg/inversion.hpp"
