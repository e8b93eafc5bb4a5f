#pragma once

#include "dkdv/error.hpp"
#include "dkdv/fft.hpp"
#include "dkdv/grid.hpp"
#include "dkdv/profiles.hpp"
#include "dkdv/airy.hpp"
#include "dkdv/energy.hpp"
#include "dkdv/integrator.hpp"
#include "dkdv/mild.hpp"
#include "dkdv/potential_well.hpp"
#include "dkdv/config.hpp"
#include "dkdv/runner.hpp"
