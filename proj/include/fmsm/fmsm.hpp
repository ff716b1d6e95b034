#pragma once

#include "fmsm/analysis.hpp"
#include "fmsm/circuit.hpp"
#include "fmsm/config.hpp"
#include "fmsm/constants.hpp"
#include "fmsm/controller.hpp"
#include "fmsm/coupling_table.hpp"
#include "fmsm/elliptic.hpp"
#include "fmsm/errors.hpp"
#include "fmsm/integrator.hpp"
#include "fmsm/magnetics.hpp"
#include "fmsm/mechanics.hpp"
#include "fmsm/oracles.hpp"
#include "fmsm/record_io.hpp"
#include "fmsm/scenario.hpp"
#include "fmsm/sim.hpp"
#include "fmsm/verify.hpp"
