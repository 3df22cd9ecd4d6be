#pragma once

#include "pitaevskii/grid.hpp"
#include "pitaevskii/field.hpp"
#include "pitaevskii/spectral.hpp"
#include "pitaevskii/norms.hpp"
#include "pitaevskii/model.hpp"
#include "pitaevskii/rhs.hpp"
#include "pitaevskii/diagnostics.hpp"
#include "pitaevskii/integrator.hpp"
#include "pitaevskii/initial_conditions.hpp"
#include "pitaevskii/oracle.hpp"
#include "pitaevskii/stability.hpp"
#include "pitaevskii/validator.hpp"
#include "pitaevskii/config.hpp"
#include "pitaevskii/io.hpp"
