#pragma once

// Umbrella header for the sc3 header-only library.

#include "sc3/channel.hpp"
#include "sc3/control.hpp"
#include "sc3/cost.hpp"
#include "sc3/interloop.hpp"
#include "sc3/intraloop.hpp"
#include "sc3/oracle.hpp"
#include "sc3/record.hpp"
#include "sc3/reference_scenarios.hpp"
#include "sc3/scenario.hpp"
