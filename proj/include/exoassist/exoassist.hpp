#pragma once

// Umbrella header.

#include "exoassist/config.hpp"
#include "exoassist/control.hpp"
#include "exoassist/csv.hpp"
#include "exoassist/error.hpp"
#include "exoassist/gait.hpp"
#include "exoassist/oscillator.hpp"
#include "exoassist/plant.hpp"
#include "exoassist/report.hpp"
#include "exoassist/scenario.hpp"
#include "exoassist/text.hpp"
#include "exoassist/tuning.hpp"
