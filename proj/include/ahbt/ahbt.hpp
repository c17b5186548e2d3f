#pragma once

#include "ahbt/analysis.hpp"
#include "ahbt/calibration.hpp"
#include "ahbt/circuit.hpp"
#include "ahbt/clicks.hpp"
#include "ahbt/errors.hpp"
#include "ahbt/experiment.hpp"
#include "ahbt/fock.hpp"
#include "ahbt/gaussian_state.hpp"
#include "ahbt/histogram.hpp"
#include "ahbt/moments.hpp"
#include "ahbt/pipeline.hpp"
#include "ahbt/scenario.hpp"
#include "ahbt/special_functions.hpp"
#include "ahbt/timetags.hpp"
