#pragma once

#include "declip/signal.hpp"
#include "declip/wav.hpp"
#include "declip/gabor.hpp"
#include "declip/psychoacoustics.hpp"
#include "declip/weights.hpp"
#include "declip/solver.hpp"
#include "declip/metrics.hpp"
#include "declip/experiment.hpp"
#include "declip/commands.hpp"
