#pragma once

#include "driftfuzz/cluster.hpp"
#include "driftfuzz/core.hpp"
#include "driftfuzz/csv.hpp"
#include "driftfuzz/error.hpp"
#include "driftfuzz/frequency.hpp"
#include "driftfuzz/fwf.hpp"
#include "driftfuzz/gbdt.hpp"
#include "driftfuzz/harness.hpp"
#include "driftfuzz/impute.hpp"
#include "driftfuzz/json_io.hpp"
#include "driftfuzz/mdl.hpp"
#include "driftfuzz/observation_set.hpp"
#include "driftfuzz/random.hpp"
#include "driftfuzz/report.hpp"
#include "driftfuzz/stats.hpp"
#include "driftfuzz/synth.hpp"
