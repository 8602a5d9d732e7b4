#pragma once

#include "nadyn/errors.hpp"
#include "nadyn/interval.hpp"
#include "nadyn/metrics.hpp"
#include "nadyn/montecarlo.hpp"
#include "nadyn/plmap.hpp"
#include "nadyn/rational.hpp"
#include "nadyn/report.hpp"
#include "nadyn/system_io.hpp"
#include "nadyn/topology.hpp"
