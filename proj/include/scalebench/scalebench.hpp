#pragma once

#include "scalebench/cli.hpp"
#include "scalebench/config.hpp"
#include "scalebench/engine.hpp"
#include "scalebench/orchestrator.hpp"
#include "scalebench/plog.hpp"
#include "scalebench/report.hpp"
#include "scalebench/slo.hpp"
#include "scalebench/usecases.hpp"
#include "scalebench/windowing.hpp"
#include "scalebench/workload.hpp"
