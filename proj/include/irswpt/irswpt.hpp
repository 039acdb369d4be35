#pragma once

#include "irswpt/beamform.hpp"
#include "irswpt/channel.hpp"
#include "irswpt/core.hpp"
#include "irswpt/optimize.hpp"
#include "irswpt/quartic.hpp"
#include "irswpt/rectenna.hpp"
#include "irswpt/solvers.hpp"
#include "irswpt/system.hpp"
#include "irswpt/waveform.hpp"
