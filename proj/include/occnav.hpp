#pragma once

#include "occnav/config.hpp"
#include "occnav/dataset.hpp"
#include "occnav/image.hpp"
#include "occnav/models/discriminator.hpp"
#include "occnav/models/generator.hpp"
#include "occnav/models/metrics.hpp"
#include "occnav/models/predictor.hpp"
#include "occnav/models/training.hpp"
#include "occnav/models/weights.hpp"
#include "occnav/navsim.hpp"
#include "occnav/nn/gradcheck.hpp"
#include "occnav/occupancy.hpp"
#include "occnav/sensor.hpp"
#include "occnav/worldgen.hpp"
