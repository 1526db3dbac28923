#pragma once

// Umbrella header.
#include "seed6d/errors.hpp"
#include "seed6d/se3.hpp"
#include "seed6d/config.hpp"
#include "seed6d/stiffness.hpp"
#include "seed6d/controller.hpp"
#include "seed6d/plant.hpp"
#include "seed6d/scenario.hpp"
#include "seed6d/sysid.hpp"
#include "seed6d/image.hpp"
#include "seed6d/sensor.hpp"
#include "seed6d/estimator.hpp"
#include "seed6d/render.hpp"
#include "seed6d/corpus.hpp"
